#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ndsp/cover.hpp"

namespace ndsp {

enum class PressureKind { Classical, Pesin, Packing, CapacityUpper, CapacityLower };
enum class ClassicalMode { Spanning, Separated };

std::string toString(PressureKind kind);
PressureKind pressureKindFromString(const std::string& name);

/// One (eps, N) entry: `raw` is the log of the functional (or the critical
/// value for Pesin/packing rows), `normalized` is raw / N (or the critical value).
struct ScaleRow {
  double eps = 0.0;
  std::size_t N = 0;
  double raw = 0.0;
  double normalized = 0.0;
  bool exact = false;
};

struct PressureEstimate {
  PressureKind kind = PressureKind::Classical;
  double value = 0.0;
  std::vector<double> epsSchedule;
  std::vector<std::size_t> nSchedule;
  std::optional<std::pair<std::size_t, std::size_t>> window;
  std::optional<std::pair<double, double>> sBracket;
  std::vector<ScaleRow> perScaleTable;
  std::vector<double> perEps;  // surrogate value at each eps, schedule order
  bool exact = false;
  // Bound on the log-ratio error of greedy ingredients, added to chain tolerances.
  double gapAllowance = 0.0;
  std::string algorithm;
};

/// Finds s where a nonincreasing functional crosses `threshold`, working on
/// log values. The bracket is widened by doubling (at most 60 steps each
/// side) before bisecting to width <= tol; returns the midpoint. Throws
/// NoJumpError when no crossing can be bracketed.
double criticalValueLog(const std::function<double(double)>& logFunctional,
                        std::pair<double, double> bracket, double tol, double logThreshold = 0.0,
                        std::pair<double, double>* finalBracket = nullptr);

/// Same on plain values in [0, inf].
double criticalValue(const std::function<double(double)>& functional,
                     std::pair<double, double> bracket, double tol, double threshold = 1.0);

/// Default initial bracket [-|phi| - 1, |phi| + log(P)/N + 1].
std::pair<double, double> defaultBracket(const Potential& potential, std::size_t points,
                                         std::size_t N);

/// Tail of a schedule used for limsup/liminf surrogates: the last ceil(half).
std::size_t tailStart(std::size_t scheduleLength);

PressureEstimate classicalPressure(const CoverEngine& engine, const PointSet& K,
                                   const std::vector<double>& epsSchedule,
                                   const std::vector<std::size_t>& nSchedule, ClassicalMode mode);
PressureEstimate capacityPressure(const CoverEngine& engine, const PointSet& K,
                                  const std::vector<double>& epsSchedule,
                                  const std::vector<std::size_t>& nSchedule, bool upper);
PressureEstimate pesinPressure(const CoverEngine& engine, const PointSet& K,
                               const std::vector<double>& epsSchedule, std::size_t N,
                               std::size_t Nmax, double tol = 1e-8);
PressureEstimate packingPressure(const CoverEngine& engine, const PointSet& K,
                                 const std::vector<double>& epsSchedule, std::size_t N,
                                 std::size_t Nmax, std::size_t parts = 4, double tol = 1e-8);

struct RelationshipConfig {
  std::vector<double> epsSchedule;
  std::size_t N = 4;
  std::size_t Nmax = 12;
  std::size_t parts = 4;
  double tol = 1e-8;
  double chainTol = 0.05;
  double scaleTol = 1e-9;
};

struct ChainCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct RelationshipReport {
  PressureEstimate classical;          // separated mode
  PressureEstimate classicalSpanning;
  PressureEstimate pesin;
  PressureEstimate packing;
  PressureEstimate capacityUpper;
  PressureEstimate capacityLower;
  std::vector<ChainCheck> checks;
  double maxScaleGap = 0.0;  // max |CP-bar - P(spanning)| over scales
  bool pass = false;
};

/// All five estimators on the shared schedule nSchedule = N..Nmax, with the
/// chain checks P^B <= CP_ <= CP-bar, P^B <= P^P <= P, P^P <= CP-bar, and
/// CP-bar = P(spanning) scale by scale.
RelationshipReport relationshipReport(const CoverEngine& engine, const PointSet& K,
                                      const RelationshipConfig& config);

// Forms taking the raw system.
PressureEstimate classicalPressure(const MetricSpace& space, const MapSequence& maps,
                                   const PointSet& K, const Potential& potential,
                                   const std::vector<double>& epsSchedule,
                                   const std::vector<std::size_t>& nSchedule, ClassicalMode mode,
                                   EngineOptions options = {});
PressureEstimate capacityPressure(const MetricSpace& space, const MapSequence& maps,
                                  const PointSet& K, const Potential& potential,
                                  const std::vector<double>& epsSchedule,
                                  const std::vector<std::size_t>& nSchedule, bool upper,
                                  EngineOptions options = {});
PressureEstimate pesinPressure(const MetricSpace& space, const MapSequence& maps,
                               const PointSet& K, const Potential& potential,
                               const std::vector<double>& epsSchedule, std::size_t N,
                               std::size_t Nmax, double tol = 1e-8, EngineOptions options = {});
PressureEstimate packingPressure(const MetricSpace& space, const MapSequence& maps,
                                 const PointSet& K, const Potential& potential,
                                 const std::vector<double>& epsSchedule, std::size_t N,
                                 std::size_t Nmax, std::size_t parts = 4, double tol = 1e-8,
                                 EngineOptions options = {});

}  // namespace ndsp
