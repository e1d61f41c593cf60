#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ndsp/cover.hpp"
#include "ndsp/pressure.hpp"

namespace ndsp {

/// Probability vector on the points of a space; normalized at construction
/// and immutable afterwards.
class DiscreteMeasure {
 public:
  DiscreteMeasure(std::vector<double> weights, std::string name = "mu");

  static DiscreteMeasure dirac(std::size_t size, Point x);
  static DiscreteMeasure uniform(std::size_t size);
  static DiscreteMeasure uniformOn(const PointSet& set);
  /// Product measure on the words of a cyclic shift; p is the probability of
  /// symbol 1 (binary alphabet only).
  static DiscreteMeasure bernoulli(const System& shift, double p);
  /// mu(. | K); throws when mu(K) = 0.
  static DiscreteMeasure conditioned(const DiscreteMeasure& mu, const PointSet& K);

  double operator()(Point x) const { return weights_[x]; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return weights_.size(); }
  const std::string& name() const noexcept { return name_; }
  std::vector<Point> support() const;
  double mass(const PointSet& set) const;
  double mass(const std::vector<Point>& points) const;
  double integral(const std::vector<double>& g) const;

 private:
  std::vector<double> weights_;
  std::string name_;
};

DiscreteMeasure pushforward(const DiscreteMeasure& mu, const MapTable& map);

/// max over 1 <= k <= horizon and g in the family of |int g o f_k dmu - int g dmu|.
double invarianceDefect(const DiscreteMeasure& mu, const MapSequence& maps, std::size_t horizon,
                        const TestFunctionFamily& family);

double ballMass(const DiscreteMeasure& mu, const BowenBall& ball);

struct LocalPressureProfile {
  std::vector<Point> samplePoints;
  std::vector<double> epsSchedule;
  std::vector<std::size_t> nSchedule;
  /// table[i][e * nSchedule.size() + k] for sample i; +inf on zero-mass balls.
  std::vector<std::vector<double>> table;
  std::vector<double> upper;
  std::vector<double> lower;
  std::size_t infiniteEntries = 0;

  /// Position of x among the samples, if sampled.
  std::optional<std::size_t> indexOf(Point x) const;
  double value(std::size_t sample, std::size_t e, std::size_t k) const {
    return table[sample][e * nSchedule.size() + k];
  }
};

/// (-log mu(B_n(x,eps)) + S_n phi(x)) / n on open balls; upper/lower are the
/// tail max/min at the smallest eps. The engine horizon must cover nSchedule.
LocalPressureProfile localPressure(const DiscreteMeasure& mu, const CoverEngine& engine,
                                   const std::vector<Point>& samplePoints,
                                   const std::vector<double>& epsSchedule,
                                   const std::vector<std::size_t>& nSchedule);
LocalPressureProfile localPressure(const DiscreteMeasure& mu, const MetricSpace& space,
                                   const MapSequence& maps, const Potential& potential,
                                   const std::vector<Point>& samplePoints,
                                   const std::vector<double>& epsSchedule,
                                   const std::vector<std::size_t>& nSchedule);

enum class ProfileSide { Upper, Lower };

struct SetIntegral {
  double value = 0.0;
  std::vector<std::string> warnings;
};

/// sum over x in K of mu(x) times the upper or lower profile value.
SetIntegral measurePressureOverSet(const DiscreteMeasure& mu, const PointSet& K,
                                   const LocalPressureProfile& profile, ProfileSide side);

struct MeasurePressureConfig {
  std::vector<double> epsSchedule{0.5};
  std::vector<std::size_t> nSchedule{4, 5, 6, 7, 8};
  std::size_t N = 4;
  std::size_t Nmax = 12;
  std::size_t parts = 4;
  double tol = 1e-8;
};

struct MeasureCandidate {
  double delta = 0.0;
  std::size_t size = 0;
  double mass = 0.0;
  double value = 0.0;
  bool fullSupport = false;
};

struct MeasurePressureResult {
  double value = 0.0;          // minimum over candidates at the final delta
  double fullSupportValue = 0.0;
  std::vector<double> deltaSchedule;
  std::vector<double> perDelta;
  std::vector<MeasureCandidate> candidates;
};

/// Sublevel-set candidates of mu: support points ordered by upper local
/// pressure (then index), shortest prefix with mass >= 1 - delta. The full
/// support is always a candidate; delta = 0 keeps only it.
std::vector<std::vector<Point>> sublevelCandidates(const DiscreteMeasure& mu,
                                                   const LocalPressureProfile& profile,
                                                   double delta);

MeasurePressureResult measureCPPressure(const DiscreteMeasure& mu, const CoverEngine& engine,
                                        PressureKind kind,
                                        const std::vector<double>& deltaSchedule = {0.1, 0.01, 0.0},
                                        const MeasurePressureConfig& config = {});

/// P*_mu: spanning growth minimized over the same candidates, per (eps, n, delta).
MeasurePressureResult spanningMeasurePressure(const DiscreteMeasure& mu,
                                              const CoverEngine& engine,
                                              const std::vector<double>& epsSchedule,
                                              const std::vector<std::size_t>& nSchedule,
                                              const std::vector<double>& deltaSchedule = {0.1, 0.01,
                                                                                          0.0});

struct BallWitness {
  Point center = 0;
  std::size_t n = 0;
  double eps = 0.0;
  double mass = 0.0;
  double bound = 0.0;
};

struct DistributionReport {
  std::string status;  // pass | hypothesis-1 | hypothesis-2 | limit | conclusion
  bool hypothesis1 = false;
  bool hypothesis2 = false;
  bool limitPositive = false;
  std::optional<BallWitness> witness;
  std::optional<double> pesin;
  double s = 0.0;
  double tolerance = 0.0;
  bool conclusion = false;
  std::size_t tailStart = 0;  // first sequence index of the limsup surrogate
};

/// Hypotheses: mu_k(K) > 0, and max over the sequence tail of
/// mu_k(B_n(x,eps)) <= bigK exp(-n s + S_n phi(x)) for every open ball
/// meeting K. On success P^B(K) >= s - tolerance is checked with the Pesin
/// estimate over the window [min n, max n].
DistributionReport distributionPrincipleCheck(const std::vector<DiscreteMeasure>& muSequence,
                                              const CoverEngine& engine, const PointSet& K,
                                              double s, double eps, double bigK,
                                              const std::vector<std::size_t>& nSchedule,
                                              double tolerance = 0.05);

enum class BillingsleyDirection { UpperLE, LowerGE };

struct BillingsleyReport {
  std::string status;  // pass | hypothesis | conclusion
  BillingsleyDirection direction = BillingsleyDirection::UpperLE;
  double s = 0.0;
  bool hypothesis = false;
  double massK = 0.0;
  std::vector<Point> witnesses;
  std::optional<double> packing;
  double tolerance = 0.0;
  bool conclusion = false;
};

BillingsleyReport billingsleyBound(const DiscreteMeasure& mu, const CoverEngine& engine,
                                   const PointSet& K, double s,
                                   const LocalPressureProfile& profile,
                                   BillingsleyDirection direction,
                                   const MeasurePressureConfig& config = {},
                                   double tolerance = 0.05);

struct VariationalEntry {
  std::string name;
  double upperOverSet = 0.0;
  double measurePacking = 0.0;
};

struct VariationalReport {
  double packing = 0.0;
  bool precondition = false;  // packing estimate >= sup norm of phi
  std::vector<VariationalEntry> entries;
  double supUpper = 0.0;
  std::size_t argmaxUpper = 0;
  double supMeasurePacking = 0.0;
  std::size_t argmaxMeasurePacking = 0;
  double gapUpper = 0.0;           // packing - supUpper
  double gapMeasurePacking = 0.0;  // packing - supMeasurePacking
  double tolerance = 0.0;
  bool pass = false;               // supUpper <= packing + tolerance
};

/// profileNs is the n schedule of the local profiles.
VariationalReport variationalGap(const CoverEngine& engine, const PointSet& K,
                                 const std::vector<DiscreteMeasure>& family,
                                 const std::vector<std::size_t>& profileNs,
                                 const MeasurePressureConfig& config = {},
                                 double tolerance = 0.05);

/// (1/n) sum_{j<n} delta_{f_1^j x}.
DiscreteMeasure empiricalMeasure(const MetricSpace& space, const MapSequence& maps, Point x,
                                 std::size_t n);

/// max over the family of |int g dnu - int g dmu|.
double familySeminorm(const DiscreteMeasure& nu, const DiscreteMeasure& mu,
                      const TestFunctionFamily& family);

struct GenericPoints {
  PointSet generic;                 // Gamma_n(x) in F for all n in [m, nMax]
  std::vector<PointSet> perN;       // X_{n,F} for n = 1..nMax (index n-1)
};

GenericPoints genericPoints(const DiscreteMeasure& mu, const MetricSpace& space,
                            const MapSequence& maps, const TestFunctionFamily& family,
                            double radius, std::size_t m, std::size_t nMax);

struct GenericBoundConfig {
  double radius = 0.5;
  std::size_t m = 1;
  std::size_t nMax = 12;
  double eps = 0.5;
  std::size_t N = 4;
  std::size_t Nmax = 12;
  std::size_t parts = 4;
  double tol = 1e-8;
  double tolerance = 0.05;
};

struct GenericBoundReport {
  std::string status;  // pass | fail | vacuous
  std::size_t genericSize = 0;
  double left = 0.0;
  double right = 0.0;
  std::vector<double> rightPerN;  // for n in [m, nMax]; -inf when X_{n,F} is empty
  double tolerance = 0.0;
};

/// Packing estimate on the generic surrogate against the tail max of
/// (1/n) log of the separated supremum on X_{n,F}.
GenericBoundReport packingBoundOnGeneric(const DiscreteMeasure& mu, const CoverEngine& engine,
                                         const TestFunctionFamily& family,
                                         const GenericBoundConfig& config);

/// Points x whose metric ball U = {d(x,.) < radius} meets f_n^k(U) for some
/// 1 <= n, k <= kMax.
PointSet nonWanderingSet(const MetricSpace& space, const MapSequence& maps, std::size_t kMax,
                         double radius);

struct UniformLimitReport {
  std::vector<std::size_t> tail;
  std::vector<double> tailDistances;  // sup_x d(f_n x, f x)
  double sequenceDefect = 0.0;
  double limitDefect = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// Tail is the last half of 1..horizon.
UniformLimitReport uniformLimitCheck(const DiscreteMeasure& mu, const MetricSpace& space,
                                     const MapSequence& maps, const MapTable& limitMap,
                                     const TestFunctionFamily& family, std::size_t horizon);

}  // namespace ndsp
