#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "ndsp/cover_types.hpp"
#include "ndsp/geometry.hpp"
#include "ndsp/oracle.hpp"
#include "ndsp/systems.hpp"

namespace ndsp {

struct EngineOptions {
  // Run the exhaustive solver whenever the reduced instance fits the budget.
  bool useOracle = true;
  OracleBudget budget;
};

struct CountResult {
  PointSet set;
  std::size_t cardinality = 0;
  bool exact = false;
};

/// A set of points with its weighted sum log(sum exp(S_n phi)).
struct WeightedSet {
  std::vector<Point> points;
  double logValue = 0.0;
  bool exact = false;
};

/// Open Bowen balls centered anywhere in X, n in [N, Nmax], restricted to K.
/// Candidates with the same n and the same trace on K are merged, keeping the
/// cheapest center.
struct CoverPool {
  struct Candidate {
    Point center;
    std::size_t n;
    double birkhoff;                     // S_n phi(center)
    std::vector<std::uint32_t> covers;   // positions in K
  };
  PointSet K;
  double eps = 0.0;
  std::size_t N = 1;
  std::size_t Nmax = 1;
  std::vector<Candidate> candidates;
  // Greedy cover per length n (index n - N) using only that length; its
  // selection does not depend on s.
  std::vector<CoverSum> fixedGreedy;
  bool oracleEligible = false;
};

/// Closed Bowen balls with centers in K, n in [N, Nmax]. Equal balls at equal
/// n are grouped; each group lists its admissible centers, heaviest first.
struct PackingPool {
  struct Group {
    std::size_t n;
    const std::vector<Point>* ball;  // members in X, owned by the geometry
    std::vector<std::pair<double, Point>> centers;
  };
  PointSet K;
  double eps = 0.0;
  std::size_t N = 1;
  std::size_t Nmax = 1;
  std::vector<Group> groups;
  bool oracleEligible = false;
};

/// Cover and packing engines over one system and potential. Pools and
/// results borrow ball storage from the shared geometry.
class CoverEngine {
 public:
  CoverEngine(std::shared_ptr<const BowenGeometry> geometry, Potential potential,
              EngineOptions options = {});
  CoverEngine(const MetricSpace& space, const MapSequence& maps, Potential potential,
              std::size_t horizon, EngineOptions options = {});

  const BowenGeometry& geometry() const noexcept { return *geometry_; }
  std::shared_ptr<const BowenGeometry> sharedGeometry() const noexcept { return geometry_; }
  const Potential& potential() const noexcept { return potential_; }
  const EngineOptions& options() const noexcept { return options_; }
  double birkhoff(std::size_t n, Point x) const { return birkhoff_[n][x]; }

  CountResult spanningSet(const PointSet& K, std::size_t n, double eps) const;
  CountResult separatedSet(const PointSet& K, std::size_t n, double eps) const;
  /// Best (n,eps)-separated subset of K found for sup sum exp(S_n phi).
  WeightedSet separatedSum(const PointSet& K, std::size_t n, double eps) const;

  CoverPool coverPool(const PointSet& K, double eps, std::size_t N, std::size_t Nmax) const;
  PackingPool packingPool(const PointSet& K, double eps, std::size_t N, std::size_t Nmax) const;

  /// Cover sum of a pool at parameter s: the smaller of the pooled greedy
  /// and each single-length greedy, replaced by the exact value when the
  /// oracle succeeds.
  CoverSum coverSum(const CoverPool& pool, double s) const;
  /// Packing sum of a pool at s, centers limited to `centers` when given.
  CoverSum packingSum(const PackingPool& pool, double s,
                      const std::vector<Point>* centers = nullptr) const;
  CoverSum refinedPackingSum(const PackingPool& pool, double s, std::size_t parts) const;

  CoverSum fixedCoverSum(const PointSet& K, std::size_t N, double eps) const;
  CoverSum variableCoverSum(const PointSet& K, double eps, double s, std::size_t N,
                            std::size_t Nmax) const;
  CoverSum packingSum(const PointSet& K, double eps, double s, std::size_t N,
                      std::size_t Nmax) const;
  CoverSum refinedPackingSum(const PointSet& K, double eps, double s, std::size_t N,
                             std::size_t Nmax, std::size_t parts) const;
  CoverSum openCoverSum(const PointSet& K, std::size_t n,
                        const std::vector<PointSet>& coverU) const;

  /// Partitions of K searched by refinedPackingSum (the trivial one first).
  std::vector<std::vector<std::vector<Point>>> candidatePartitions(const PointSet& K,
                                                                   std::size_t n,
                                                                   std::size_t parts) const;

 private:
  void checkWindow(const PointSet& K, std::size_t N, std::size_t Nmax) const;

  std::shared_ptr<const BowenGeometry> geometry_;
  Potential potential_;
  EngineOptions options_;
  std::vector<std::vector<double>> birkhoff_;
};

/// Greedy cover of `universe` elements by weighted sets (lazy priority on
/// log weight minus log of newly covered count, then redundant sets dropped).
/// Returns chosen indices in selection order.
std::vector<std::size_t> greedyCover(std::size_t universe,
                                     const std::vector<const std::vector<std::uint32_t>*>& sets,
                                     const std::vector<double>& logWeights,
                                     const std::vector<std::pair<Point, std::size_t>>& tieKeys);

/// Disjoint subfamily selected greedily by decreasing radius; the union of
/// the input is re-checked against the 5r-enlarged selection.
std::vector<BowenBall> vitaliSubfamily(const MetricSpace& space, const MapSequence& maps,
                                       const std::vector<BowenBall>& balls);

// Single-call forms building a temporary engine.
CountResult spanningSet(const MetricSpace& space, const MapSequence& maps, const PointSet& K,
                        std::size_t n, double eps, EngineOptions options = {});
CountResult separatedSet(const MetricSpace& space, const MapSequence& maps, const PointSet& K,
                         std::size_t n, double eps, EngineOptions options = {});
CoverSum fixedCoverSum(const MetricSpace& space, const MapSequence& maps, const PointSet& K,
                       const Potential& potential, std::size_t N, double eps,
                       EngineOptions options = {});
CoverSum variableCoverSum(const MetricSpace& space, const MapSequence& maps, const PointSet& K,
                          const Potential& potential, double eps, double s, std::size_t N,
                          std::size_t Nmax, EngineOptions options = {});
CoverSum packingSum(const MetricSpace& space, const MapSequence& maps, const PointSet& K,
                    const Potential& potential, double eps, double s, std::size_t N,
                    std::size_t Nmax, EngineOptions options = {});
CoverSum refinedPackingSum(const MetricSpace& space, const MapSequence& maps, const PointSet& K,
                           const Potential& potential, double eps, double s, std::size_t N,
                           std::size_t Nmax, std::size_t parts, EngineOptions options = {});
CoverSum openCoverSum(const MetricSpace& space, const MapSequence& maps, const PointSet& K,
                      const Potential& potential, std::size_t n,
                      const std::vector<PointSet>& coverU, EngineOptions options = {});

}  // namespace ndsp
