#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ndsp/cover_types.hpp"
#include "ndsp/geometry.hpp"

namespace ndsp {

/// Limits for the exhaustive solvers, checked after reductions (duplicate and
/// dominated candidates removed, points with identical memberships merged).
struct OracleBudget {
  std::size_t maxPoints = 12;
  std::size_t maxCandidates = 60;
  std::uint64_t maxSubsets = std::uint64_t{1} << 24;
};

/// A ball with its log weight (log of exp(-s n + S_n phi(center))).
struct WeightedBall {
  BowenBall ball;
  double logWeight = 0.0;
};

/// Index-level instance: `sets[i]` lists universe elements, `logWeights[i]` its cost.
struct SetSystem {
  std::size_t universe = 0;
  std::vector<std::vector<std::uint32_t>> sets;
  std::vector<double> logWeights;
};

struct OracleSolution {
  double logValue = 0.0;
  std::vector<std::size_t> chosen;  // indices into the input, ascending
  std::uint64_t nodes = 0;
};

/// Minimum-weight subfamily covering the whole universe. Throws
/// CapacityError past the budget and InvalidArgument when no cover exists.
OracleSolution solveExactCover(const SetSystem& system, const OracleBudget& budget);

/// Maximum-weight subfamily of pairwise disjoint sets.
OracleSolution solveExactPacking(const SetSystem& system, const OracleBudget& budget);

/// Maximum-weight independent set on an explicit conflict graph
/// (`conflicts[i]` lists neighbours of i).
OracleSolution solveExactIndependentSet(const std::vector<std::vector<std::uint32_t>>& conflicts,
                                        const std::vector<double>& logWeights,
                                        const OracleBudget& budget);

/// Exact infimum of sum of weights over subfamilies whose balls cover K.
CoverSum exactCoverInfimum(const std::vector<WeightedBall>& candidates, const PointSet& K,
                           const OracleBudget& budget = {});

/// Exact supremum of sum of weights over pairwise disjoint subfamilies.
CoverSum exactPackingSupremum(const std::vector<WeightedBall>& candidates,
                              const OracleBudget& budget = {});

/// FNV-1a hash of a canonical instance string.
std::uint64_t instanceHash(const std::string& canonical);

/// Writes {hash, value, logValue, witnesses} to `path` as JSON.
void emitOracleFixture(const std::string& path, const std::string& name,
                       const std::string& canonicalInstance, const CoverSum& result);

}  // namespace ndsp
