#include "ndsp/oracle.hpp"

#include <algorithm>
#include <tuple>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include "json.hpp"
#include "ndsp/error.hpp"

namespace ndsp {

namespace {

using Mask = std::uint64_t;
constexpr std::size_t kMaxBits = 64;
constexpr double kMaxLogRange = 600.0;

std::size_t clampBits(std::size_t n) { return std::min(n, kMaxBits); }

Mask bit(std::size_t i) { return Mask{1} << i; }

// Groups universe elements by the exact list of sets containing them.
struct Typed {
  std::size_t types = 0;
  std::vector<Mask> masks;  // per set
};

Typed mergeTypes(const SetSystem& system, std::size_t maxPoints, const char* what) {
  std::vector<std::vector<std::uint32_t>> membership(system.universe);
  for (std::size_t i = 0; i < system.sets.size(); ++i) {
    for (auto e : system.sets[i]) {
      if (e >= system.universe) throw InvalidArgument("set element outside the universe");
      if (membership[e].empty() || membership[e].back() != i) {
        membership[e].push_back(static_cast<std::uint32_t>(i));
      }
    }
  }
  std::map<std::vector<std::uint32_t>, std::size_t> typeOf;
  for (const auto& m : membership) {
    if (m.empty()) continue;
    typeOf.try_emplace(m, typeOf.size());
  }
  const std::size_t limit = clampBits(maxPoints);
  if (typeOf.size() > limit) {
    throw CapacityError(std::string(what) + ": " + std::to_string(typeOf.size()) +
                        " point types exceed the oracle budget of " + std::to_string(limit));
  }
  Typed typed;
  typed.types = typeOf.size();
  typed.masks.assign(system.sets.size(), 0);
  for (const auto& [m, t] : typeOf) {
    for (auto i : m) typed.masks[i] |= bit(t);
  }
  return typed;
}

void checkRange(const std::vector<double>& logWeights, const std::vector<std::size_t>& idx) {
  if (idx.empty()) return;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (auto i : idx) {
    if (!std::isfinite(logWeights[i])) throw InvalidArgument("oracle weights must be finite");
    lo = std::min(lo, logWeights[i]);
    hi = std::max(hi, logWeights[i]);
  }
  if (hi - lo > kMaxLogRange) {
    throw CapacityError("oracle weights span more than e^600; rescale the instance");
  }
}

double logOfChosen(const std::vector<double>& logWeights, std::vector<std::size_t>& chosen) {
  std::sort(chosen.begin(), chosen.end());
  std::vector<double> v;
  for (auto i : chosen) v.push_back(logWeights[i]);
  return logSumExp(v);
}

class CoverSearch {
 public:
  CoverSearch(std::vector<Mask> masks, std::vector<double> weights, std::size_t types,
              std::uint64_t maxNodes)
      : masks_(std::move(masks)), w_(std::move(weights)), maxNodes_(maxNodes) {
    full_ = types == 64 ? ~Mask{0} : bit(types) - 1;
    byElement_.resize(types);
    for (std::size_t c = 0; c < masks_.size(); ++c) {
      for (std::size_t e = 0; e < types; ++e) {
        if (masks_[c] & bit(e)) byElement_[e].push_back(c);
      }
    }
    for (auto& list : byElement_) {
      std::stable_sort(list.begin(), list.end(), [&](auto a, auto b) { return w_[a] < w_[b]; });
    }
  }

  std::vector<std::size_t> solve() {
    greedyIncumbent();
    std::vector<std::size_t> path;
    recurse(full_, 0.0, path);
    return best_;
  }

  std::uint64_t nodes() const { return nodes_; }

 private:
  void greedyIncumbent() {
    Mask uncovered = full_;
    std::vector<std::size_t> chosen;
    double cost = 0.0;
    while (uncovered) {
      std::size_t pick = masks_.size();
      double bestRatio = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < masks_.size(); ++c) {
        const int gain = std::popcount(masks_[c] & uncovered);
        if (gain == 0) continue;
        const double ratio = w_[c] / gain;
        if (ratio < bestRatio) {
          bestRatio = ratio;
          pick = c;
        }
      }
      chosen.push_back(pick);
      cost += w_[pick];
      uncovered &= ~masks_[pick];
    }
    best_ = chosen;
    bestCost_ = cost;
  }

  double lowerBound(Mask uncovered) const {
    double fractional = 0.0;
    double single = 0.0;
    for (Mask m = uncovered; m; m &= m - 1) {
      const auto e = static_cast<std::size_t>(std::countr_zero(m));
      double cheapestShare = std::numeric_limits<double>::infinity();
      double cheapest = std::numeric_limits<double>::infinity();
      for (auto c : byElement_[e]) {
        cheapest = std::min(cheapest, w_[c]);
        cheapestShare = std::min(cheapestShare, w_[c] / std::popcount(masks_[c] & uncovered));
      }
      fractional += cheapestShare;
      single = std::max(single, cheapest);
    }
    return std::max(fractional, single);
  }

  void recurse(Mask uncovered, double cost, std::vector<std::size_t>& path) {
    if (++nodes_ > maxNodes_) {
      throw CapacityError("oracle cover search exceeded " + std::to_string(maxNodes_) + " nodes");
    }
    if (!uncovered) {
      if (cost < bestCost_) {
        bestCost_ = cost;
        best_ = path;
      }
      return;
    }
    if (cost + lowerBound(uncovered) >= bestCost_) return;
    std::size_t branchOn = 0;
    std::size_t fewest = std::numeric_limits<std::size_t>::max();
    for (Mask m = uncovered; m; m &= m - 1) {
      const auto e = static_cast<std::size_t>(std::countr_zero(m));
      if (byElement_[e].size() < fewest) {
        fewest = byElement_[e].size();
        branchOn = e;
      }
    }
    for (auto c : byElement_[branchOn]) {
      path.push_back(c);
      recurse(uncovered & ~masks_[c], cost + w_[c], path);
      path.pop_back();
    }
  }

  std::vector<Mask> masks_;
  std::vector<double> w_;
  std::vector<std::vector<std::size_t>> byElement_;
  Mask full_ = 0;
  std::uint64_t maxNodes_;
  std::uint64_t nodes_ = 0;
  std::vector<std::size_t> best_;
  double bestCost_ = std::numeric_limits<double>::infinity();
};

// Vertices must be pre-sorted by descending weight.
class IndependentSetSearch {
 public:
  IndependentSetSearch(std::vector<Mask> adjacency, std::vector<double> weights,
                       std::uint64_t maxNodes)
      : adj_(std::move(adjacency)), w_(std::move(weights)), maxNodes_(maxNodes) {}

  Mask solve() {
    const std::size_t n = w_.size();
    const Mask all = n == 64 ? ~Mask{0} : bit(n) - 1;
    Mask greedy = 0;
    Mask blocked = 0;
    double cost = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (blocked & bit(v)) continue;
      greedy |= bit(v);
      blocked |= adj_[v] | bit(v);
      cost += w_[v];
    }
    best_ = greedy;
    bestWeight_ = cost;
    recurse(all, 0, 0.0);
    return best_;
  }

  std::uint64_t nodes() const { return nodes_; }

 private:
  double cliqueBound(Mask candidates) const {
    std::vector<Mask> cliques;
    double bound = 0.0;
    for (Mask m = candidates; m; m &= m - 1) {
      const auto v = static_cast<std::size_t>(std::countr_zero(m));
      bool placed = false;
      for (auto& c : cliques) {
        if ((c & adj_[v]) == c) {
          c |= bit(v);
          placed = true;
          break;
        }
      }
      if (!placed) {
        cliques.push_back(bit(v));
        bound += w_[v];
      }
    }
    return bound;
  }

  void recurse(Mask candidates, Mask chosen, double weight) {
    if (++nodes_ > maxNodes_) {
      throw CapacityError("oracle packing search exceeded " + std::to_string(maxNodes_) +
                          " nodes");
    }
    if (!candidates) {
      if (weight > bestWeight_) {
        bestWeight_ = weight;
        best_ = chosen;
      }
      return;
    }
    if (weight + cliqueBound(candidates) <= bestWeight_) return;
    const auto v = static_cast<std::size_t>(std::countr_zero(candidates));
    recurse(candidates & ~adj_[v] & ~bit(v), chosen | bit(v), weight + w_[v]);
    recurse(candidates & ~bit(v), chosen, weight);
  }

  std::vector<Mask> adj_;
  std::vector<double> w_;
  std::uint64_t maxNodes_;
  std::uint64_t nodes_ = 0;
  Mask best_ = 0;
  double bestWeight_ = 0.0;
};

// MWIS over `keep` (indices into logWeights) with adjacency given per kept
// position. Returns the chosen original indices.
OracleSolution runIndependentSet(const std::vector<std::size_t>& keep,
                                 const std::vector<Mask>& adjacencyByPosition,
                                 const std::vector<double>& logWeights,
                                 const OracleBudget& budget) {
  OracleSolution out;
  if (keep.empty()) {
    out.logValue = -std::numeric_limits<double>::infinity();
    return out;
  }
  checkRange(logWeights, keep);
  // Canonical order: descending weight, then original index.
  std::vector<std::size_t> order(keep.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    const double wa = logWeights[keep[a]], wb = logWeights[keep[b]];
    return wa != wb ? wa > wb : keep[a] < keep[b];
  });
  std::vector<std::size_t> position(keep.size());
  for (std::size_t r = 0; r < order.size(); ++r) position[order[r]] = r;
  double top = logWeights[keep[order.front()]];
  std::vector<Mask> adj(keep.size(), 0);
  std::vector<double> w(keep.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    const std::size_t p = order[r];
    w[r] = std::exp(logWeights[keep[p]] - top);
    for (Mask m = adjacencyByPosition[p]; m; m &= m - 1) {
      adj[r] |= bit(position[static_cast<std::size_t>(std::countr_zero(m))]);
    }
  }
  IndependentSetSearch search(std::move(adj), std::move(w), budget.maxSubsets);
  const Mask best = search.solve();
  for (Mask m = best; m; m &= m - 1) {
    out.chosen.push_back(keep[order[static_cast<std::size_t>(std::countr_zero(m))]]);
  }
  out.logValue = logOfChosen(logWeights, out.chosen);
  out.nodes = search.nodes();
  return out;
}

}  // namespace

OracleSolution solveExactCover(const SetSystem& system, const OracleBudget& budget) {
  if (system.sets.size() != system.logWeights.size()) {
    throw InvalidArgument("cover instance has mismatched sets and weights");
  }
  std::vector<bool> coverable(system.universe, false);
  for (const auto& s : system.sets) {
    for (auto e : s) {
      if (e < system.universe) coverable[e] = true;
    }
  }
  for (std::size_t e = 0; e < system.universe; ++e) {
    if (!coverable[e]) {
      throw InvalidArgument("element " + std::to_string(e) + " is covered by no candidate");
    }
  }
  OracleSolution out;
  if (system.universe == 0) {
    out.logValue = -std::numeric_limits<double>::infinity();
    return out;
  }
  const Typed typed = mergeTypes(system, budget.maxPoints, "cover oracle");

  // Canonical order by (weight, mask, index); drop duplicates and dominated sets.
  std::vector<std::size_t> order(system.sets.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    if (system.logWeights[a] != system.logWeights[b]) {
      return system.logWeights[a] < system.logWeights[b];
    }
    if (typed.masks[a] != typed.masks[b]) return typed.masks[a] < typed.masks[b];
    return a < b;
  });
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < order.size(); ++r) {
    const std::size_t c = order[r];
    const Mask mc = typed.masks[c];
    if (mc == 0) continue;
    bool dominated = false;
    for (std::size_t q = 0; q < order.size() && !dominated; ++q) {
      const std::size_t d = order[q];
      if (d == c) continue;
      const Mask md = typed.masks[d];
      if ((mc & md) != mc || system.logWeights[d] > system.logWeights[c]) continue;
      // d covers at least what c covers and costs no more; equal pairs keep the earlier one.
      dominated = md != mc || system.logWeights[d] < system.logWeights[c] || q < r;
    }
    if (!dominated) keep.push_back(c);
  }
  if (keep.size() > budget.maxCandidates) {
    throw CapacityError("cover oracle: " + std::to_string(keep.size()) +
                        " candidates exceed the budget of " +
                        std::to_string(budget.maxCandidates));
  }
  checkRange(system.logWeights, keep);
  const double base = system.logWeights[keep.front()];
  std::vector<Mask> masks;
  std::vector<double> w;
  for (auto c : keep) {
    masks.push_back(typed.masks[c]);
    w.push_back(std::exp(system.logWeights[c] - base));
  }
  CoverSearch search(std::move(masks), std::move(w), typed.types, budget.maxSubsets);
  for (auto pos : search.solve()) out.chosen.push_back(keep[pos]);
  out.logValue = logOfChosen(system.logWeights, out.chosen);
  out.nodes = search.nodes();
  return out;
}

OracleSolution solveExactPacking(const SetSystem& system, const OracleBudget& budget) {
  if (system.sets.size() != system.logWeights.size()) {
    throw InvalidArgument("packing instance has mismatched sets and weights");
  }
  const Typed typed = mergeTypes(system, budget.maxPoints, "packing oracle");
  // Duplicates keep the heaviest (then lowest index).
  std::vector<std::size_t> order(system.sets.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    if (system.logWeights[a] != system.logWeights[b]) {
      return system.logWeights[a] > system.logWeights[b];
    }
    return a < b;
  });
  std::vector<std::size_t> distinct;
  for (auto c : order) {
    if (typed.masks[c] == 0) continue;
    const bool dup = std::any_of(distinct.begin(), distinct.end(),
                                 [&](auto d) { return typed.masks[d] == typed.masks[c]; });
    if (!dup) distinct.push_back(c);
  }
  // Conflict graph, then closed-neighbourhood dominance: drop c when a
  // neighbour d with N[d] within N[c] weighs at least as much.
  const std::size_t k = distinct.size();
  std::vector<std::vector<bool>> conflict(k, std::vector<bool>(k, false));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      conflict[a][b] = a == b || (typed.masks[distinct[a]] & typed.masks[distinct[b]]) != 0;
    }
  }
  std::vector<bool> removed(k, false);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t d = 0; d < k && !removed[c]; ++d) {
      if (d == c || removed[d] || !conflict[c][d]) continue;
      if (system.logWeights[distinct[d]] < system.logWeights[distinct[c]]) continue;
      bool subset = true;
      for (std::size_t v = 0; v < k && subset; ++v) {
        if (!removed[v] && conflict[d][v] && !conflict[c][v]) subset = false;
      }
      if (subset) removed[c] = true;
    }
  }
  std::vector<std::size_t> keep;
  std::vector<std::size_t> slot;
  for (std::size_t c = 0; c < k; ++c) {
    if (!removed[c]) {
      keep.push_back(distinct[c]);
      slot.push_back(c);
    }
  }
  if (keep.size() > clampBits(budget.maxCandidates)) {
    throw CapacityError("packing oracle: " + std::to_string(keep.size()) +
                        " candidates exceed the budget of " +
                        std::to_string(budget.maxCandidates));
  }
  std::vector<Mask> adjacency(keep.size(), 0);
  for (std::size_t a = 0; a < keep.size(); ++a) {
    for (std::size_t b = 0; b < keep.size(); ++b) {
      if (a != b && conflict[slot[a]][slot[b]]) adjacency[a] |= bit(b);
    }
  }
  return runIndependentSet(keep, adjacency, system.logWeights, budget);
}

OracleSolution solveExactIndependentSet(const std::vector<std::vector<std::uint32_t>>& conflicts,
                                        const std::vector<double>& logWeights,
                                        const OracleBudget& budget) {
  if (conflicts.size() != logWeights.size()) {
    throw InvalidArgument("independent-set instance has mismatched sizes");
  }
  if (conflicts.size() > clampBits(budget.maxCandidates)) {
    throw CapacityError("independent-set oracle: " + std::to_string(conflicts.size()) +
                        " vertices exceed the budget of " + std::to_string(budget.maxCandidates));
  }
  std::vector<std::size_t> keep(conflicts.size());
  std::iota(keep.begin(), keep.end(), 0);
  std::vector<Mask> adjacency(conflicts.size(), 0);
  for (std::size_t v = 0; v < conflicts.size(); ++v) {
    for (auto u : conflicts[v]) {
      if (u >= conflicts.size()) throw InvalidArgument("conflict vertex out of range");
      if (u != v) {
        adjacency[v] |= bit(u);
        adjacency[u] |= bit(v);
      }
    }
  }
  return runIndependentSet(keep, adjacency, logWeights, budget);
}

namespace {

// Candidates in a canonical order so the result never depends on the input order.
std::vector<WeightedBall> canonicalCandidates(std::vector<WeightedBall> candidates) {
  std::sort(candidates.begin(), candidates.end(), [](const WeightedBall& a, const WeightedBall& b) {
    return std::tie(a.ball.center, a.ball.n, a.ball.closed, a.ball.eps, a.logWeight) <
           std::tie(b.ball.center, b.ball.n, b.ball.closed, b.ball.eps, b.logWeight);
  });
  return candidates;
}

}  // namespace

CoverSum exactCoverInfimum(const std::vector<WeightedBall>& input, const PointSet& K,
                           const OracleBudget& budget) {
  const auto candidates = canonicalCandidates(input);
  requireNonempty(K, "K");
  SetSystem system;
  system.universe = K.size();
  bool sameN = true;
  for (const auto& c : candidates) {
    std::vector<std::uint32_t> covered;
    for (Point x : c.ball.members) {
      auto it = std::lower_bound(K.begin(), K.end(), x);
      if (it != K.end() && *it == x) covered.push_back(static_cast<std::uint32_t>(it - K.begin()));
    }
    system.sets.push_back(std::move(covered));
    system.logWeights.push_back(c.logWeight);
    sameN = sameN && c.ball.n == candidates.front().ball.n;
  }
  const OracleSolution sol = solveExactCover(system, budget);
  CoverSum sum;
  sum.mode = sameN ? CoverMode::FixedLengthCover : CoverMode::VariableLengthCover;
  sum.exact = true;
  for (auto i : sol.chosen) {
    sum.witnesses.push_back({candidates[i].ball.center, candidates[i].ball.n,
                             candidates[i].logWeight, 0});
  }
  finalizeSum(sum);
  return sum;
}

CoverSum exactPackingSupremum(const std::vector<WeightedBall>& input,
                              const OracleBudget& budget) {
  const auto candidates = canonicalCandidates(input);
  SetSystem system;
  Point maxPoint = 0;
  for (const auto& c : candidates) {
    if (!c.ball.members.empty()) maxPoint = std::max(maxPoint, c.ball.members[c.ball.members.size() - 1]);
  }
  system.universe = candidates.empty() ? 0 : std::size_t{maxPoint} + 1;
  for (const auto& c : candidates) {
    system.sets.emplace_back(c.ball.members.begin(), c.ball.members.end());
    system.logWeights.push_back(c.logWeight);
  }
  const OracleSolution sol = solveExactPacking(system, budget);
  CoverSum sum;
  sum.mode = CoverMode::Packing;
  sum.exact = true;
  for (auto i : sol.chosen) {
    sum.witnesses.push_back({candidates[i].ball.center, candidates[i].ball.n,
                             candidates[i].logWeight, 0});
  }
  finalizeSum(sum);
  return sum;
}

std::uint64_t instanceHash(const std::string& canonical) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void emitOracleFixture(const std::string& path, const std::string& name,
                       const std::string& canonicalInstance, const CoverSum& result) {
  nlohmann::ordered_json doc;
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(instanceHash(canonicalInstance)));
  doc["name"] = name;
  doc["instance"] = canonicalInstance;
  doc["hash"] = hex;
  doc["mode"] = toString(result.mode);
  doc["value"] = result.value;
  doc["logValue"] = result.logValue;
  auto& w = doc["witnesses"] = nlohmann::ordered_json::array();
  for (const auto& wit : result.witnesses) {
    w.push_back({{"center", wit.center}, {"n", wit.n}, {"logWeight", wit.logWeight}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write fixture " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing fixture " + path);
}

}  // namespace ndsp
