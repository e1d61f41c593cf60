#include "ndsp/cover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <unordered_map>

#include "ndsp/error.hpp"

namespace ndsp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxJoinElements = 200000;

std::vector<std::int64_t> positionsIn(const PointSet& K, std::size_t spaceSize) {
  std::vector<std::int64_t> pos(spaceSize, -1);
  for (std::size_t i = 0; i < K.size(); ++i) pos[K[i]] = static_cast<std::int64_t>(i);
  return pos;
}

void sortWitnesses(std::vector<Witness>& w) {
  std::sort(w.begin(), w.end(), [](const Witness& a, const Witness& b) {
    if (a.piece != b.piece) return a.piece < b.piece;
    if (a.n != b.n) return a.n < b.n;
    return a.center < b.center;
  });
}

// Number of distinct membership signatures among elements, stopping early
// once `limit` is exceeded.
std::size_t countTypes(std::size_t universe, const std::vector<const std::vector<std::uint32_t>*>& sets,
                       std::size_t limit) {
  std::vector<std::uint64_t> sig(universe, 0);
  std::vector<std::uint64_t> sig2(universe, 0);
  std::vector<bool> touched(universe, false);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const std::uint64_t a = 0x9E3779B97F4A7C15ULL * (i + 1);
    const std::uint64_t b = 0xC2B2AE3D27D4EB4FULL * (i + 7);
    for (auto e : *sets[i]) {
      sig[e] = (sig[e] ^ a) * 0x100000001B3ULL;
      sig2[e] += b;
      touched[e] = true;
    }
  }
  std::set<std::pair<std::uint64_t, std::uint64_t>> types;
  for (std::size_t e = 0; e < universe; ++e) {
    if (!touched[e]) continue;
    types.emplace(sig[e], sig2[e]);
    if (types.size() > limit) break;
  }
  return types.size();
}

CoverSum sumFromWitnesses(std::vector<Witness> witnesses, CoverMode mode, bool exact) {
  CoverSum sum;
  sortWitnesses(witnesses);
  sum.witnesses = std::move(witnesses);
  sum.mode = mode;
  sum.exact = exact;
  finalizeSum(sum);
  return sum;
}

}  // namespace

std::string toString(CoverMode mode) {
  switch (mode) {
    case CoverMode::FixedLengthCover: return "fixed-length-cover";
    case CoverMode::VariableLengthCover: return "variable-length-cover";
    case CoverMode::Packing: return "packing";
    case CoverMode::RefinedPacking: return "refined-packing";
    case CoverMode::OpenCover: return "open-cover";
  }
  return "unknown";
}

double logSumExp(std::span<const double> values) {
  double top = kNegInf;
  for (double v : values) top = std::max(top, v);
  if (top == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - top);
  return top + std::log(acc);
}

void finalizeSum(CoverSum& sum) {
  std::vector<double> logs;
  logs.reserve(sum.witnesses.size());
  for (const auto& w : sum.witnesses) logs.push_back(w.logWeight);
  sum.logValue = logSumExp(logs);
  sum.value = std::exp(sum.logValue);
}

std::vector<std::size_t> greedyCover(std::size_t universe,
                                     const std::vector<const std::vector<std::uint32_t>*>& sets,
                                     const std::vector<double>& logWeights,
                                     const std::vector<std::pair<Point, std::size_t>>& tieKeys) {
  struct Entry {
    double key;
    std::pair<Point, std::size_t> tie;
    std::size_t idx;
    std::size_t count;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.key != b.key) return a.key > b.key;
    return a.tie > b.tie;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i]->empty()) continue;
    heap.push({logWeights[i] - std::log(static_cast<double>(sets[i]->size())), tieKeys[i], i,
               sets[i]->size()});
  }
  std::vector<char> covered(universe, 0);
  std::size_t remaining = universe;
  std::vector<std::size_t> chosen;
  while (remaining > 0) {
    if (heap.empty()) throw InvalidArgument("greedy cover: some element cannot be covered");
    Entry top = heap.top();
    heap.pop();
    std::size_t fresh = 0;
    for (auto e : *sets[top.idx]) fresh += covered[e] ? 0 : 1;
    if (fresh == 0) continue;
    if (fresh != top.count) {
      top.count = fresh;
      top.key = logWeights[top.idx] - std::log(static_cast<double>(fresh));
      heap.push(top);
      continue;
    }
    chosen.push_back(top.idx);
    for (auto e : *sets[top.idx]) {
      if (!covered[e]) {
        covered[e] = 1;
        --remaining;
      }
    }
  }
  // Drop sets whose elements are all covered elsewhere, heaviest first.
  std::vector<std::size_t> multiplicity(universe, 0);
  for (auto i : chosen) {
    for (auto e : *sets[i]) ++multiplicity[e];
  }
  std::vector<std::size_t> byWeight = chosen;
  std::stable_sort(byWeight.begin(), byWeight.end(),
                   [&](auto a, auto b) { return logWeights[a] > logWeights[b]; });
  std::vector<bool> dropped(sets.size(), false);
  for (auto i : byWeight) {
    const bool redundant = std::all_of(sets[i]->begin(), sets[i]->end(),
                                       [&](auto e) { return multiplicity[e] >= 2; });
    if (redundant) {
      dropped[i] = true;
      for (auto e : *sets[i]) --multiplicity[e];
    }
  }
  std::vector<std::size_t> kept;
  for (auto i : chosen) {
    if (!dropped[i]) kept.push_back(i);
  }
  return kept;
}

CoverEngine::CoverEngine(std::shared_ptr<const BowenGeometry> geometry, Potential potential,
                         EngineOptions options)
    : geometry_(std::move(geometry)), potential_(std::move(potential)), options_(options) {
  if (!geometry_) throw InvalidArgument("cover engine needs a geometry");
  birkhoff_ = geometry_->birkhoffTable(potential_);
}

CoverEngine::CoverEngine(const MetricSpace& space, const MapSequence& maps, Potential potential,
                         std::size_t horizon, EngineOptions options)
    : CoverEngine(std::make_shared<const BowenGeometry>(space, maps, horizon),
                  std::move(potential), options) {}

void CoverEngine::checkWindow(const PointSet& K, std::size_t N, std::size_t Nmax) const {
  requireNonempty(K, "K");
  if (K[K.size() - 1] >= geometry_->size()) throw InvalidArgument("K has points outside the space");
  if (N == 0) throw InvalidArgument("N must be >= 1");
  if (Nmax < N) throw InvalidArgument("Nmax must be >= N");
  if (Nmax > geometry_->horizon()) {
    throw InvalidArgument("Nmax " + std::to_string(Nmax) + " exceeds the geometry horizon " +
                          std::to_string(geometry_->horizon()));
  }
}

CountResult CoverEngine::spanningSet(const PointSet& K, std::size_t n, double eps) const {
  checkWindow(K, n, n);
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  const auto& geo = *geometry_;
  // Farthest-point insertion from the first point of K.
  std::vector<Point> farthest{K[0]};
  std::vector<double> nearest(K.size());
  for (std::size_t i = 0; i < K.size(); ++i) nearest[i] = geo.distance(n, K[0], K[i]);
  while (true) {
    std::size_t pick = 0;
    for (std::size_t i = 1; i < K.size(); ++i) {
      if (nearest[i] > nearest[pick]) pick = i;
    }
    if (nearest[pick] <= eps) break;
    farthest.push_back(K[pick]);
    for (std::size_t i = 0; i < K.size(); ++i) {
      nearest[i] = std::min(nearest[i], geo.distance(n, K[pick], K[i]));
    }
  }
  CountResult best;
  const CountResult lexicographic = separatedSet(K, n, eps);
  if (lexicographic.set.size() < farthest.size()) {
    best.set = lexicographic.set;
  } else {
    best.set = PointSet(geo.space(), farthest);
  }
  best.cardinality = best.set.size();

  if (options_.useOracle) {
    const auto& layer = geo.layer(eps, true, n);
    const auto pos = positionsIn(K, geo.size());
    std::map<std::uint32_t, Point> centerOfBall;
    for (Point x : K) centerOfBall.try_emplace(layer.ballOf[x], x);
    SetSystem sys;
    sys.universe = K.size();
    std::vector<Point> centers;
    for (const auto& [id, c] : centerOfBall) {
      std::vector<std::uint32_t> trace;
      for (Point y : layer.balls[id]) {
        if (pos[y] >= 0) trace.push_back(static_cast<std::uint32_t>(pos[y]));
      }
      sys.sets.push_back(std::move(trace));
      sys.logWeights.push_back(0.0);
      centers.push_back(c);
    }
    try {
      const auto sol = solveExactCover(sys, options_.budget);
      if (sol.chosen.size() > best.cardinality) {
        throw InternalError("oracle spanning set larger than a greedy one");
      }
      std::vector<Point> chosen;
      for (auto i : sol.chosen) chosen.push_back(centers[i]);
      if (sol.chosen.size() < best.cardinality) best.set = PointSet(geo.space(), chosen);
      best.cardinality = best.set.size();
      best.exact = true;
    } catch (const CapacityError&) {
    }
  }
  return best;
}

CountResult CoverEngine::separatedSet(const PointSet& K, std::size_t n, double eps) const {
  checkWindow(K, n, n);
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  const auto& geo = *geometry_;
  const auto& layer = geo.layer(eps, true, n);
  std::vector<char> blocked(geo.size(), 0);
  std::vector<Point> chosen;
  for (Point x : K) {
    if (blocked[x]) continue;
    chosen.push_back(x);
    for (Point y : layer.of(x)) blocked[y] = 1;
  }
  // A maximal separated set spans: every point of K lies in a chosen closed ball.
  for (Point x : K) {
    if (!blocked[x]) throw InternalError("maximal separated set failed to span K");
  }
  CountResult result{PointSet(geo.space(), chosen), chosen.size(), false};

  if (options_.useOracle) {
    const auto pos = positionsIn(K, geo.size());
    std::map<std::uint32_t, std::uint32_t> vertexOfBall;
    std::vector<Point> reps;
    for (Point x : K) {
      if (vertexOfBall.try_emplace(layer.ballOf[x], static_cast<std::uint32_t>(reps.size())).second) {
        reps.push_back(x);
      }
    }
    if (reps.size() <= options_.budget.maxCandidates) {
      std::vector<std::vector<std::uint32_t>> conflicts(reps.size());
      for (std::size_t v = 0; v < reps.size(); ++v) {
        for (Point y : layer.of(reps[v])) {
          if (pos[y] < 0) continue;
          const auto u = vertexOfBall.at(layer.ballOf[y]);
          if (u != v) conflicts[v].push_back(u);
        }
      }
      try {
        const auto sol = solveExactIndependentSet(conflicts, std::vector<double>(reps.size(), 0.0),
                                                  options_.budget);
        if (sol.chosen.size() < result.cardinality) {
          throw InternalError("oracle separated set smaller than a greedy one");
        }
        if (sol.chosen.size() > result.cardinality) {
          std::vector<Point> better;
          for (auto v : sol.chosen) better.push_back(reps[v]);
          result.set = PointSet(geo.space(), better);
          result.cardinality = better.size();
        }
        result.exact = true;
      } catch (const CapacityError&) {
      }
    }
  }
  return result;
}

WeightedSet CoverEngine::separatedSum(const PointSet& K, std::size_t n, double eps) const {
  checkWindow(K, n, n);
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  const auto& geo = *geometry_;
  const auto& layer = geo.layer(eps, true, n);
  auto scan = [&](const std::vector<Point>& order) {
    std::vector<char> blocked(geo.size(), 0);
    WeightedSet out;
    for (Point x : order) {
      if (blocked[x]) continue;
      out.points.push_back(x);
      for (Point y : layer.of(x)) blocked[y] = 1;
    }
    std::sort(out.points.begin(), out.points.end());
    std::vector<double> logs;
    for (Point x : out.points) logs.push_back(birkhoff_[n][x]);
    out.logValue = logSumExp(logs);
    return out;
  };
  std::vector<Point> byWeight(K.begin(), K.end());
  std::stable_sort(byWeight.begin(), byWeight.end(),
                   [&](Point a, Point b) { return birkhoff_[n][a] > birkhoff_[n][b]; });
  WeightedSet best = scan(byWeight);
  WeightedSet lexicographic = scan(std::vector<Point>(K.begin(), K.end()));
  if (lexicographic.logValue > best.logValue) best = std::move(lexicographic);
  // Centers of a disjoint closed-ball family are separated as well.
  const PackingPool pool = packingPool(K, eps, n, n);
  const CoverSum packed = packingSum(pool, 0.0);
  if (packed.logValue > best.logValue) {
    WeightedSet fromPacking;
    for (const auto& w : packed.witnesses) fromPacking.points.push_back(w.center);
    std::sort(fromPacking.points.begin(), fromPacking.points.end());
    std::vector<double> logs;
    for (Point x : fromPacking.points) logs.push_back(birkhoff_[n][x]);
    fromPacking.logValue = logSumExp(logs);
    best = std::move(fromPacking);
  }

  if (options_.useOracle) {
    const auto pos = positionsIn(K, geo.size());
    std::map<std::uint32_t, std::uint32_t> vertexOfBall;
    std::vector<Point> reps;
    for (Point x : byWeight) {
      if (vertexOfBall.try_emplace(layer.ballOf[x], static_cast<std::uint32_t>(reps.size())).second) {
        reps.push_back(x);
      }
    }
    if (reps.size() <= options_.budget.maxCandidates) {
      std::vector<std::vector<std::uint32_t>> conflicts(reps.size());
      std::vector<double> logs;
      for (std::size_t v = 0; v < reps.size(); ++v) {
        logs.push_back(birkhoff_[n][reps[v]]);
        for (Point y : layer.of(reps[v])) {
          if (pos[y] < 0) continue;
          const auto u = vertexOfBall.at(layer.ballOf[y]);
          if (u != v) conflicts[v].push_back(u);
        }
      }
      try {
        const auto sol = solveExactIndependentSet(conflicts, logs, options_.budget);
        if (sol.logValue < best.logValue - 1e-9 * std::max(1.0, std::abs(best.logValue))) {
          throw InternalError("oracle separated sum below a greedy one");
        }
        if (sol.logValue > best.logValue) {
          best.points.clear();
          for (auto v : sol.chosen) best.points.push_back(reps[v]);
          std::sort(best.points.begin(), best.points.end());
          std::vector<double> chosenLogs;
          for (Point x : best.points) chosenLogs.push_back(birkhoff_[n][x]);
          best.logValue = logSumExp(chosenLogs);
        }
        best.exact = true;
      } catch (const CapacityError&) {
      }
    }
  }
  return best;
}

CoverPool CoverEngine::coverPool(const PointSet& K, double eps, std::size_t N,
                                 std::size_t Nmax) const {
  checkWindow(K, N, Nmax);
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  const auto& geo = *geometry_;
  const auto pos = positionsIn(K, geo.size());
  CoverPool pool;
  pool.K = K;
  pool.eps = eps;
  pool.N = N;
  pool.Nmax = Nmax;
  for (std::size_t n = N; n <= Nmax; ++n) {
    const auto& layer = geo.layer(eps, false, n);
    // Cheapest center per ball.
    std::vector<Point> cheapest(layer.balls.size(), static_cast<Point>(geo.size()));
    for (Point x = 0; x < geo.size(); ++x) {
      Point& c = cheapest[layer.ballOf[x]];
      if (c == geo.size() || birkhoff_[n][x] < birkhoff_[n][c]) c = x;
    }
    std::map<std::vector<std::uint32_t>, std::size_t> byTrace;
    const std::size_t first = pool.candidates.size();
    for (std::size_t b = 0; b < layer.balls.size(); ++b) {
      std::vector<std::uint32_t> trace;
      for (Point y : layer.balls[b]) {
        if (pos[y] >= 0) trace.push_back(static_cast<std::uint32_t>(pos[y]));
      }
      if (trace.empty()) continue;
      const Point c = cheapest[b];
      auto [it, inserted] = byTrace.try_emplace(trace, pool.candidates.size());
      if (inserted) {
        pool.candidates.push_back({c, n, birkhoff_[n][c], std::move(trace)});
      } else {
        auto& existing = pool.candidates[it->second];
        const double w = birkhoff_[n][c];
        if (w < existing.birkhoff || (w == existing.birkhoff && c < existing.center)) {
          existing.center = c;
          existing.birkhoff = w;
        }
      }
    }
    std::sort(pool.candidates.begin() + static_cast<std::ptrdiff_t>(first), pool.candidates.end(),
              [](const auto& a, const auto& b) { return a.center < b.center; });
  }
  // Single-length greedy covers (selection independent of s).
  for (std::size_t n = N; n <= Nmax; ++n) {
    std::vector<const std::vector<std::uint32_t>*> sets;
    std::vector<double> logs;
    std::vector<std::pair<Point, std::size_t>> ties;
    std::vector<std::size_t> index;
    for (std::size_t i = 0; i < pool.candidates.size(); ++i) {
      const auto& c = pool.candidates[i];
      if (c.n != n) continue;
      sets.push_back(&c.covers);
      logs.push_back(c.birkhoff);
      ties.emplace_back(c.center, c.n);
      index.push_back(i);
    }
    std::vector<Witness> witnesses;
    for (auto k : greedyCover(K.size(), sets, logs, ties)) {
      const auto& c = pool.candidates[index[k]];
      witnesses.push_back({c.center, c.n, c.birkhoff, 0});
    }
    pool.fixedGreedy.push_back(
        sumFromWitnesses(std::move(witnesses), CoverMode::FixedLengthCover, false));
  }
  if (options_.useOracle) {
    std::vector<const std::vector<std::uint32_t>*> sets;
    for (const auto& c : pool.candidates) sets.push_back(&c.covers);
    pool.oracleEligible = countTypes(K.size(), sets, options_.budget.maxPoints) <=
                          std::min<std::size_t>(options_.budget.maxPoints, 64);
  }
  return pool;
}

CoverSum CoverEngine::coverSum(const CoverPool& pool, double s) const {
  const CoverMode mode =
      pool.N == pool.Nmax ? CoverMode::FixedLengthCover : CoverMode::VariableLengthCover;
  std::vector<const std::vector<std::uint32_t>*> sets;
  std::vector<double> logs;
  std::vector<std::pair<Point, std::size_t>> ties;
  for (const auto& c : pool.candidates) {
    sets.push_back(&c.covers);
    logs.push_back(c.birkhoff - s * static_cast<double>(c.n));
    ties.emplace_back(c.center, c.n);
  }
  std::vector<Witness> pooledWitnesses;
  for (auto i : greedyCover(pool.K.size(), sets, logs, ties)) {
    pooledWitnesses.push_back({pool.candidates[i].center, pool.candidates[i].n, logs[i], 0});
  }
  CoverSum best = sumFromWitnesses(std::move(pooledWitnesses), mode, false);
  for (const auto& fixed : pool.fixedGreedy) {
    if (fixed.witnesses.empty()) continue;
    std::vector<Witness> shifted = fixed.witnesses;
    for (auto& w : shifted) w.logWeight -= s * static_cast<double>(w.n);
    CoverSum candidate = sumFromWitnesses(std::move(shifted), mode, false);
    if (candidate.logValue < best.logValue) best = std::move(candidate);
  }
  if (pool.oracleEligible) {
    SetSystem sys;
    sys.universe = pool.K.size();
    sys.logWeights = logs;
    for (const auto& c : pool.candidates) sys.sets.push_back(c.covers);
    try {
      const auto sol = solveExactCover(sys, options_.budget);
      std::vector<Witness> witnesses;
      for (auto i : sol.chosen) {
        witnesses.push_back({pool.candidates[i].center, pool.candidates[i].n, logs[i], 0});
      }
      CoverSum exact = sumFromWitnesses(std::move(witnesses), mode, true);
      if (exact.logValue > best.logValue + 1e-9 * std::max(1.0, std::abs(best.logValue))) {
        throw InternalError("oracle cover value exceeds a greedy cover value");
      }
      best = std::move(exact);
    } catch (const CapacityError&) {
    }
  }
  return best;
}

PackingPool CoverEngine::packingPool(const PointSet& K, double eps, std::size_t N,
                                     std::size_t Nmax) const {
  checkWindow(K, N, Nmax);
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  const auto& geo = *geometry_;
  PackingPool pool;
  pool.K = K;
  pool.eps = eps;
  pool.N = N;
  pool.Nmax = Nmax;
  for (std::size_t n = N; n <= Nmax; ++n) {
    const auto& layer = geo.layer(eps, true, n);
    std::map<std::uint32_t, std::size_t> groupOf;
    const std::size_t first = pool.groups.size();
    for (Point x : K) {
      auto [it, inserted] = groupOf.try_emplace(layer.ballOf[x], pool.groups.size());
      if (inserted) pool.groups.push_back({n, &layer.of(x), {}});
      pool.groups[it->second].centers.emplace_back(birkhoff_[n][x], x);
    }
    for (std::size_t g = first; g < pool.groups.size(); ++g) {
      auto& centers = pool.groups[g].centers;
      std::stable_sort(centers.begin(), centers.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
    }
  }
  if (options_.useOracle) {
    std::vector<const std::vector<std::uint32_t>*> sets;
    std::vector<std::vector<std::uint32_t>> copies;
    copies.reserve(pool.groups.size());
    for (const auto& g : pool.groups) {
      copies.emplace_back(g.ball->begin(), g.ball->end());
    }
    for (const auto& c : copies) sets.push_back(&c);
    pool.oracleEligible = countTypes(geo.size(), sets, options_.budget.maxPoints) <=
                          std::min<std::size_t>(options_.budget.maxPoints, 64);
  }
  return pool;
}

CoverSum CoverEngine::packingSum(const PackingPool& pool, double s,
                                 const std::vector<Point>* centers) const {
  struct Item {
    double logWeight;
    Point center;
    std::size_t n;
    const std::vector<Point>* ball;
  };
  std::vector<Item> items;
  for (const auto& g : pool.groups) {
    for (const auto& [w, x] : g.centers) {
      if (centers && !std::binary_search(centers->begin(), centers->end(), x)) continue;
      items.push_back({w - s * static_cast<double>(g.n), x, g.n, g.ball});
      break;
    }
  }
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    if (items[a].logWeight != items[b].logWeight) return items[a].logWeight > items[b].logWeight;
    if (items[a].center != items[b].center) return items[a].center < items[b].center;
    return items[a].n < items[b].n;
  });
  std::vector<char> used(geometry_->size(), 0);
  std::vector<Witness> witnesses;
  for (auto i : order) {
    const auto& ball = *items[i].ball;
    if (std::any_of(ball.begin(), ball.end(), [&](Point y) { return used[y] != 0; })) continue;
    for (Point y : ball) used[y] = 1;
    witnesses.push_back({items[i].center, items[i].n, items[i].logWeight, 0});
  }
  CoverSum best = sumFromWitnesses(std::move(witnesses), CoverMode::Packing, false);
  if (pool.oracleEligible && !items.empty()) {
    SetSystem sys;
    sys.universe = geometry_->size();
    for (const auto& it : items) {
      sys.sets.emplace_back(it.ball->begin(), it.ball->end());
      sys.logWeights.push_back(it.logWeight);
    }
    try {
      const auto sol = solveExactPacking(sys, options_.budget);
      std::vector<Witness> exactWitnesses;
      for (auto i : sol.chosen) {
        exactWitnesses.push_back({items[i].center, items[i].n, items[i].logWeight, 0});
      }
      CoverSum exact = sumFromWitnesses(std::move(exactWitnesses), CoverMode::Packing, true);
      if (exact.logValue < best.logValue - 1e-9 * std::max(1.0, std::abs(best.logValue))) {
        throw InternalError("oracle packing value below a greedy packing value");
      }
      best = std::move(exact);
    } catch (const CapacityError&) {
    }
  }
  if (items.empty()) best.exact = true;
  return best;
}

std::vector<std::vector<std::vector<Point>>> CoverEngine::candidatePartitions(
    const PointSet& K, std::size_t n, std::size_t parts) const {
  std::vector<std::vector<std::vector<Point>>> out;
  out.push_back({std::vector<Point>(K.begin(), K.end())});
  const std::size_t maxParts = std::min(parts, K.size());
  const auto& geo = *geometry_;
  for (std::size_t p = 2; p <= maxParts; ++p) {
    std::vector<Point> seeds{K[0]};
    std::vector<double> nearest(K.size());
    for (std::size_t i = 0; i < K.size(); ++i) nearest[i] = geo.distance(n, K[0], K[i]);
    while (seeds.size() < p) {
      std::size_t pick = 0;
      for (std::size_t i = 1; i < K.size(); ++i) {
        if (nearest[i] > nearest[pick]) pick = i;
      }
      if (nearest[pick] == 0.0) break;
      seeds.push_back(K[pick]);
      for (std::size_t i = 0; i < K.size(); ++i) {
        nearest[i] = std::min(nearest[i], geo.distance(n, K[pick], K[i]));
      }
    }
    if (seeds.size() < p) break;
    std::vector<std::vector<Point>> pieces(seeds.size());
    for (Point x : K) {
      std::size_t bestSeed = 0;
      double bestDist = geo.distance(n, seeds[0], x);
      for (std::size_t k = 1; k < seeds.size(); ++k) {
        const double d = geo.distance(n, seeds[k], x);
        if (d < bestDist) {
          bestDist = d;
          bestSeed = k;
        }
      }
      pieces[bestSeed].push_back(x);
    }
    for (auto& piece : pieces) std::sort(piece.begin(), piece.end());
    std::sort(pieces.begin(), pieces.end());
    if (std::find(out.begin(), out.end(), pieces) == out.end()) out.push_back(std::move(pieces));
  }
  return out;
}

CoverSum CoverEngine::refinedPackingSum(const PackingPool& pool, double s,
                                        std::size_t parts) const {
  if (parts == 0) throw InvalidArgument("parts must be >= 1");
  auto evaluate = [&](const std::vector<std::vector<Point>>& partition) {
    std::vector<Witness> witnesses;
    bool exact = true;
    for (std::size_t p = 0; p < partition.size(); ++p) {
      CoverSum piece = packingSum(pool, s, &partition[p]);
      exact = exact && piece.exact;
      for (auto w : piece.witnesses) {
        w.piece = p;
        witnesses.push_back(w);
      }
    }
    return sumFromWitnesses(std::move(witnesses), CoverMode::RefinedPacking, exact);
  };
  // Regrouping the same terms only moves the sum by roundoff; ignore that.
  auto lower = [](const CoverSum& a, const CoverSum& b) {
    return a.logValue < b.logValue - 1e-12 * std::max(1.0, std::abs(b.logValue));
  };
  const auto partitions = candidatePartitions(pool.K, pool.N, parts);
  CoverSum best = evaluate(partitions.front());
  const bool trivialExact = best.exact;
  std::vector<std::vector<Point>> bestPartition = partitions.front();
  bool improved = false;
  for (std::size_t i = 1; i < partitions.size(); ++i) {
    CoverSum candidate = evaluate(partitions[i]);
    if (lower(candidate, best)) {
      best = std::move(candidate);
      bestPartition = partitions[i];
      improved = true;
    }
  }
  // Single-point moves on small K.
  if (pool.K.size() <= 12 && parts > 1) {
    for (int pass = 0; pass < 2; ++pass) {
      bool moved = false;
      for (Point x : pool.K) {
        std::size_t from = 0;
        while (!std::binary_search(bestPartition[from].begin(), bestPartition[from].end(), x)) ++from;
        const std::size_t targets = bestPartition.size() + (bestPartition.size() < parts ? 1 : 0);
        for (std::size_t to = 0; to < targets; ++to) {
          if (to == from) continue;
          auto trial = bestPartition;
          if (to == trial.size()) trial.emplace_back();
          trial[from].erase(std::find(trial[from].begin(), trial[from].end(), x));
          trial[to].insert(std::upper_bound(trial[to].begin(), trial[to].end(), x), x);
          if (trial[from].empty()) trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(from));
          CoverSum candidate = evaluate(trial);
          if (lower(candidate, best)) {
            best = std::move(candidate);
            bestPartition = std::move(trial);
            improved = moved = true;
            break;
          }
        }
      }
      if (!moved) break;
    }
  }
  // A disjoint family over a union splits into families over the pieces, so
  // with exact pieces no partition undercuts K itself.
  best.exact = trivialExact && !improved;
  return best;
}

CoverSum CoverEngine::fixedCoverSum(const PointSet& K, std::size_t N, double eps) const {
  return coverSum(coverPool(K, eps, N, N), 0.0);
}

CoverSum CoverEngine::variableCoverSum(const PointSet& K, double eps, double s, std::size_t N,
                                       std::size_t Nmax) const {
  return coverSum(coverPool(K, eps, N, Nmax), s);
}

CoverSum CoverEngine::packingSum(const PointSet& K, double eps, double s, std::size_t N,
                                 std::size_t Nmax) const {
  return packingSum(packingPool(K, eps, N, Nmax), s);
}

CoverSum CoverEngine::refinedPackingSum(const PointSet& K, double eps, double s, std::size_t N,
                                        std::size_t Nmax, std::size_t parts) const {
  if (parts == 0) throw InvalidArgument("parts must be >= 1");
  return refinedPackingSum(packingPool(K, eps, N, Nmax), s, parts);
}

CoverSum CoverEngine::openCoverSum(const PointSet& K, std::size_t n,
                                   const std::vector<PointSet>& coverU) const {
  checkWindow(K, n, n);
  const auto& geo = *geometry_;
  const std::size_t P = geo.size();
  std::vector<char> inUnion(P, 0);
  std::vector<std::vector<char>> member;
  for (const auto& U : coverU) {
    std::vector<char> m(P, 0);
    for (Point x : U) {
      if (x >= P) throw InvalidArgument("cover element has points outside the space");
      m[x] = 1;
      inUnion[x] = 1;
    }
    member.push_back(std::move(m));
  }
  for (Point x = 0; x < P; ++x) {
    if (!inUnion[x]) throw InvalidArgument("cover U does not cover X (misses point " +
                                           std::to_string(x) + ")");
  }
  // Join U_1^n: sets of points whose orbit visits a fixed word of cover elements.
  std::set<std::vector<Point>> level;
  {
    std::vector<Point> all(P);
    std::iota(all.begin(), all.end(), Point{0});
    level.insert(std::move(all));
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::set<std::vector<Point>> next;
    for (const auto& A : level) {
      for (const auto& m : member) {
        std::vector<Point> piece;
        for (Point x : A) {
          if (m[geo.orbit(j, x)]) piece.push_back(x);
        }
        if (!piece.empty()) next.insert(std::move(piece));
      }
      if (next.size() > kMaxJoinElements) {
        throw CapacityError("join of the open cover exceeds " + std::to_string(kMaxJoinElements) +
                            " elements");
      }
    }
    level = std::move(next);
  }
  const auto pos = positionsIn(K, P);
  std::vector<std::vector<std::uint32_t>> traces;
  std::vector<double> logs;
  std::vector<std::pair<Point, std::size_t>> ties;
  std::vector<Point> argmins;
  std::map<std::vector<std::uint32_t>, std::size_t> seen;
  for (const auto& B : level) {
    std::vector<std::uint32_t> trace;
    Point argmin = 0;
    double best = std::numeric_limits<double>::infinity();
    for (Point x : B) {
      if (pos[x] < 0) continue;
      trace.push_back(static_cast<std::uint32_t>(pos[x]));
      if (birkhoff_[n][x] < best) {
        best = birkhoff_[n][x];
        argmin = x;
      }
    }
    if (trace.empty()) continue;
    auto [it, inserted] = seen.try_emplace(trace, traces.size());
    if (!inserted) continue;
    traces.push_back(std::move(trace));
    logs.push_back(best);
    ties.emplace_back(argmin, n);
    argmins.push_back(argmin);
  }
  std::vector<const std::vector<std::uint32_t>*> sets;
  for (const auto& t : traces) sets.push_back(&t);
  std::vector<Witness> witnesses;
  for (auto i : greedyCover(K.size(), sets, logs, ties)) witnesses.push_back({argmins[i], n, logs[i], 0});
  CoverSum best = sumFromWitnesses(std::move(witnesses), CoverMode::OpenCover, false);
  if (options_.useOracle) {
    SetSystem sys{K.size(), traces, logs};
    try {
      const auto sol = solveExactCover(sys, options_.budget);
      std::vector<Witness> exactWitnesses;
      for (auto i : sol.chosen) exactWitnesses.push_back({argmins[i], n, logs[i], 0});
      best = sumFromWitnesses(std::move(exactWitnesses), CoverMode::OpenCover, true);
    } catch (const CapacityError&) {
    }
  }
  return best;
}

std::vector<BowenBall> vitaliSubfamily(const MetricSpace& space, const MapSequence& maps,
                                       const std::vector<BowenBall>& balls) {
  if (balls.empty()) throw InvalidArgument("vitaliSubfamily needs at least one ball");
  for (const auto& b : balls) {
    if (b.n != balls.front().n) throw InvalidArgument("vitaliSubfamily balls must share n");
  }
  std::vector<std::size_t> order(balls.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return balls[a].eps > balls[b].eps; });
  std::vector<BowenBall> selected;
  for (auto i : order) {
    const bool disjoint = std::none_of(selected.begin(), selected.end(), [&](const BowenBall& s) {
      return s.members.intersects(balls[i].members);
    });
    if (disjoint) selected.push_back(balls[i]);
  }
  std::vector<char> enlarged(space.size(), 0);
  for (const auto& s : selected) {
    for (Point y : bowenBall(space, maps, s.n, 5.0 * s.eps, s.center, s.closed).members) {
      enlarged[y] = 1;
    }
  }
  for (const auto& b : balls) {
    for (Point y : b.members) {
      if (!enlarged[y]) {
        throw InternalError("Vitali 5r-containment failed at point " + std::to_string(y));
      }
    }
  }
  for (std::size_t a = 0; a < selected.size(); ++a) {
    for (std::size_t b = a + 1; b < selected.size(); ++b) {
      if (selected[a].members.intersects(selected[b].members)) {
        throw InternalError("Vitali selection is not pairwise disjoint");
      }
    }
  }
  return selected;
}

CountResult spanningSet(const MetricSpace& space, const MapSequence& maps, const PointSet& K,
                        std::size_t n, double eps, EngineOptions options) {
  return CoverEngine(space, maps, Potential::zero(space.size()), n, options).spanningSet(K, n, eps);
}

CountResult separatedSet(const MetricSpace& space, const MapSequence& maps, const PointSet& K,
                         std::size_t n, double eps, EngineOptions options) {
  return CoverEngine(space, maps, Potential::zero(space.size()), n, options).separatedSet(K, n, eps);
}

CoverSum fixedCoverSum(const MetricSpace& space, const MapSequence& maps, const PointSet& K,
                       const Potential& potential, std::size_t N, double eps,
                       EngineOptions options) {
  return CoverEngine(space, maps, potential, N, options).fixedCoverSum(K, N, eps);
}

CoverSum variableCoverSum(const MetricSpace& space, const MapSequence& maps, const PointSet& K,
                          const Potential& potential, double eps, double s, std::size_t N,
                          std::size_t Nmax, EngineOptions options) {
  if (Nmax < N) throw InvalidArgument("Nmax must be >= N");
  return CoverEngine(space, maps, potential, Nmax, options).variableCoverSum(K, eps, s, N, Nmax);
}

CoverSum packingSum(const MetricSpace& space, const MapSequence& maps, const PointSet& K,
                    const Potential& potential, double eps, double s, std::size_t N,
                    std::size_t Nmax, EngineOptions options) {
  if (Nmax < N) throw InvalidArgument("Nmax must be >= N");
  return CoverEngine(space, maps, potential, Nmax, options).packingSum(K, eps, s, N, Nmax);
}

CoverSum refinedPackingSum(const MetricSpace& space, const MapSequence& maps, const PointSet& K,
                           const Potential& potential, double eps, double s, std::size_t N,
                           std::size_t Nmax, std::size_t parts, EngineOptions options) {
  if (Nmax < N) throw InvalidArgument("Nmax must be >= N");
  return CoverEngine(space, maps, potential, Nmax, options)
      .refinedPackingSum(K, eps, s, N, Nmax, parts);
}

CoverSum openCoverSum(const MetricSpace& space, const MapSequence& maps, const PointSet& K,
                      const Potential& potential, std::size_t n,
                      const std::vector<PointSet>& coverU, EngineOptions options) {
  return CoverEngine(space, maps, potential, n, options).openCoverSum(K, n, coverU);
}

}  // namespace ndsp
