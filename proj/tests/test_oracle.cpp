#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "bridge.hpp"
#include "ndsp/error.hpp"
#include "ndsp/oracle.hpp"

using namespace ndsp;

namespace {

WeightedBall ballOf(const MetricSpace& space, const MapSequence& maps, std::size_t n, double eps,
                    Point c, bool closed, double logWeight) {
  return {bowenBall(space, maps, n, eps, c, closed), logWeight};
}

}  // namespace

TEST_CASE("cover oracle fixtures") {
  const MetricSpace line = MetricSpace::line({0, 1, 2, 3});
  const auto id = MapSequence::identity(4);
  std::vector<WeightedBall> balls;
  for (Point c = 0; c < 4; ++c) balls.push_back(ballOf(line, id, 1, 1.1, c, false, 0.0));
  const CoverSum c = exactCoverInfimum(balls, PointSet::all(line));
  CHECK(c.value == doctest::Approx(2.0));
  CHECK(c.exact);
  CHECK(c.witnesses.size() == 2);

  const CoverSum one = exactCoverInfimum(
      {ballOf(line, id, 1, 1.1, 0, false, 0.7), ballOf(line, id, 1, 1.1, 1, false, 0.2),
       ballOf(line, id, 1, 1.1, 2, false, -1.0)},
      PointSet(line, {1}));
  CHECK(one.logValue == doctest::Approx(-1.0));

  const MetricSpace p = MetricSpace::line({0});
  const CoverSum single = exactCoverInfimum({ballOf(p, MapSequence::identity(1), 4, 0.5, 0, false, 1.2 - 0.4)},
                                            PointSet::all(p));
  CHECK(single.logValue == doctest::Approx(0.8));
}

TEST_CASE("packing oracle fixtures") {
  const MetricSpace two = MetricSpace::line({0, 1});
  const auto id = MapSequence::identity(2);
  const auto disjoint = exactPackingSupremum(
      {ballOf(two, id, 1, 0.5, 0, true, std::log(2.0)), ballOf(two, id, 1, 0.5, 1, true, std::log(3.0))});
  CHECK(disjoint.value == doctest::Approx(5.0));
  const auto overlap = exactPackingSupremum(
      {ballOf(two, id, 1, 1.0, 0, true, std::log(2.0)), ballOf(two, id, 1, 1.0, 1, true, std::log(3.0))});
  CHECK(overlap.value == doctest::Approx(3.0));
  const auto four = exactPackingSupremum({ballOf(two, id, 1, 0.5, 0, true, 0.0), ballOf(two, id, 1, 0.5, 1, true, 0.0),
                                          ballOf(two, id, 2, 0.5, 0, true, 0.0), ballOf(two, id, 2, 0.5, 1, true, 0.0)});
  CHECK(four.value == doctest::Approx(2.0));
}

TEST_CASE("budget overruns raise a capacity error") {
  SetSystem big;
  big.universe = 40;
  for (std::uint32_t i = 0; i < 40; ++i) {
    big.sets.push_back({i, (i + 1) % 40});
    big.logWeights.push_back(0.01 * i);
  }
  OracleBudget tiny;
  tiny.maxPoints = 8;
  CHECK_THROWS_AS(solveExactCover(big, tiny), CapacityError);
  tiny.maxPoints = 64;
  tiny.maxCandidates = 10;
  CHECK_THROWS_AS(solveExactPacking(big, tiny), CapacityError);
  SetSystem hole;
  hole.universe = 2;
  hole.sets = {{0}};
  hole.logWeights = {0.0};
  CHECK_THROWS_AS(solveExactCover(hole, {}), InvalidArgument);
}

TEST_CASE("set-system solvers against subset enumeration") {
  brute::Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t U = 1 + rng.below(10);
    const std::size_t m = 1 + rng.below(12);
    SetSystem sys;
    sys.universe = U;
    std::vector<brute::Ball> balls;
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<std::uint32_t> set;
      std::vector<std::size_t> members;
      for (std::uint32_t x = 0; x < U; ++x) {
        if (rng.unit() < 0.35) {
          set.push_back(x);
          members.push_back(x);
        }
      }
      if (set.empty()) {
        set.push_back(static_cast<std::uint32_t>(rng.below(U)));
        members.push_back(set.back());
      }
      // coarse weights make ties common
      const double w = static_cast<double>(rng.below(5)) * 0.5 - 1.0;
      sys.sets.push_back(set);
      sys.logWeights.push_back(w);
      balls.push_back({members, w});
    }
    const double pack = brute::maxPacking(balls);
    const auto sol = solveExactPacking(sys, {});
    CHECK(sol.logValue == doctest::Approx(pack).epsilon(1e-12));
    CHECK(std::is_sorted(sol.chosen.begin(), sol.chosen.end()));

    const double cover = brute::minCover(balls, bridge::iota(U));
    if (std::isinf(cover)) {
      CHECK_THROWS_AS(solveExactCover(sys, {}), InvalidArgument);
    } else {
      CHECK(solveExactCover(sys, {}).logValue == doctest::Approx(cover).epsilon(1e-12));
    }
  }
}

TEST_CASE("independent set solver against enumeration") {
  brute::Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t V = 1 + rng.below(14);
    std::vector<std::vector<std::uint32_t>> adj(V);
    for (std::uint32_t a = 0; a < V; ++a) {
      for (std::uint32_t b = a + 1; b < V; ++b) {
        if (rng.unit() < 0.3) {
          adj[a].push_back(b);
          adj[b].push_back(a);
        }
      }
    }
    std::vector<double> w(V);
    for (auto& v : w) v = rng.range(-2.0, 2.0);
    double best = -INFINITY;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << V); ++mask) {
      bool ok = true;
      std::vector<double> chosen;
      for (std::uint32_t a = 0; a < V && ok; ++a) {
        if (!(mask >> a & 1)) continue;
        for (auto b : adj[a]) ok = ok && !(mask >> b & 1);
        chosen.push_back(w[a]);
      }
      if (ok) best = std::max(best, brute::logSumExp(chosen));
    }
    CHECK(solveExactIndependentSet(adj, w, {}).logValue == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("ball oracles are invariant under candidate order") {
  brute::Rng rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const auto sys = brute::randomLine(rng, 3 + rng.below(7), 1 + rng.below(2), false);
    const bridge::Lib lib(sys);
    const double eps = rng.range(0.3, 1.5);
    std::vector<WeightedBall> open, closed;
    for (std::size_t n = 1; n <= 2; ++n) {
      for (Point c = 0; c < sys.size(); ++c) {
        // tied weights on purpose
        const double w = std::round(sys.birkhoff(n, c));
        open.push_back(ballOf(lib.space, lib.maps, n, eps, c, false, w));
        closed.push_back(ballOf(lib.space, lib.maps, n, eps, c, true, w));
      }
    }
    const auto coverRef = exactCoverInfimum(open, lib.all());
    const auto packRef = exactPackingSupremum(closed);
    for (int round = 0; round < 5; ++round) {
      std::shuffle(open.begin(), open.end(), rng.engine);
      std::shuffle(closed.begin(), closed.end(), rng.engine);
      const auto c = exactCoverInfimum(open, lib.all());
      const auto p = exactPackingSupremum(closed);
      CHECK(c.logValue == coverRef.logValue);
      CHECK(p.logValue == packRef.logValue);
      CHECK(c.witnesses.size() == coverRef.witnesses.size());
      for (std::size_t i = 0; i < std::min(c.witnesses.size(), coverRef.witnesses.size()); ++i) {
        CHECK(c.witnesses[i].center == coverRef.witnesses[i].center);
      }
    }
  }
}

TEST_CASE("instance hash is stable") {
  CHECK(instanceHash("") == 0xcbf29ce484222325ULL);
  CHECK(instanceHash("a") == 0xaf63dc4c8601ec8cULL);
}
