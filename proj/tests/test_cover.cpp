#include "doctest.h"

#include <cmath>

#include "bridge.hpp"
#include "ndsp/error.hpp"
#include "ndsp/oracle.hpp"

using namespace ndsp;

namespace {

System family(const nlohmann::json& d) { return builtinSystem(d); }

CoverEngine engineOf(const System& s, std::size_t horizon, EngineOptions options = {}) {
  return CoverEngine(s.metric(), s.maps, s.potential, horizon, options);
}

EngineOptions greedyOnly() {
  EngineOptions o;
  o.useOracle = false;
  return o;
}

}  // namespace

TEST_CASE("spanning and separated counts on the shipped fixtures") {
  const System two = family({{"family", "two-point"}});
  const auto e2 = engineOf(two, 4);
  const PointSet ab = PointSet::all(two.metric());
  CHECK(e2.spanningSet(ab, 3, 2.0).cardinality == 1);
  CHECK(e2.spanningSet(ab, 3, 0.5).cardinality == 2);
  CHECK(e2.separatedSet(ab, 2, 0.5).cardinality == 2);

  const System point = family({{"family", "single-point"}});
  const auto e1 = engineOf(point, 6);
  for (std::size_t n = 1; n <= 6; ++n) {
    CHECK(e1.separatedSet(PointSet::all(point.metric()), n, 0.1 * static_cast<double>(n)).cardinality == 1);
  }

  const System shift = family({{"family", "cyclic-shift"}, {"L", 8}});
  EngineOptions big;
  big.budget.maxPoints = 16;
  const auto e3 = engineOf(shift, 8, big);
  const PointSet all = PointSet::all(shift.metric());
  const auto span = e3.spanningSet(all, 4, 0.5);
  const auto sep = e3.separatedSet(all, 4, 0.5);
  CHECK(span.cardinality == 16);
  CHECK(sep.cardinality == 16);
  CHECK(span.exact);
  CHECK(sep.exact);
}

TEST_CASE("fixed and variable cover sums on the shipped fixtures") {
  const System point = family({{"family", "single-point"}, {"phi", 0.3}});
  const auto e1 = engineOf(point, 20);
  const PointSet p = PointSet::all(point.metric());
  const CoverSum fixed = e1.fixedCoverSum(p, 10, 0.5);
  CHECK(fixed.value == doctest::Approx(std::exp(3.0)).epsilon(1e-12));
  CHECK(fixed.witnesses.size() == 1);
  CHECK(e1.variableCoverSum(p, 0.5, 0.3, 3, 9).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e1.variableCoverSum(p, 0.5, 0.5, 10, 20).value == doctest::Approx(std::exp(-4.0)).epsilon(1e-12));

  const System two = family({{"family", "two-point"}});
  const auto e2 = engineOf(two, 6);
  const PointSet ab = PointSet::all(two.metric());
  CHECK(e2.fixedCoverSum(ab, 5, 0.5).value == doctest::Approx(2.0));
  CHECK(e2.variableCoverSum(ab, 0.5, 0.0, 1, 3).value == doctest::Approx(2.0));
  CHECK_THROWS_AS(e2.variableCoverSum(ab, 0.5, 0.0, 3, 1), InvalidArgument);

  const MetricSpace line = MetricSpace::line({0, 1, 2, 3});
  const CoverEngine e4(line, MapSequence::identity(4), Potential::zero(4), 2);
  const CoverSum c4 = e4.fixedCoverSum(PointSet::all(line), 1, 1.1);
  CHECK(c4.value == doctest::Approx(2.0));
  CHECK(c4.exact);
}

TEST_CASE("packing sums on the shipped fixtures") {
  const System two = family({{"family", "two-point"}});
  const auto e2 = engineOf(two, 4);
  const PointSet ab = PointSet::all(two.metric());
  CHECK(e2.packingSum(ab, 0.5, 0.0, 1, 1).value == doctest::Approx(2.0));
  CHECK(e2.refinedPackingSum(ab, 0.5, 0.0, 1, 1, 2).value == doctest::Approx(2.0));

  const System point = family({{"family", "single-point"}, {"phi", 0.3}});
  const auto e1 = engineOf(point, 8);
  const PointSet p = PointSet::all(point.metric());
  CHECK(e1.packingSum(p, 0.5, 0.3, 2, 6).value == doctest::Approx(1.0));
  for (std::size_t parts : {1, 2, 4}) {
    CHECK(e1.refinedPackingSum(p, 0.5, 0.3, 2, 6, parts).value == doctest::Approx(1.0));
  }

  // Closed d_3 balls of radius 1/2 are the 3-prefix classes: eight disjoint unit weights.
  const System shift = family({{"family", "cyclic-shift"}, {"L", 8}});
  const auto e3 = engineOf(shift, 8);
  const CoverSum packed = e3.packingSum(PointSet::all(shift.metric()), 0.5, 0.0, 3, 3);
  CHECK(packed.value == doctest::Approx(8.0));
  CHECK(packed.exact);
}

TEST_CASE("open cover sums") {
  const System two = family({{"family", "two-point"}});
  const PointSet ab = PointSet::all(two.metric());
  const auto e2 = engineOf(two, 4);
  const std::vector<PointSet> singletons2{PointSet(two.metric(), {0}), PointSet(two.metric(), {1})};
  CHECK(e2.openCoverSum(ab, 2, singletons2).value == doctest::Approx(2.0));
  CHECK_THROWS_AS(e2.openCoverSum(ab, 2, {PointSet(two.metric(), {0})}), InvalidArgument);

  const System point = family({{"family", "single-point"}, {"phi", 0.3}});
  const auto e1 = engineOf(point, 10);
  CHECK(e1.openCoverSum(PointSet::all(point.metric()), 10, {PointSet::all(point.metric())}).value ==
        doctest::Approx(std::exp(3.0)));

  const System cycle = family({{"family", "n-cycle"}, {"n", 3}});
  const auto e5 = engineOf(cycle, 4);
  std::vector<PointSet> singletons3;
  for (Point x = 0; x < 3; ++x) singletons3.emplace_back(cycle.metric(), std::vector<Point>{x});
  CHECK(e5.openCoverSum(PointSet::all(cycle.metric()), 3, singletons3).value == doctest::Approx(3.0));
}

TEST_CASE("vitali subfamily") {
  const MetricSpace cloud = MetricSpace::line({0.0, 0.5, 3.0});
  const auto maps = MapSequence::identity(3);
  std::vector<BowenBall> balls;
  for (Point c = 0; c < 3; ++c) balls.push_back(bowenBall(cloud, maps, 1, 1.0, c, false));
  const auto chosen = vitaliSubfamily(cloud, maps, balls);
  REQUIRE(chosen.size() == 2);
  CHECK(chosen[0].center == 0);
  CHECK(chosen[1].center == 2);
  CHECK(vitaliSubfamily(cloud, maps, {balls[0]}).size() == 1);

  brute::Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const auto sys = brute::randomLine(rng, 3 + rng.below(8), 1 + rng.below(2), false);
    const bridge::Lib lib(sys);
    const std::size_t n = 1 + rng.below(3);
    std::vector<BowenBall> input;
    for (Point c = 0; c < sys.size(); ++c) {
      if (rng.unit() < 0.6) input.push_back(bowenBall(lib.space, lib.maps, n, rng.range(0.2, 2.0), c, false));
    }
    if (input.empty()) continue;
    const auto out = vitaliSubfamily(lib.space, lib.maps, input);
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (std::size_t j = i + 1; j < out.size(); ++j) CHECK_FALSE(out[i].members.intersects(out[j].members));
    }
  }
}

TEST_CASE("greedy and engine values against exhaustive enumeration") {
  brute::Rng rng(32);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t P = 3 + rng.below(4);
    const auto sys = brute::randomLine(rng, P, 1 + rng.below(2), trial % 2 == 0);
    const bridge::Lib lib(sys);
    const auto exact = lib.engine(5);
    const auto greedy = lib.engine(5, greedyOnly());
    const double eps = rng.range(0.3, 1.5);
    std::vector<std::size_t> Kv;
    for (std::size_t x = 0; x < P; ++x) {
      if (x == 0 || rng.unit() < 0.7) Kv.push_back(x);
    }
    const PointSet K = lib.subset(Kv);
    const std::size_t N = 1 + rng.below(2), Nmax = N + rng.below(2);
    const double s = rng.range(-1.0, 1.0);

    for (std::size_t n = 1; n <= 4; ++n) {
      const auto span = exact.spanningSet(K, n, eps);
      const auto sep = exact.separatedSet(K, n, eps);
      CHECK(span.cardinality == brute::spanningNumber(sys, Kv, n, eps));
      CHECK(sep.cardinality == brute::separated(sys, Kv, n, eps).count);
      CHECK(span.exact);
      CHECK(sep.exact);
      CHECK(greedy.spanningSet(K, n, eps).cardinality >= span.cardinality);
      CHECK(greedy.separatedSet(K, n, eps).cardinality <= sep.cardinality);
      CHECK(exact.separatedSum(K, n, eps).logValue ==
            doctest::Approx(brute::separated(sys, Kv, n, eps).logSum).epsilon(1e-12));
      // sandwich
      CHECK(exact.separatedSet(K, n, 2 * eps).cardinality <= span.cardinality);
      CHECK(span.cardinality <= sep.cardinality);
    }

    const double cover = brute::minCover(brute::coverCandidates(sys, N, Nmax, eps, s), Kv);
    const CoverSum got = exact.variableCoverSum(K, eps, s, N, Nmax);
    CHECK(got.exact);
    CHECK(got.logValue == doctest::Approx(cover).epsilon(1e-12));
    const CoverSum approx = greedy.variableCoverSum(K, eps, s, N, Nmax);
    CHECK(approx.logValue >= cover - 1e-12);
    CHECK(std::exp(approx.logValue - cover) <= std::log(12.0) + 1.0 + 1e-9);

    const double pack = brute::maxPacking(brute::packingCandidates(sys, Kv, N, Nmax, eps, s));
    const CoverSum gotPack = exact.packingSum(K, eps, s, N, Nmax);
    CHECK(gotPack.exact);
    CHECK(gotPack.logValue == doctest::Approx(pack).epsilon(1e-12));
    CHECK(greedy.packingSum(K, eps, s, N, Nmax).logValue <= pack + 1e-12);
    CHECK(exact.refinedPackingSum(K, eps, s, N, Nmax, 3).logValue == doctest::Approx(pack).epsilon(1e-12));
    CHECK(exact.refinedPackingSum(K, eps, s, N, Nmax, 1).logValue == gotPack.logValue);

    // Larger eps never increases the exact fixed-length value.
    CHECK(exact.fixedCoverSum(K, N, eps * 1.5).logValue <= exact.fixedCoverSum(K, N, eps).logValue + 1e-12);
  }
}

TEST_CASE("packing with every weight below one keeps the best ball") {
  brute::Rng rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const auto sys = brute::randomLine(rng, 3 + rng.below(6), 1, false);
    const bridge::Lib lib(sys);
    const auto e = lib.engine(4);
    const double s = 5.0;  // |phi| <= 1, so every log weight is negative
    double best = -INFINITY;
    for (std::size_t n = 2; n <= 3; ++n) {
      for (std::size_t x = 0; x < sys.size(); ++x) best = std::max(best, sys.birkhoff(n, x) - s * double(n));
    }
    CHECK(e.packingSum(lib.all(), 0.5, s, 2, 3).logValue >= best - 1e-12);
  }
}
