#include "doctest.h"

#include <cmath>
#include <numbers>

#include "bridge.hpp"
#include "ndsp/error.hpp"
#include "ndsp/pressure.hpp"

using namespace ndsp;

namespace {

const double kLog2 = std::numbers::ln2;

System family(const nlohmann::json& d) { return builtinSystem(d); }

std::vector<std::size_t> range(std::size_t a, std::size_t b) {
  std::vector<std::size_t> v;
  for (std::size_t n = a; n <= b; ++n) v.push_back(n);
  return v;
}

}  // namespace

TEST_CASE("critical value location") {
  const auto f = [](double s) { return std::exp(10.0 * (0.3 - s)); };
  CHECK(criticalValue(f, {0.0, 1.0}, 1e-10) == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(criticalValue(f, {5.0, 6.0}, 1e-10) == doctest::Approx(0.3).epsilon(1e-9));  // bracket widened
  CHECK(criticalValueLog([](double s) { return 4.0 * (1.5 - s); }, {-1.0, 1.0}, 1e-10) ==
        doctest::Approx(1.5).epsilon(1e-9));
  CHECK_THROWS_AS(criticalValue([](double) { return 0.0; }, {0.0, 1.0}, 1e-8), NoJumpError);
  CHECK(tailStart(5) == 2);
  CHECK(tailStart(4) == 2);
  CHECK(tailStart(1) == 0);
  for (auto kind : {PressureKind::Classical, PressureKind::Pesin, PressureKind::Packing,
                    PressureKind::CapacityUpper, PressureKind::CapacityLower}) {
    CHECK((pressureKindFromString(toString(kind)) == kind));
  }
}

TEST_CASE("single point") {
  const System p = family({{"family", "single-point"}, {"phi", 0.3}});
  const CoverEngine e(p.metric(), p.maps, p.potential, 12);
  const PointSet K = PointSet::all(p.metric());
  const auto cls = classicalPressure(e, K, {0.5, 0.25}, range(1, 8), ClassicalMode::Separated);
  for (const auto& row : cls.perScaleTable) CHECK(row.normalized == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(capacityPressure(e, K, {0.5}, range(1, 8), true).value == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(capacityPressure(e, K, {0.5}, range(1, 8), false).value == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(std::abs(pesinPressure(e, K, {0.5}, 4, 12, 1e-10).value - 0.3) <= 1e-9);
  CHECK(std::abs(packingPressure(e, K, {0.5}, 4, 12, 3, 1e-10).value - 0.3) <= 1e-9);

  RelationshipConfig rc;
  rc.epsSchedule = {0.5};
  rc.N = 4;
  rc.Nmax = 8;
  rc.chainTol = 1e-6;
  const auto rep = relationshipReport(e, K, rc);
  CHECK(rep.pass);
  for (const auto* est : {&rep.classical, &rep.pesin, &rep.packing, &rep.capacityUpper, &rep.capacityLower}) {
    CHECK(std::abs(est->value - 0.3) <= 1e-6);
  }
}

TEST_CASE("two points and the three-cycle") {
  const System two = family({{"family", "two-point"}});
  const CoverEngine e2(two.metric(), two.maps, two.potential, 12);
  const PointSet ab = PointSet::all(two.metric());
  CHECK(classicalPressure(e2, ab, {0.5}, {10}, ClassicalMode::Separated).value ==
        doctest::Approx(kLog2 / 10).epsilon(1e-12));
  CHECK(capacityPressure(e2, ab, {0.5}, {10}, true).value == doctest::Approx(kLog2 / 10).epsilon(1e-12));
  for (std::size_t N : {2, 4, 8}) {
    CHECK(pesinPressure(e2, ab, {0.5}, N, N + 4).value <= kLog2 / static_cast<double>(N) + 1e-8);
  }

  // Three disjoint balls at every n: packing sums 3 e^{-sN} at the shortest length.
  const System cycle = family({{"family", "n-cycle"}, {"n", 3}});
  const CoverEngine e5(cycle.metric(), cycle.maps, cycle.potential, 16);
  for (std::size_t N : {2, 4, 8}) {
    CHECK(std::abs(packingPressure(e5, PointSet::all(cycle.metric()), {0.5}, N, N + 4).value -
                   std::log(3.0) / static_cast<double>(N)) <= 1e-7);
  }
}

TEST_CASE("full shift") {
  const System shift = family({{"family", "cyclic-shift"}, {"L", 12}});
  EngineOptions big;
  big.budget.maxPoints = 16;
  const CoverEngine e(shift.metric(), shift.maps, shift.potential, 8, big);
  const PointSet X = PointSet::all(shift.metric());
  const auto sep = classicalPressure(e, X, {0.5}, range(1, 8), ClassicalMode::Separated);
  for (const auto& row : sep.perScaleTable) CHECK(row.normalized == doctest::Approx(kLog2).epsilon(1e-12));
  CHECK(std::abs(capacityPressure(e, X, {0.5}, range(1, 8), true).value - kLog2) <= 0.05);
  CHECK(std::abs(pesinPressure(e, X, {0.5}, 4, 8).value - kLog2) <= 0.05);
  CHECK(std::abs(packingPressure(e, X, {0.5}, 4, 8, 1).value - kLog2) <= 0.05);
}

TEST_CASE("pesin and packing against exhaustive critical values") {
  brute::Rng rng(51);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t P = 2 + rng.below(4);
    const auto sys = brute::randomLine(rng, P, 1 + rng.below(2), trial % 2 == 0);
    const bridge::Lib lib(sys);
    const auto e = lib.engine(4);
    const double eps = rng.range(0.3, 1.2);
    const std::size_t N = 1 + rng.below(2), Nmax = N + 1;
    const auto K = bridge::iota(P);
    const double tol = 1e-10;
    const auto pesin = pesinPressure(e, lib.all(), {eps}, N, Nmax, tol);
    CHECK(pesin.exact);
    CHECK(std::abs(pesin.value - brute::pesin(sys, K, eps, N, Nmax)) <= 2 * tol);
    const auto packing = packingPressure(e, lib.all(), {eps}, N, Nmax, 2, tol);
    CHECK(packing.exact);
    CHECK(std::abs(packing.value - brute::packing(sys, K, eps, N, Nmax)) <= 2 * tol);
  }
}

TEST_CASE("functionals are nonincreasing in s") {
  brute::Rng rng(52);
  for (int trial = 0; trial < 15; ++trial) {
    const auto sys = brute::randomLine(rng, 3 + rng.below(6), 1 + rng.below(2), false);
    const bridge::Lib lib(sys);
    const auto e = lib.engine(6);
    const auto cover = e.coverPool(lib.all(), 0.6, 2, 5);
    const auto pack = e.packingPool(lib.all(), 0.6, 2, 5);
    double prevCover = INFINITY, prevPack = INFINITY;
    for (int i = 0; i < 16; ++i) {
      const double s = -2.0 + 0.25 * i;
      const double c = e.coverSum(cover, s).logValue;
      const double p = e.refinedPackingSum(pack, s, 3).logValue;
      CHECK(c <= prevCover + 1e-12);
      CHECK(p <= prevPack + 1e-12);
      prevCover = c;
      prevPack = p;
    }
  }
}

TEST_CASE("subset monotonicity and the finite-union sandwich") {
  brute::Rng rng(53);
  const double tol = 1e-8;
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t P = 4 + rng.below(5);
    const auto sys = brute::randomLine(rng, P, 1, true);
    const bridge::Lib lib(sys);
    const auto e = lib.engine(8);
    std::vector<std::size_t> a, b;
    for (std::size_t x = 0; x < P; ++x) (x % 2 == 0 ? a : b).push_back(x);
    const PointSet A = lib.subset(a), B = lib.subset(b), X = lib.all();
    const double eps = 0.05;  // below every gap: singleton balls
    auto pesin = [&](const PointSet& K) { return pesinPressure(e, K, {eps}, 4, 8, tol).value; };
    auto packing = [&](const PointSet& K) { return packingPressure(e, K, {eps}, 4, 8, 4, tol).value; };
    CHECK(pesin(A) <= pesin(X) + 2 * tol);
    CHECK(packing(B) <= packing(X) + 2 * tol);
    // At window start N the union can exceed the larger piece by at most log 2 / N.
    const double slack = kLog2 / 4.0 + 2 * tol;
    const double pesinMax = std::max(pesin(A), pesin(B));
    const double packingMax = std::max(packing(A), packing(B));
    CHECK(pesin(X) >= pesinMax - 2 * tol);
    CHECK(pesin(X) <= pesinMax + slack);
    CHECK(packing(X) >= packingMax - 2 * tol);
    CHECK(packing(X) <= packingMax + slack);
    CHECK(classicalPressure(e, A, {eps}, range(2, 6), ClassicalMode::Separated).value <=
          classicalPressure(e, X, {eps}, range(2, 6), ClassicalMode::Separated).value + 1e-12);
  }
}

TEST_CASE("translation holds scale by scale") {
  const System shift = family({{"family", "cyclic-shift"}, {"L", 8}, {"potential", "first-symbol"}});
  const PointSet X = PointSet::all(shift.metric());
  const CoverEngine e(shift.metric(), shift.maps, shift.potential, 8);
  const CoverEngine shifted(shift.metric(), shift.maps, shift.potential.plus(0.7), 8);
  const auto a = capacityPressure(e, X, {0.5}, range(1, 8), true);
  const auto b = capacityPressure(shifted, X, {0.5}, range(1, 8), true);
  for (std::size_t i = 0; i < a.perScaleTable.size(); ++i) {
    CHECK(b.perScaleTable[i].normalized == doctest::Approx(a.perScaleTable[i].normalized + 0.7).epsilon(1e-12));
  }
  CHECK(std::abs(pesinPressure(shifted, X, {0.5}, 4, 8).value - pesinPressure(e, X, {0.5}, 4, 8).value - 0.7) <=
        2e-8);
}

TEST_CASE("relationship chain on random instances") {
  brute::Rng rng(54);
  for (int trial = 0; trial < 10; ++trial) {
    const auto sys = brute::randomLine(rng, 4 + rng.below(5), 1 + rng.below(2), trial % 2 == 1);
    const bridge::Lib lib(sys);
    RelationshipConfig rc;
    rc.epsSchedule = {rng.range(0.3, 1.0)};
    // Packing carries a log(#balls)/N bias at the window start; long windows keep it under chainTol.
    rc.N = 40;
    rc.Nmax = 44;
    EngineOptions big;
    big.budget.maxPoints = 16;
    const auto e = lib.engine(rc.Nmax, big);
    const auto rep = relationshipReport(e, lib.all(), rc);
    for (const auto& c : rep.checks) {
      if (!c.pass) MESSAGE(c.name << " lhs=" << c.lhs << " rhs=" << c.rhs << " tol=" << c.tolerance);
    }
    CHECK(rep.pass);
    CHECK(rep.maxScaleGap <= 1e-9);
  }
}

TEST_CASE("schedule validation") {
  const System p = family({{"family", "single-point"}});
  const CoverEngine e(p.metric(), p.maps, p.potential, 8);
  const PointSet K = PointSet::all(p.metric());
  CHECK_THROWS_AS(classicalPressure(e, K, {}, {1}, ClassicalMode::Separated), InvalidArgument);
  CHECK_THROWS_AS(classicalPressure(e, K, {0.5}, {}, ClassicalMode::Separated), InvalidArgument);
  CHECK_THROWS_AS(classicalPressure(e, K, {0.25, 0.5}, {1}, ClassicalMode::Separated), InvalidArgument);
  CHECK_THROWS_AS(capacityPressure(e, K, {0.5}, {3, 2}, true), InvalidArgument);
  CHECK_THROWS_AS(pesinPressure(e, K, {0.5}, 5, 4), InvalidArgument);
  CHECK_THROWS_AS(pesinPressure(e, K, {0.5}, 4, 9), InvalidArgument);  // past the horizon
}
