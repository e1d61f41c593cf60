#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>

#include "bridge.hpp"
#include "ndsp/error.hpp"
#include "ndsp/geometry.hpp"
#include "ndsp/measure.hpp"

using namespace ndsp;

namespace {

const double kLog2 = std::numbers::ln2;

std::vector<std::size_t> range(std::size_t a, std::size_t b) {
  std::vector<std::size_t> v;
  for (std::size_t n = a; n <= b; ++n) v.push_back(n);
  return v;
}

System shift(std::size_t L) { return builtinSystem({{"family", "cyclic-shift"}, {"L", L}}); }

std::vector<double> randomWeights(brute::Rng& rng, std::size_t n, bool sparse) {
  std::vector<double> w(n);
  for (auto& v : w) v = (sparse && rng.unit() < 0.3) ? 0.0 : rng.unit();
  w[rng.below(n)] += 0.5;
  return w;
}

double total(const std::vector<double>& w) {
  double t = 0.0;
  for (double v : w) t += v;
  return t;
}

// f_n^k x = f_{n+k-1} o ... o f_n x
std::size_t run(const brute::Nds& s, std::size_t n, std::size_t k, std::size_t x) {
  for (std::size_t j = n; j < n + k; ++j) x = s.map(j)[x];
  return x;
}

}  // namespace

TEST_CASE("measure construction") {
  const DiscreteMeasure mu({2.0, 1.0, 1.0});
  CHECK(mu(0) == 0.5);
  CHECK(mu(1) == 0.25);
  CHECK(mu.support() == std::vector<Point>{0, 1, 2});
  CHECK(DiscreteMeasure({0.0, 3.0}).support() == std::vector<Point>{1});
  CHECK_THROWS_AS(DiscreteMeasure(std::vector<double>{}), InvalidArgument);
  CHECK_THROWS_AS(DiscreteMeasure({0.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(DiscreteMeasure({1.0, -0.1}), InvalidArgument);
  CHECK_THROWS_AS(DiscreteMeasure({1.0, std::numeric_limits<double>::quiet_NaN()}), InvalidArgument);
  CHECK_THROWS_AS(DiscreteMeasure::dirac(3, 3), InvalidArgument);
  CHECK(mu.integral({4.0, 0.0, 8.0}) == doctest::Approx(4.0));

  const System s = shift(8);
  CHECK_THROWS_AS(DiscreteMeasure::bernoulli(s, 1.5), InvalidArgument);
  CHECK_THROWS_AS(DiscreteMeasure::bernoulli(builtinSystem({{"family", "n-cycle"}, {"n", 3}}), 0.5),
                  InvalidArgument);
  const DiscreteMeasure b = DiscreteMeasure::bernoulli(s, 0.3);
  CHECK(total(b.weights()) == doctest::Approx(1.0).epsilon(1e-14));
  // Cylinder masses are products of symbol probabilities.
  CHECK(b.mass(shiftCylinder(s, {1, 0, 1})) == doctest::Approx(0.3 * 0.7 * 0.3).epsilon(1e-12));
  CHECK(b.mass(shiftCylinder(s, {0, 0, 0, 0})) == doctest::Approx(std::pow(0.7, 4)).epsilon(1e-12));

  const PointSet K = shiftCylinder(s, {1});
  const DiscreteMeasure c = DiscreteMeasure::conditioned(b, K);
  CHECK(c.mass(K) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c(shiftWord(s, {1, 1, 0, 0, 0, 0, 0, 0})) ==
        doctest::Approx(b(shiftWord(s, {1, 1, 0, 0, 0, 0, 0, 0})) / 0.3).epsilon(1e-12));
  CHECK_THROWS_AS(DiscreteMeasure::conditioned(DiscreteMeasure::dirac(256, 0), K), InvalidArgument);
}

TEST_CASE("pushforward and empirical measures") {
  const System cycle = builtinSystem({{"family", "n-cycle"}, {"n", 3}});
  const DiscreteMeasure skew({0.5, 0.25, 0.25});
  CHECK(pushforward(skew, cycle.maps.map(1)).weights() == std::vector<double>{0.25, 0.5, 0.25});
  CHECK(pushforward(skew, MapTable{0, 1, 2}).weights() == skew.weights());
  CHECK(pushforward(DiscreteMeasure::uniform(2), MapTable{1, 1}).weights() == std::vector<double>{0.0, 1.0});

  CHECK(empiricalMeasure(cycle.metric(), cycle.maps, 0, 3).weights() ==
        std::vector<double>(3, 1.0 / 3.0));
  const System collapse = builtinSystem({{"family", "two-point"}, {"map", "collapse"}});
  CHECK(empiricalMeasure(collapse.metric(), collapse.maps, 0, 4).weights() == std::vector<double>{0.25, 0.75});
  const System point = builtinSystem({{"family", "single-point"}});
  for (std::size_t n : {1, 5, 17}) CHECK(empiricalMeasure(point.metric(), point.maps, 0, n)(0) == 1.0);

  brute::Rng rng(0x70757368);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t size = 2 + rng.below(9);
    const auto s = brute::randomLine(rng, size, 1 + rng.below(3), trial % 2 == 0);
    const bridge::Lib lib(s);
    const DiscreteMeasure mu(randomWeights(rng, size, true));
    const MapTable& f = lib.maps.map(1);
    const DiscreteMeasure nu = pushforward(mu, f);
    std::vector<double> expect(size, 0.0);
    for (std::size_t x = 0; x < size; ++x) expect[s.map(1)[x]] += mu(static_cast<Point>(x));
    for (std::size_t x = 0; x < size; ++x) CHECK(nu(static_cast<Point>(x)) == doctest::Approx(expect[x]).epsilon(1e-14));
    CHECK(total(nu.weights()) == doctest::Approx(1.0).epsilon(1e-14));

    const std::size_t x0 = rng.below(size);
    const std::size_t n = 1 + rng.below(12);
    const DiscreteMeasure gamma = empiricalMeasure(lib.space, lib.maps, static_cast<Point>(x0), n);
    std::vector<double> visits(size, 0.0);
    for (std::size_t i = 0; i < n; ++i) visits[s.iterate(i, x0)] += 1.0 / static_cast<double>(n);
    for (std::size_t x = 0; x < size; ++x) CHECK(gamma(static_cast<Point>(x)) == doctest::Approx(visits[x]).epsilon(1e-13));
  }
}

TEST_CASE("invariance defect") {
  const System cycle = builtinSystem({{"family", "n-cycle"}, {"n", 3}});
  CHECK(invarianceDefect(DiscreteMeasure::uniform(3), cycle.maps, 9, cycle.testFunctions) <= 1e-15);
  CHECK(invarianceDefect(DiscreteMeasure({0.5, 0.25, 0.25}), cycle.maps, 1, cycle.testFunctions) > 1e-3);
  const System point = builtinSystem({{"family", "single-point"}});
  CHECK(invarianceDefect(DiscreteMeasure::dirac(1, 0), point.maps, 5, point.testFunctions) == 0.0);

  brute::Rng rng(0x696e7661);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t size = 2 + rng.below(8);
    const auto s = brute::randomLine(rng, size, 1 + rng.below(3), trial % 3 != 0);
    const bridge::Lib lib(s);
    const auto family = anchorFamily(lib.space, {0, static_cast<Point>(size - 1)});
    const DiscreteMeasure mu(randomWeights(rng, size, false));
    const std::size_t horizon = 1 + rng.below(5);
    double expect = 0.0;
    for (std::size_t k = 1; k <= horizon; ++k) {
      for (const auto& g : family.functions) {
        double moved = 0.0, plain = 0.0;
        for (std::size_t x = 0; x < size; ++x) {
          moved += mu(static_cast<Point>(x)) * g[s.map(k)[x]];
          plain += mu(static_cast<Point>(x)) * g[x];
        }
        expect = std::max(expect, std::abs(moved - plain));
      }
    }
    CHECK(invarianceDefect(mu, lib.maps, horizon, family) == doctest::Approx(expect).epsilon(1e-12));

    // Zero defect means every family integral survives the pushforward.
    if (trial % 3 != 0 && s.tables.size() == 1) {
      const DiscreteMeasure u = DiscreteMeasure::uniform(size);
      CHECK(invarianceDefect(u, lib.maps, 3, family) <= 1e-14);
      const DiscreteMeasure pushed = pushforward(u, lib.maps.map(1));
      for (const auto& g : family.functions) CHECK(pushed.integral(g) == doctest::Approx(u.integral(g)).epsilon(1e-14));
    }
  }
}

TEST_CASE("ball masses") {
  const System s = shift(8);
  const DiscreteMeasure b = DiscreteMeasure::bernoulli(s, 0.5);
  for (Point x = 0; x < 256; x += 11) {
    CHECK(ballMass(b, bowenBall(s.metric(), s.maps, 3, 0.5, x, false)) == doctest::Approx(0.125).epsilon(1e-12));
  }
  CHECK(ballMass(b, bowenBall(s.metric(), s.maps, 1, 10.0, 0, false)) == doctest::Approx(1.0).epsilon(1e-12));
  const DiscreteMeasure d = DiscreteMeasure::dirac(256, 255);
  CHECK(ballMass(d, bowenBall(s.metric(), s.maps, 2, 0.5, 0, false)) == 0.0);

  brute::Rng rng(0x62616c6c);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t size = 2 + rng.below(9);
    const auto s2 = brute::randomLine(rng, size, 1 + rng.below(3), false);
    const bridge::Lib lib(s2);
    const DiscreteMeasure mu(randomWeights(rng, size, true));
    const std::size_t c = rng.below(size);
    const std::size_t n = 1 + rng.below(5);
    const double eps = rng.range(0.05, 3.0);
    const bool closed = rng.unit() < 0.5;
    double expect = 0.0;
    for (std::size_t y : s2.ball(c, n, eps, closed)) expect += mu(static_cast<Point>(y));
    const double got = ballMass(mu, bowenBall(lib.space, lib.maps, n, eps, static_cast<Point>(c), closed));
    CHECK(got == doctest::Approx(expect).epsilon(1e-13));
    CHECK(got >= mu(static_cast<Point>(c)) - 1e-15);
    CHECK(got <= 1.0 + 1e-15);
  }
}

TEST_CASE("local pressure against direct evaluation") {
  brute::Rng rng(0x6c6f6361);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t size = 2 + rng.below(8);
    const auto s = brute::randomLine(rng, size, 1 + rng.below(3), trial % 2 == 0);
    const bridge::Lib lib(s);
    const DiscreteMeasure mu(randomWeights(rng, size, true));
    const std::vector<double> eps{rng.range(0.5, 2.0), rng.range(0.05, 0.5)};
    const auto ns = range(1, 2 + rng.below(6));
    const auto samples = bridge::iota(size);
    const auto prof = localPressure(mu, lib.space, lib.maps, lib.phi,
                                    std::vector<Point>(samples.begin(), samples.end()), eps, ns);
    REQUIRE(prof.table.size() == size);
    std::size_t infinite = 0;
    for (std::size_t x = 0; x < size; ++x) {
      for (std::size_t e = 0; e < eps.size(); ++e) {
        for (std::size_t k = 0; k < ns.size(); ++k) {
          const std::size_t n = ns[k];
          double m = 0.0;
          for (std::size_t y : s.ball(x, n, eps[e], false)) m += mu(static_cast<Point>(y));
          const double got = prof.value(x, e, k);
          if (m == 0.0) {
            ++infinite;
            CHECK(std::isinf(got));
            continue;
          }
          const double expect = (-std::log(m) + s.birkhoff(n, x)) / static_cast<double>(n);
          CHECK(got == doctest::Approx(expect).epsilon(1e-12));
        }
      }
      // Tail of the smallest scale.
      double hi = -std::numeric_limits<double>::infinity(), lo = std::numeric_limits<double>::infinity();
      for (std::size_t k = tailStart(ns.size()); k < ns.size(); ++k) {
        hi = std::max(hi, prof.value(x, eps.size() - 1, k));
        lo = std::min(lo, prof.value(x, eps.size() - 1, k));
      }
      if (std::isfinite(hi)) CHECK(prof.upper[x] == doctest::Approx(hi).epsilon(1e-12));
      if (std::isfinite(lo)) CHECK(prof.lower[x] == doctest::Approx(lo).epsilon(1e-12));
    }
    CHECK(prof.infiniteEntries == infinite);

    // Adding a constant shifts every entry by exactly that constant.
    const auto shifted = localPressure(mu, lib.space, lib.maps, lib.phi.plus(0.7),
                                       std::vector<Point>(samples.begin(), samples.end()), eps, ns);
    for (std::size_t x = 0; x < size; ++x) {
      for (std::size_t i = 0; i < prof.table[x].size(); ++i) {
        const double a = prof.table[x][i];
        if (std::isfinite(a)) CHECK(shifted.table[x][i] == doctest::Approx(a + 0.7).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("local pressure fixtures") {
  const System point = builtinSystem({{"family", "single-point"}, {"phi", 0.3}});
  const auto pp = localPressure(DiscreteMeasure::dirac(1, 0), point.metric(), point.maps, point.potential, {0},
                                {0.5}, range(1, 6));
  CHECK(pp.upper[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(pp.lower[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(pp.indexOf(0) == std::optional<std::size_t>(0));

  const System s = shift(12);
  const Potential zero = Potential::zero(s.metric().size());
  const auto half = localPressure(DiscreteMeasure::bernoulli(s, 0.5), s.metric(), s.maps, zero,
                                  {0, 1, 1000, 4095}, {0.5}, range(1, 8));
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(half.upper[i] == doctest::Approx(kLog2).epsilon(1e-12));
    CHECK(half.lower[i] == doctest::Approx(kLog2).epsilon(1e-12));
  }
  CHECK(!half.indexOf(2).has_value());
  const auto quarter = localPressure(DiscreteMeasure::bernoulli(s, 0.25), s.metric(), s.maps, zero, {0},
                                     {0.5}, range(1, 8));
  CHECK(quarter.upper[0] == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-12));

  // Integral over a set.
  const DiscreteMeasure mu = DiscreteMeasure::bernoulli(s, 0.5);
  std::vector<Point> all(s.metric().size());
  for (Point x = 0; x < all.size(); ++x) all[x] = x;
  const CoverEngine engine(s.metric(), s.maps, zero, 8);
  const auto prof = localPressure(mu, engine, all, {0.5}, range(4, 8));
  CHECK(measurePressureOverSet(mu, PointSet::all(s.metric()), prof, ProfileSide::Upper).value ==
        doctest::Approx(kLog2).epsilon(1e-12));
  const DiscreteMeasure outside = DiscreteMeasure::conditioned(mu, shiftCylinder(s, {1}));
  CHECK(measurePressureOverSet(outside, shiftCylinder(s, {0}), prof, ProfileSide::Lower).value == 0.0);
  CHECK(measurePressureOverSet(DiscreteMeasure::dirac(1, 0), PointSet::all(point.metric()), pp,
                               ProfileSide::Upper)
            .value == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("set integrals against direct sums") {
  brute::Rng rng(0x696e7465);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t size = 3 + rng.below(7);
    const auto s = brute::randomLine(rng, size, 1 + rng.below(2), true);
    const bridge::Lib lib(s);
    const DiscreteMeasure mu(randomWeights(rng, size, true));
    const auto all = bridge::iota(size);
    // Permutations keep every ball nonempty around its center, so all entries are finite
    // on the support.
    const auto prof = localPressure(mu, lib.space, lib.maps, lib.phi, std::vector<Point>(all.begin(), all.end()),
                                    {0.3}, range(1, 6));
    std::vector<std::size_t> K;
    for (std::size_t x = 0; x < size; ++x) {
      if (rng.unit() < 0.6) K.push_back(x);
    }
    double up = 0.0, lo = 0.0;
    for (std::size_t x : K) {
      if (mu(static_cast<Point>(x)) == 0.0) continue;
      up += mu(static_cast<Point>(x)) * prof.upper[x];
      lo += mu(static_cast<Point>(x)) * prof.lower[x];
    }
    const auto su = measurePressureOverSet(mu, lib.subset(K), prof, ProfileSide::Upper);
    const auto sl = measurePressureOverSet(mu, lib.subset(K), prof, ProfileSide::Lower);
    CHECK(su.value == doctest::Approx(up).epsilon(1e-12));
    CHECK(sl.value == doctest::Approx(lo).epsilon(1e-12));
    CHECK(su.warnings.empty());
    CHECK(sl.value <= su.value + 1e-12);
  }
}

TEST_CASE("zero-mass balls propagate") {
  // Open balls of radius 0.5 on two far apart points are singletons.
  const System two = builtinSystem({{"family", "two-point"}, {"map", "identity"}});
  const DiscreteMeasure d = DiscreteMeasure::dirac(2, 0);
  const auto prof = localPressure(d, two.metric(), two.maps, two.potential, {0, 1}, {0.5}, range(1, 4));
  CHECK(std::isfinite(prof.upper[0]));
  CHECK(std::isinf(prof.upper[1]));
  CHECK(prof.infiniteEntries == 4);
  // The infinite point carries no mass, so the integral over it is empty.
  CHECK(measurePressureOverSet(d, PointSet::all(two.metric()), prof, ProfileSide::Upper).warnings.empty());
  const auto missing = localPressure(d, two.metric(), two.maps, two.potential, {1}, {0.5}, range(1, 4));
  CHECK_THROWS(measurePressureOverSet(d, PointSet::all(two.metric()), missing, ProfileSide::Upper));
}

TEST_CASE("measure pressures") {
  const System point = builtinSystem({{"family", "single-point"}, {"phi", 0.3}});
  const CoverEngine pe(point.metric(), point.maps, point.potential, 12);
  const DiscreteMeasure dirac = DiscreteMeasure::dirac(1, 0);
  for (auto kind : {PressureKind::Pesin, PressureKind::Packing, PressureKind::CapacityUpper,
                    PressureKind::CapacityLower}) {
    CHECK(std::abs(measureCPPressure(dirac, pe, kind).value - 0.3) <= 1e-6);
  }
  CHECK(std::abs(spanningMeasurePressure(dirac, pe, {0.5}, range(4, 8)).value - 0.3) <= 1e-6);

  const System s = shift(12);
  const Potential zero = Potential::zero(s.metric().size());
  const CoverEngine engine(s.metric(), s.maps, zero, 12);
  MeasurePressureConfig mc;
  mc.epsSchedule = {0.5};
  mc.nSchedule = range(4, 8);
  const DiscreteMeasure b = DiscreteMeasure::bernoulli(s, 0.5);
  const auto packing = measureCPPressure(b, engine, PressureKind::Packing, {0.0}, mc);
  CHECK(std::abs(packing.value - kLog2) <= 0.05);
  REQUIRE(packing.candidates.size() == 1);
  CHECK(packing.candidates[0].fullSupport);
  CHECK(std::abs(spanningMeasurePressure(b, engine, {0.5}, range(4, 8), {0.0}).value - kLog2) <= 0.05);

  const DiscreteMeasure zeros = DiscreteMeasure::dirac(s.metric().size(), 0);
  CHECK(std::abs(measureCPPressure(zeros, engine, PressureKind::Packing, {0.0}, mc).value) <= 0.05);
  CHECK(std::abs(spanningMeasurePressure(zeros, engine, {0.5}, range(4, 8), {0.0}).value) <= 1e-9);
}

TEST_CASE("sublevel candidates") {
  brute::Rng rng(0x7375626c);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t size = 3 + rng.below(7);
    const auto s = brute::randomLine(rng, size, 1, true);
    const bridge::Lib lib(s);
    const DiscreteMeasure mu(randomWeights(rng, size, true));
    const auto all = bridge::iota(size);
    const auto prof = localPressure(mu, lib.space, lib.maps, lib.phi, std::vector<Point>(all.begin(), all.end()),
                                    {0.3}, range(1, 4));
    const double delta = rng.range(0.0, 0.6);
    const auto cands = sublevelCandidates(mu, prof, delta);
    REQUIRE(!cands.empty());
    bool sawFull = false;
    for (const auto& c : cands) {
      CHECK(mu.mass(c) >= 1.0 - delta - 1e-12);
      if (c.size() == mu.support().size()) sawFull = true;
    }
    CHECK(sawFull);
    CHECK(sublevelCandidates(mu, prof, 0.0).size() == 1);
  }
}

TEST_CASE("distribution principle and billingsley") {
  const System s = shift(12);
  const Potential zero = Potential::zero(s.metric().size());
  const CoverEngine engine(s.metric(), s.maps, zero, 12);
  const PointSet X = PointSet::all(s.metric());
  const std::vector<DiscreteMeasure> seq(4, DiscreteMeasure::bernoulli(s, 0.5));
  const auto good = distributionPrincipleCheck(seq, engine, X, kLog2 - 0.05, 0.5, 1.0, range(4, 8));
  CHECK(good.status == "pass");
  CHECK(good.hypothesis1);
  CHECK(good.hypothesis2);
  REQUIRE(good.pesin.has_value());
  CHECK(*good.pesin >= kLog2 - 0.1);
  const auto bad = distributionPrincipleCheck(seq, engine, X, kLog2 + 0.5, 0.5, 1.0, range(4, 8));
  CHECK(bad.status == "hypothesis-2");
  REQUIRE(bad.witness.has_value());
  CHECK(bad.witness->mass > bad.witness->bound);
  CHECK(!bad.pesin.has_value());

  // A null first hypothesis is reported before anything else.
  const DiscreteMeasure offK = DiscreteMeasure::conditioned(seq[0], shiftCylinder(s, {1}));
  const auto null = distributionPrincipleCheck({offK}, engine, shiftCylinder(s, {0}), 0.0, 0.5, 1.0, range(4, 8));
  CHECK(null.status == "hypothesis-1");

  const DiscreteMeasure mu = seq[0];
  std::vector<Point> all(X.begin(), X.end());
  const auto prof = localPressure(mu, engine, all, {0.5}, range(4, 8));
  MeasurePressureConfig mc;
  mc.epsSchedule = {0.5};
  mc.nSchedule = range(4, 8);
  const auto up = billingsleyBound(mu, engine, X, kLog2 + 0.05, prof, BillingsleyDirection::UpperLE, mc);
  CHECK(up.status == "pass");
  const auto down = billingsleyBound(mu, engine, X, kLog2 - 0.05, prof, BillingsleyDirection::LowerGE, mc);
  CHECK(down.status == "pass");
  // Constant profile pinches the packing estimate.
  REQUIRE(up.packing.has_value());
  CHECK(std::abs(*up.packing - kLog2) <= 0.05);
  const auto miss = billingsleyBound(mu, engine, X, kLog2 - 0.05, prof, BillingsleyDirection::UpperLE, mc);
  CHECK(miss.status == "hypothesis");
  CHECK(miss.witnesses.size() == X.size());
}

TEST_CASE("variational gap") {
  const System s = shift(12);
  const CoverEngine engine(s.metric(), s.maps, Potential::zero(s.metric().size()), 12);
  MeasurePressureConfig mc;
  mc.epsSchedule = {0.5};
  mc.nSchedule = range(4, 8);
  std::vector<DiscreteMeasure> family;
  for (int i = 1; i <= 9; ++i) family.push_back(DiscreteMeasure::bernoulli(s, i / 10.0));
  const auto r = variationalGap(engine, PointSet::all(s.metric()), family, range(8, 12), mc);
  CHECK(r.pass);
  CHECK(r.argmaxUpper == 4);
  CHECK(std::abs(r.gapUpper) <= 0.05);
  CHECK(r.entries.size() == 9);
  // Entropy of Bernoulli(p) below the maximum.
  for (std::size_t i = 0; i < 9; ++i) CHECK(r.entries[i].upperOverSet <= r.supUpper + 1e-12);

  const PointSet cyl = shiftCylinder(s, {0, 0, 0});
  CHECK_THROWS_AS(variationalGap(engine, cyl, {family[4]}, range(8, 12), mc), InvalidArgument);
}

TEST_CASE("non-wandering surrogate against direct search") {
  const System collapse = builtinSystem({{"family", "two-point"}, {"map", "collapse"}});
  const PointSet omega = nonWanderingSet(collapse.metric(), collapse.maps, 8, 0.4);
  CHECK(omega == PointSet(collapse.metric(), {1}));

  brute::Rng rng(0x6f6d6567);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t size = 2 + rng.below(8);
    const auto s = brute::randomLine(rng, size, 1 + rng.below(3), trial % 4 == 0);
    const bridge::Lib lib(s);
    const std::size_t kMax = 1 + rng.below(6);
    const double radius = rng.range(0.05, 1.5);
    std::vector<Point> expect;
    for (std::size_t x = 0; x < size; ++x) {
      std::vector<bool> inU(size);
      for (std::size_t y = 0; y < size; ++y) inU[y] = s.d[x][y] < radius;
      bool hit = false;
      for (std::size_t n = 1; n <= kMax && !hit; ++n) {
        for (std::size_t k = 1; k <= kMax && !hit; ++k) {
          for (std::size_t y = 0; y < size && !hit; ++y) hit = inU[y] && inU[run(s, n, k, y)];
        }
      }
      if (hit) expect.push_back(static_cast<Point>(x));
    }
    CHECK(nonWanderingSet(lib.space, lib.maps, kMax, radius) == PointSet(lib.space, expect));
    if (trial % 4 == 0) {
      // Permutations are recurrent: every point returns within size! steps, and
      // uniform mass sits on the surrogate once kMax covers the return time.
      CHECK(DiscreteMeasure::uniform(size).mass(nonWanderingSet(lib.space, lib.maps, 5040, radius)) ==
            doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("generic points against direct search") {
  const System cycle = builtinSystem({{"family", "n-cycle"}, {"n", 3}});
  const auto g = genericPoints(DiscreteMeasure::uniform(3), cycle.metric(), cycle.maps, cycle.testFunctions, 0.5,
                               3, 9);
  CHECK(g.generic.size() == 3);
  CHECK(g.perN.size() == 9);
  CHECK_THROWS_AS(genericPoints(DiscreteMeasure::uniform(3), cycle.metric(), cycle.maps, cycle.testFunctions, 0.0,
                                1, 4),
                  InvalidArgument);

  brute::Rng rng(0x67656e65);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t size = 2 + rng.below(7);
    const auto s = brute::randomLine(rng, size, 1 + rng.below(2), trial % 2 == 0);
    const bridge::Lib lib(s);
    const auto family = anchorFamily(lib.space, {0, static_cast<Point>(size / 2)});
    const DiscreteMeasure mu(randomWeights(rng, size, false));
    const double radius = rng.range(0.05, 1.0);
    const std::size_t nMax = 2 + rng.below(10);
    const std::size_t m = 1 + rng.below(nMax);
    const auto got = genericPoints(mu, lib.space, lib.maps, family, radius, m, nMax);
    std::vector<Point> generic;
    for (std::size_t x = 0; x < size; ++x) {
      bool all = true;
      for (std::size_t n = 1; n <= nMax; ++n) {
        std::vector<double> gamma(size, 0.0);
        for (std::size_t i = 0; i < n; ++i) gamma[s.iterate(i, x)] += 1.0 / static_cast<double>(n);
        double dist = 0.0;
        for (const auto& f : family.functions) {
          double a = 0.0, b = 0.0;
          for (std::size_t y = 0; y < size; ++y) {
            a += gamma[y] * f[y];
            b += mu(static_cast<Point>(y)) * f[y];
          }
          dist = std::max(dist, std::abs(a - b));
        }
        const bool in = dist <= radius + 1e-12;
        CHECK(got.perN[n - 1].contains(static_cast<Point>(x)) == in);
        if (n >= m) all = all && in;
      }
      if (all) generic.push_back(static_cast<Point>(x));
    }
    CHECK(got.generic == PointSet(lib.space, generic));
  }
}

TEST_CASE("generic packing bound") {
  const System point = builtinSystem({{"family", "single-point"}, {"phi", 0.3}});
  const CoverEngine pe(point.metric(), point.maps, point.potential, 12);
  GenericBoundConfig gc;
  const auto r = packingBoundOnGeneric(DiscreteMeasure::dirac(1, 0), pe, point.testFunctions, gc);
  CHECK(r.status == "pass");
  CHECK(r.left == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(r.right == doctest::Approx(0.3).epsilon(1e-6));

  const System cycle = builtinSystem({{"family", "n-cycle"}, {"n", 3}});
  const CoverEngine ce(cycle.metric(), cycle.maps, Potential::zero(3), 32);
  gc.m = 3;
  gc.nMax = 32;
  gc.N = 24;
  gc.Nmax = 32;
  const auto c = packingBoundOnGeneric(DiscreteMeasure::uniform(3), ce, cycle.testFunctions, gc);
  CHECK(c.status == "pass");
  CHECK(c.genericSize == 3);

  // A tiny radius around a skewed measure leaves nothing generic.
  gc.radius = 1e-6;
  const auto v = packingBoundOnGeneric(DiscreteMeasure({0.9, 0.05, 0.05}), ce, cycle.testFunctions, gc);
  CHECK(v.status == "vacuous");
}

TEST_CASE("uniform limit") {
  const System rotation = builtinSystem({{"family", "circle-grid"}, {"q", 12}, {"maps", "rotation"}});
  const auto constant = uniformLimitCheck(DiscreteMeasure::uniform(12), rotation.metric(), rotation.maps,
                                          rotation.maps.map(1), rotation.testFunctions, 8);
  CHECK(constant.pass);
  CHECK(constant.limitDefect <= 1e-12);
  for (double d : constant.tailDistances) CHECK(d == 0.0);

  const System snapped = builtinSystem({{"family", "uniform-limit"}, {"q", 12}});
  REQUIRE(snapped.limitMap.has_value());
  const auto u = uniformLimitCheck(DiscreteMeasure::uniform(12), snapped.metric(), snapped.maps, *snapped.limitMap,
                                   snapped.testFunctions, 8);
  CHECK(u.pass);
  CHECK(u.limitDefect <= 1e-12);
  const auto d = uniformLimitCheck(DiscreteMeasure::dirac(12, 0), snapped.metric(), snapped.maps,
                                   *snapped.limitMap, snapped.testFunctions, 8);
  CHECK(d.pass);
  CHECK(d.limitDefect > 0.0);
  CHECK(d.sequenceDefect > 0.0);
  CHECK(d.tail == std::vector<std::size_t>{5, 6, 7, 8});
  // Direct recomputation of the tail distances.
  for (std::size_t i = 0; i < d.tail.size(); ++i) {
    double sup = 0.0;
    for (Point x = 0; x < 12; ++x) {
      sup = std::max(sup, snapped.metric()(snapped.maps.apply(d.tail[i], x), (*snapped.limitMap)[x]));
    }
    CHECK(d.tailDistances[i] == doctest::Approx(sup).epsilon(1e-14));
  }
}
