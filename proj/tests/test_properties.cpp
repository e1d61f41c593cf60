#include "doctest.h"

#include <cmath>
#include <functional>
#include <string>

#include "bridge.hpp"
#include "ndsp/pressure.hpp"

using namespace ndsp;

namespace {

std::vector<std::size_t> range(std::size_t a, std::size_t b) {
  std::vector<std::size_t> v;
  for (std::size_t n = a; n <= b; ++n) v.push_back(n);
  return v;
}

using Estimator = std::function<double(const CoverEngine&, const PointSet&)>;

struct Named {
  std::string name;
  Estimator run;
  bool convex;
};

std::vector<Named> estimators(double eps) {
  const std::vector<double> e{eps};
  const auto ns = range(4, 8);
  return {
      {"classical", [=](const CoverEngine& g, const PointSet& K) {
         return classicalPressure(g, K, e, ns, ClassicalMode::Separated).value;
       }, true},
      {"pesin", [=](const CoverEngine& g, const PointSet& K) { return pesinPressure(g, K, e, 4, 8).value; },
       false},
      {"packing", [=](const CoverEngine& g, const PointSet& K) {
         return packingPressure(g, K, e, 4, 8).value;
       }, true},
      {"capacityUpper", [=](const CoverEngine& g, const PointSet& K) {
         return capacityPressure(g, K, e, ns, true).value;
       }, true},
      {"capacityLower", [=](const CoverEngine& g, const PointSet& K) {
         return capacityPressure(g, K, e, ns, false).value;
       }, false},  // tail min over n of convex functions
  };
}

Potential randomPotential(brute::Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.range(-1.0, 1.0);
  return Potential(v);
}

double supDistance(const Potential& a, const Potential& b) {
  double m = 0.0;
  for (std::size_t x = 0; x < a.size(); ++x) m = std::max(m, std::abs(a.values()[x] - b.values()[x]));
  return m;
}

const double kTol = 1e-8;

}  // namespace

// Points at least 0.1 apart with eps = 0.1 make every open Bowen ball a
// singleton; there all five estimators obey the pressure laws up to the
// bisection tolerance. Convexity is only checked where the window value is a
// max or a plain log-sum of convex functions of phi.
TEST_CASE("pressure laws in the singleton regime") {
  brute::Rng rng(0x6c617773);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t size = 3 + rng.below(5);
    auto s = brute::randomLine(rng, size, 1 + rng.below(3), trial % 2 == 1);
    const bridge::Lib lib(s);
    const PointSet K = lib.all();
    const Potential phi = randomPotential(rng, size);
    const Potential psi = randomPotential(rng, size);
    auto eval = [&](const Estimator& est, const Potential& pot) {
      const CoverEngine engine(lib.space, lib.maps, pot, 8);
      return est(engine, K);
    };
    for (const auto& [name, est, convex] : estimators(0.1)) {
      CAPTURE(trial);
      CAPTURE(name);
      const double p = eval(est, phi);
      const double q = eval(est, psi);
      for (double c : {0.7, -0.4, 2.5}) CHECK(std::abs(eval(est, phi.plus(c)) - (p + c)) <= 2 * kTol + 1e-12);
      CHECK(p <= eval(est, phi.plus(0.01)) + 2 * kTol);
      CHECK(std::abs(p - q) <= supDistance(phi, psi) + 2 * kTol);
      CHECK(eval(est, phi + psi) <= p + q + 3 * kTol);
      CHECK(eval(est, phi.scaled(2.0)) <= 2.0 * p + 2 * kTol);
      CHECK(eval(est, phi.scaled(0.5)) >= 0.5 * p - 2 * kTol);
      if (!convex) continue;
      for (double t : {0.25, 0.5, 0.75}) {
        CHECK(eval(est, Potential::mix(t, phi, psi)) <= t * p + (1 - t) * q + 2 * kTol);
      }
      CHECK(std::abs(p) <= eval(est, phi.absolute()) + 2 * kTol);
    }
  }
}

// Translation, monotonicity and the Lipschitz bound survive arbitrary scales.
TEST_CASE("pressure laws at arbitrary scales") {
  brute::Rng rng(0x7363616c);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t size = 3 + rng.below(6);
    auto s = brute::randomLine(rng, size, 1 + rng.below(3), trial % 3 == 0);
    const bridge::Lib lib(s);
    const PointSet K = lib.all();
    const Potential phi = randomPotential(rng, size);
    const Potential psi = randomPotential(rng, size);
    std::vector<double> bump(size);
    for (auto& v : bump) v = rng.range(0.0, 0.5);
    const Potential above = phi + Potential(bump);
    const double eps = rng.range(0.3, 2.0);
    auto eval = [&](const Estimator& est, const Potential& pot) {
      const CoverEngine engine(lib.space, lib.maps, pot, 8);
      return est(engine, K);
    };
    for (const auto& [name, est, convex] : estimators(eps)) {
      CAPTURE(trial);
      CAPTURE(name);
      const double p = eval(est, phi);
      CHECK(std::abs(eval(est, phi.plus(-0.3)) - (p - 0.3)) <= 2 * kTol + 1e-12);
      CHECK(p <= eval(est, above) + 2 * kTol);
      CHECK(std::abs(p - eval(est, psi)) <= supDistance(phi, psi) + 2 * kTol);
    }
  }
}

// Subsets never carry more pressure than the set they sit in.
TEST_CASE("set monotonicity") {
  brute::Rng rng(0x7375627a);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t size = 4 + rng.below(5);
    auto s = brute::randomLine(rng, size, 1 + rng.below(2), false);
    const bridge::Lib lib(s);
    std::vector<std::size_t> A;
    for (std::size_t x = 0; x < size; ++x) {
      if (rng.unit() < 0.5) A.push_back(x);
    }
    if (A.empty()) A.push_back(0);
    const CoverEngine engine = lib.engine(8);
    for (const auto& [name, est, convex] : estimators(rng.range(0.2, 1.5))) {
      CAPTURE(name);
      CHECK(est(engine, lib.subset(A)) <= est(engine, lib.all()) + 2 * kTol);
    }
  }
}

// In the singleton regime the Pesin window value is the crossing of
// sum_x exp(min_n (S_n phi(x) - s n)), a min of affine functions of phi, so
// mixing two potentials can land above the chord. The brute oracle confirms
// the library value at the counterexample.
TEST_CASE("pesin window values are not convex in the potential") {
  brute::Rng rng(0x636f6e76);
  bool found = false;
  for (int trial = 0; trial < 200 && !found; ++trial) {
    const std::size_t size = 3 + rng.below(2);
    auto s = brute::randomLine(rng, size, 1, true);
    const bridge::Lib lib(s);
    const Potential phi = randomPotential(rng, size);
    const Potential psi = randomPotential(rng, size);
    const Potential mid = Potential::mix(0.5, phi, psi);
    auto pesin = [&](const Potential& pot) {
      const CoverEngine engine(lib.space, lib.maps, pot, 6);
      return pesinPressure(engine, lib.all(), {0.1}, 4, 6, 1e-10).value;
    };
    const double p = pesin(phi), q = pesin(psi), m = pesin(mid);
    if (m <= 0.5 * (p + q) + 1e-3) continue;
    found = true;
    auto s2 = s;
    s2.phi = mid.values();
    CHECK(m == doctest::Approx(brute::pesin(s2, bridge::iota(size), 0.1, 4, 6)).epsilon(1e-7));
  }
  CHECK(found);
}
