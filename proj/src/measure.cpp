#include "ndsp/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "ndsp/error.hpp"
#include "ndsp/parallel.hpp"

namespace ndsp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlack = 1e-9;

void checkMeasureOn(const DiscreteMeasure& mu, std::size_t size) {
  if (mu.size() != size) {
    throw InvalidArgument("measure '" + mu.name() + "' has " + std::to_string(mu.size()) +
                          " weights but the space has " + std::to_string(size) + " points");
  }
}

std::size_t smallestEps(const std::vector<double>& eps) {
  return static_cast<std::size_t>(std::min_element(eps.begin(), eps.end()) - eps.begin());
}

void checkSchedules(const std::vector<double>& eps, const std::vector<std::size_t>& ns,
                    std::size_t horizon) {
  if (eps.empty() || ns.empty()) throw InvalidArgument("schedules must be nonempty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw InvalidArgument("eps must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) {
      throw InvalidArgument("epsSchedule must be strictly descending");
    }
  }
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] == 0) throw InvalidArgument("n must be >= 1");
    if (i > 0 && ns[i] <= ns[i - 1]) throw InvalidArgument("nSchedule must be strictly ascending");
  }
  if (ns.back() > horizon) {
    throw InvalidArgument("n = " + std::to_string(ns.back()) + " exceeds the engine horizon " +
                          std::to_string(horizon));
  }
}

void checkDeltas(const std::vector<double>& deltas) {
  if (deltas.empty()) throw InvalidArgument("deltaSchedule must be nonempty");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] >= 0.0 && deltas[i] < 1.0)) {
      throw InvalidArgument("delta must lie in [0, 1)");
    }
    if (i > 0 && deltas[i] > deltas[i - 1]) {
      throw InvalidArgument("deltaSchedule must be descending");
    }
  }
}

double tailMax(const std::vector<double>& row) {
  double v = -kInf;
  for (std::size_t k = tailStart(row.size()); k < row.size(); ++k) v = std::max(v, row[k]);
  return v;
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<double> weights, std::string name)
    : weights_(std::move(weights)), name_(std::move(name)) {
  if (weights_.empty()) throw InvalidArgument("measure needs at least one point");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidArgument("measure weights must be finite and nonnegative");
    }
    total += w;
  }
  if (!(total > 0.0)) throw InvalidArgument("measure has zero total mass");
  for (double& w : weights_) w /= total;
}

DiscreteMeasure DiscreteMeasure::dirac(std::size_t size, Point x) {
  if (x >= size) throw InvalidArgument("dirac point out of range");
  std::vector<double> w(size, 0.0);
  w[x] = 1.0;
  return DiscreteMeasure(std::move(w), "dirac(" + std::to_string(x) + ")");
}

DiscreteMeasure DiscreteMeasure::uniform(std::size_t size) {
  return DiscreteMeasure(std::vector<double>(size, 1.0), "uniform");
}

DiscreteMeasure DiscreteMeasure::uniformOn(const PointSet& set) {
  requireNonempty(set, "support");
  std::vector<double> w(set.parent()->size(), 0.0);
  for (Point x : set) w[x] = 1.0;
  return DiscreteMeasure(std::move(w), "uniform-on-set");
}

DiscreteMeasure DiscreteMeasure::bernoulli(const System& shift, double p) {
  if (shift.family != "cyclic-shift" || shift.alphabet != 2) {
    throw InvalidArgument("bernoulli measures need a binary cyclic shift");
  }
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("bernoulli parameter must lie in [0, 1]");
  const std::size_t size = shift.metric().size();
  std::vector<double> w(size);
  for (Point x = 0; x < size; ++x) {
    std::size_t ones = 0;
    for (std::size_t i = 0; i < shift.wordLength; ++i) ones += shiftSymbol(shift, x, i);
    w[x] = std::pow(p, static_cast<double>(ones)) *
           std::pow(1.0 - p, static_cast<double>(shift.wordLength - ones));
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "bernoulli(%g)", p);
  return DiscreteMeasure(std::move(w), buf);
}

DiscreteMeasure DiscreteMeasure::conditioned(const DiscreteMeasure& mu, const PointSet& K) {
  std::vector<double> w(mu.size(), 0.0);
  for (Point x : K) {
    if (x >= mu.size()) throw InvalidArgument("conditioning set outside the space");
    w[x] = mu(x);
  }
  if (!(mu.mass(K) > 0.0)) throw InvalidArgument("cannot condition on a null set");
  return DiscreteMeasure(std::move(w), mu.name() + "|K");
}

std::vector<Point> DiscreteMeasure::support() const {
  std::vector<Point> out;
  for (Point x = 0; x < weights_.size(); ++x) {
    if (weights_[x] > 0.0) out.push_back(x);
  }
  return out;
}

double DiscreteMeasure::mass(const PointSet& set) const {
  double m = 0.0;
  for (Point x : set) m += weights_.at(x);
  return m;
}

double DiscreteMeasure::mass(const std::vector<Point>& points) const {
  double m = 0.0;
  for (Point x : points) m += weights_.at(x);
  return m;
}

double DiscreteMeasure::integral(const std::vector<double>& g) const {
  if (g.size() != weights_.size()) throw InvalidArgument("function size mismatch");
  double v = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x) v += weights_[x] * g[x];
  return v;
}

DiscreteMeasure pushforward(const DiscreteMeasure& mu, const MapTable& map) {
  if (map.size() != mu.size()) throw InvalidArgument("map size mismatch");
  std::vector<double> w(mu.size(), 0.0);
  for (Point x = 0; x < mu.size(); ++x) {
    if (mu(x) == 0.0) continue;
    if (map[x] >= mu.size()) throw InvalidArgument("map leaves the space");
    w[map[x]] += mu(x);
  }
  return DiscreteMeasure(std::move(w), mu.name());
}

double invarianceDefect(const DiscreteMeasure& mu, const MapSequence& maps, std::size_t horizon,
                        const TestFunctionFamily& family) {
  if (horizon == 0) throw InvalidArgument("horizon must be >= 1");
  checkMeasureOn(mu, maps.spaceSize());
  std::vector<double> base(family.size());
  for (std::size_t g = 0; g < family.size(); ++g) base[g] = mu.integral(family.functions[g]);
  double defect = 0.0;
  for (std::size_t k = 1; k <= horizon; ++k) {
    const MapTable& f = maps.map(k);
    for (std::size_t g = 0; g < family.size(); ++g) {
      double v = 0.0;
      for (Point x = 0; x < mu.size(); ++x) v += mu(x) * family.functions[g][f[x]];
      defect = std::max(defect, std::abs(v - base[g]));
    }
  }
  return defect;
}

double ballMass(const DiscreteMeasure& mu, const BowenBall& ball) { return mu.mass(ball.members); }

std::optional<std::size_t> LocalPressureProfile::indexOf(Point x) const {
  auto it = std::find(samplePoints.begin(), samplePoints.end(), x);
  if (it == samplePoints.end()) return std::nullopt;
  return static_cast<std::size_t>(it - samplePoints.begin());
}

LocalPressureProfile localPressure(const DiscreteMeasure& mu, const CoverEngine& engine,
                                   const std::vector<Point>& samplePoints,
                                   const std::vector<double>& epsSchedule,
                                   const std::vector<std::size_t>& nSchedule) {
  const BowenGeometry& geo = engine.geometry();
  checkMeasureOn(mu, geo.size());
  checkSchedules(epsSchedule, nSchedule, geo.horizon());
  if (samplePoints.empty()) throw InvalidArgument("sample must be nonempty");
  for (Point x : samplePoints) {
    if (x >= geo.size()) throw InvalidArgument("sample point out of range");
  }
  LocalPressureProfile profile;
  profile.samplePoints = samplePoints;
  profile.epsSchedule = epsSchedule;
  profile.nSchedule = nSchedule;
  const std::size_t cols = nSchedule.size();
  std::vector<const BowenGeometry::Layer*> layers;
  for (double eps : epsSchedule) {
    for (std::size_t n : nSchedule) layers.push_back(&geo.layer(eps, false, n));
  }
  profile.table.assign(samplePoints.size(), std::vector<double>(layers.size()));
  parallelFor(samplePoints.size(), [&](std::size_t i) {
    const Point x = samplePoints[i];
    for (std::size_t c = 0; c < layers.size(); ++c) {
      const std::size_t n = nSchedule[c % cols];
      const double mass = mu.mass(layers[c]->of(x));
      profile.table[i][c] = mass > 0.0 ? (-std::log(mass) + engine.birkhoff(n, x)) /
                                             static_cast<double>(n)
                                       : kInf;
    }
  });
  const std::size_t e0 = smallestEps(epsSchedule);
  const std::size_t tail = tailStart(cols);
  profile.upper.resize(samplePoints.size());
  profile.lower.resize(samplePoints.size());
  for (std::size_t i = 0; i < samplePoints.size(); ++i) {
    double hi = -kInf;
    double lo = kInf;
    for (std::size_t k = tail; k < cols; ++k) {
      hi = std::max(hi, profile.value(i, e0, k));
      lo = std::min(lo, profile.value(i, e0, k));
    }
    profile.upper[i] = hi;
    profile.lower[i] = lo;
    for (double v : profile.table[i]) profile.infiniteEntries += std::isinf(v) ? 1 : 0;
  }
  return profile;
}

LocalPressureProfile localPressure(const DiscreteMeasure& mu, const MetricSpace& space,
                                   const MapSequence& maps, const Potential& potential,
                                   const std::vector<Point>& samplePoints,
                                   const std::vector<double>& epsSchedule,
                                   const std::vector<std::size_t>& nSchedule) {
  if (nSchedule.empty()) throw InvalidArgument("nSchedule must be nonempty");
  CoverEngine engine(space, maps, potential,
                     *std::max_element(nSchedule.begin(), nSchedule.end()));
  return localPressure(mu, engine, samplePoints, epsSchedule, nSchedule);
}

SetIntegral measurePressureOverSet(const DiscreteMeasure& mu, const PointSet& K,
                                   const LocalPressureProfile& profile, ProfileSide side) {
  SetIntegral out;
  for (Point x : K) {
    if (x >= mu.size()) throw InvalidArgument("K point outside the space");
    if (mu(x) == 0.0) continue;
    const auto idx = profile.indexOf(x);
    if (!idx) {
      throw InvalidArgument("profile does not cover support point " + std::to_string(x));
    }
    const double v = side == ProfileSide::Upper ? profile.upper[*idx] : profile.lower[*idx];
    if (std::isinf(v)) {
      out.warnings.push_back("infinite local pressure at point " + std::to_string(x));
    }
    out.value += mu(x) * v;
  }
  return out;
}

std::vector<std::vector<Point>> sublevelCandidates(const DiscreteMeasure& mu,
                                                   const LocalPressureProfile& profile,
                                                   double delta) {
  std::vector<Point> support = mu.support();
  std::vector<std::vector<Point>> out;
  if (delta > 0.0) {
    std::vector<std::pair<double, Point>> order;
    for (Point x : support) {
      const auto idx = profile.indexOf(x);
      if (!idx) throw InvalidArgument("profile does not cover support point " + std::to_string(x));
      order.emplace_back(profile.upper[*idx], x);
    }
    std::sort(order.begin(), order.end());
    std::vector<Point> prefix;
    double mass = 0.0;
    for (const auto& [v, x] : order) {
      prefix.push_back(x);
      mass += mu(x);
      if (mass >= 1.0 - delta - 1e-12) break;
    }
    std::sort(prefix.begin(), prefix.end());
    if (prefix != support) out.push_back(std::move(prefix));
  }
  out.push_back(std::move(support));
  return out;
}

MeasurePressureResult measureCPPressure(const DiscreteMeasure& mu, const CoverEngine& engine,
                                        PressureKind kind, const std::vector<double>& deltaSchedule,
                                        const MeasurePressureConfig& config) {
  if (kind == PressureKind::Classical) {
    throw InvalidArgument("measure pressure kinds are pesin, packing and capacity");
  }
  checkDeltas(deltaSchedule);
  const MetricSpace& space = engine.geometry().space();
  checkMeasureOn(mu, space.size());
  const LocalPressureProfile profile =
      localPressure(mu, engine, mu.support(), config.epsSchedule, config.nSchedule);

  std::map<std::vector<Point>, double> cache;
  auto estimate = [&](const std::vector<Point>& points) {
    auto it = cache.find(points);
    if (it != cache.end()) return it->second;
    const PointSet K(space, points);
    double v = 0.0;
    switch (kind) {
      case PressureKind::Pesin:
        v = pesinPressure(engine, K, config.epsSchedule, config.N, config.Nmax, config.tol).value;
        break;
      case PressureKind::Packing:
        v = packingPressure(engine, K, config.epsSchedule, config.N, config.Nmax, config.parts,
                            config.tol)
                .value;
        break;
      case PressureKind::CapacityUpper:
      case PressureKind::CapacityLower:
        v = capacityPressure(engine, K, config.epsSchedule, config.nSchedule,
                             kind == PressureKind::CapacityUpper)
                .value;
        break;
      case PressureKind::Classical:
        break;
    }
    cache.emplace(points, v);
    return v;
  };

  MeasurePressureResult result;
  result.deltaSchedule = deltaSchedule;
  for (double delta : deltaSchedule) {
    double best = kInf;
    for (const auto& points : sublevelCandidates(mu, profile, delta)) {
      const double v = estimate(points);
      best = std::min(best, v);
      result.candidates.push_back(
          {delta, points.size(), mu.mass(points), v, points.size() == profile.samplePoints.size()});
    }
    result.perDelta.push_back(best);
  }
  result.value = result.perDelta.back();
  result.fullSupportValue = estimate(mu.support());
  return result;
}

MeasurePressureResult spanningMeasurePressure(const DiscreteMeasure& mu,
                                              const CoverEngine& engine,
                                              const std::vector<double>& epsSchedule,
                                              const std::vector<std::size_t>& nSchedule,
                                              const std::vector<double>& deltaSchedule) {
  checkDeltas(deltaSchedule);
  const MetricSpace& space = engine.geometry().space();
  checkMeasureOn(mu, space.size());
  const LocalPressureProfile profile =
      localPressure(mu, engine, mu.support(), epsSchedule, nSchedule);
  const double eps = epsSchedule[smallestEps(epsSchedule)];

  std::map<std::vector<Point>, std::vector<double>> cache;
  auto rates = [&](const std::vector<Point>& points) -> const std::vector<double>& {
    auto it = cache.find(points);
    if (it != cache.end()) return it->second;
    const PointSet K(space, points);
    std::vector<double> row(nSchedule.size());
    parallelFor(nSchedule.size(), [&](std::size_t k) {
      const CoverPool pool = engine.coverPool(K, eps, nSchedule[k], nSchedule[k]);
      row[k] = engine.coverSum(pool, 0.0).logValue / static_cast<double>(nSchedule[k]);
    });
    return cache.emplace(points, std::move(row)).first->second;
  };

  MeasurePressureResult result;
  result.deltaSchedule = deltaSchedule;
  for (double delta : deltaSchedule) {
    std::vector<double> rowMin(nSchedule.size(), kInf);
    for (const auto& points : sublevelCandidates(mu, profile, delta)) {
      const auto& row = rates(points);
      for (std::size_t k = 0; k < row.size(); ++k) rowMin[k] = std::min(rowMin[k], row[k]);
      result.candidates.push_back({delta, points.size(), mu.mass(points), tailMax(row),
                                   points.size() == profile.samplePoints.size()});
    }
    result.perDelta.push_back(tailMax(rowMin));
  }
  result.value = result.perDelta.back();
  result.fullSupportValue = tailMax(rates(mu.support()));
  return result;
}

DistributionReport distributionPrincipleCheck(const std::vector<DiscreteMeasure>& muSequence,
                                              const CoverEngine& engine, const PointSet& K,
                                              double s, double eps, double bigK,
                                              const std::vector<std::size_t>& nSchedule,
                                              double tolerance) {
  if (muSequence.empty()) throw InvalidArgument("measure sequence must be nonempty");
  if (!(bigK > 0.0)) throw InvalidArgument("K constant must be positive");
  requireNonempty(K, "K");
  const BowenGeometry& geo = engine.geometry();
  checkSchedules({eps}, nSchedule, geo.horizon());
  for (const auto& mu : muSequence) checkMeasureOn(mu, geo.size());

  DistributionReport report;
  report.s = s;
  report.tolerance = tolerance;
  report.tailStart = tailStart(muSequence.size());
  report.hypothesis1 = std::all_of(muSequence.begin(), muSequence.end(),
                                   [&](const DiscreteMeasure& mu) { return mu.mass(K) > 0.0; });
  if (!report.hypothesis1) {
    report.status = "hypothesis-1";
    return report;
  }
  report.hypothesis2 = true;
  for (std::size_t n : nSchedule) {
    const auto& layer = geo.layer(eps, false, n);
    std::vector<double> ballMassTail(layer.balls.size(), -1.0);
    for (Point x = 0; x < geo.size() && report.hypothesis2; ++x) {
      const auto& ball = layer.of(x);
      if (!std::any_of(ball.begin(), ball.end(), [&](Point y) { return K.contains(y); })) continue;
      double& m = ballMassTail[layer.ballOf[x]];
      if (m < 0.0) {
        m = 0.0;
        for (std::size_t k = report.tailStart; k < muSequence.size(); ++k) {
          m = std::max(m, muSequence[k].mass(ball));
        }
      }
      const double bound =
          bigK * std::exp(-static_cast<double>(n) * s + engine.birkhoff(n, x));
      if (m > bound * (1.0 + kSlack)) {
        report.hypothesis2 = false;
        report.witness = BallWitness{x, n, eps, m, bound};
      }
    }
    if (!report.hypothesis2) break;
  }
  if (!report.hypothesis2) {
    report.status = "hypothesis-2";
    return report;
  }
  report.limitPositive = muSequence.back().mass(K) > 0.0;
  if (!report.limitPositive) {
    report.status = "limit";
    return report;
  }
  const PressureEstimate pesin =
      pesinPressure(engine, K, {eps}, nSchedule.front(), nSchedule.back());
  report.pesin = pesin.value;
  report.conclusion = pesin.value >= s - tolerance - pesin.gapAllowance;
  report.status = report.conclusion ? "pass" : "conclusion";
  return report;
}

BillingsleyReport billingsleyBound(const DiscreteMeasure& mu, const CoverEngine& engine,
                                   const PointSet& K, double s,
                                   const LocalPressureProfile& profile,
                                   BillingsleyDirection direction,
                                   const MeasurePressureConfig& config, double tolerance) {
  requireNonempty(K, "K");
  checkMeasureOn(mu, engine.geometry().size());
  BillingsleyReport report;
  report.direction = direction;
  report.s = s;
  report.tolerance = tolerance;
  report.massK = mu.mass(K);
  for (Point x : K) {
    const auto idx = profile.indexOf(x);
    if (!idx) throw InvalidArgument("profile does not cover K point " + std::to_string(x));
    const double v = profile.upper[*idx];
    const bool ok = direction == BillingsleyDirection::UpperLE ? v <= s + kSlack : v >= s - kSlack;
    if (!ok) report.witnesses.push_back(x);
  }
  report.hypothesis = report.witnesses.empty() &&
                      (direction == BillingsleyDirection::UpperLE || report.massK > 0.0);
  if (!report.hypothesis) {
    report.status = "hypothesis";
    return report;
  }
  const PressureEstimate packing = packingPressure(engine, K, config.epsSchedule, config.N,
                                                   config.Nmax, config.parts, config.tol);
  report.packing = packing.value;
  report.conclusion = direction == BillingsleyDirection::UpperLE
                          ? packing.value <= s + tolerance + packing.gapAllowance
                          : packing.value >= s - tolerance - packing.gapAllowance;
  report.status = report.conclusion ? "pass" : "conclusion";
  return report;
}

VariationalReport variationalGap(const CoverEngine& engine, const PointSet& K,
                                 const std::vector<DiscreteMeasure>& family,
                                 const std::vector<std::size_t>& profileNs,
                                 const MeasurePressureConfig& config, double tolerance) {
  requireNonempty(K, "K");
  if (family.empty()) throw InvalidArgument("measure family must be nonempty");
  const MetricSpace& space = engine.geometry().space();
  for (const auto& mu : family) {
    checkMeasureOn(mu, space.size());
    if (mu.mass(K) < 1.0 - 1e-12) {
      throw InvalidArgument("measure '" + mu.name() + "' does not give full mass to K");
    }
  }
  VariationalReport report;
  report.tolerance = tolerance;
  const PressureEstimate packingK = packingPressure(engine, K, config.epsSchedule, config.N,
                                                    config.Nmax, config.parts, config.tol);
  report.packing = packingK.value;
  report.precondition = packingK.value >= engine.potential().supNorm() - kSlack;

  std::map<std::vector<Point>, double> cache;
  report.entries.resize(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) {
    const DiscreteMeasure& mu = family[i];
    const std::vector<Point> support = mu.support();
    const LocalPressureProfile profile =
        localPressure(mu, engine, support, config.epsSchedule, profileNs);
    auto it = cache.find(support);
    if (it == cache.end()) {
      const double v = packingPressure(engine, PointSet(space, support), config.epsSchedule,
                                       config.N, config.Nmax, config.parts, config.tol)
                           .value;
      it = cache.emplace(support, v).first;
    }
    report.entries[i] = {mu.name(),
                         measurePressureOverSet(mu, K, profile, ProfileSide::Upper).value,
                         it->second};
  }
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (i == 0 || report.entries[i].upperOverSet > report.supUpper) {
      report.supUpper = report.entries[i].upperOverSet;
      report.argmaxUpper = i;
    }
    if (i == 0 || report.entries[i].measurePacking > report.supMeasurePacking) {
      report.supMeasurePacking = report.entries[i].measurePacking;
      report.argmaxMeasurePacking = i;
    }
  }
  report.gapUpper = report.packing - report.supUpper;
  report.gapMeasurePacking = report.packing - report.supMeasurePacking;
  report.pass = report.supUpper <= report.packing + tolerance + packingK.gapAllowance;
  return report;
}

DiscreteMeasure empiricalMeasure(const MetricSpace& space, const MapSequence& maps, Point x,
                                 std::size_t n) {
  if (n == 0) throw InvalidArgument("n must be >= 1");
  if (!space.contains(x)) throw InvalidArgument("point out of range");
  std::vector<double> w(space.size(), 0.0);
  Point y = x;
  for (std::size_t j = 0; j < n; ++j) {
    w[y] += 1.0;
    if (j + 1 < n) y = maps.apply(j + 1, y);
  }
  return DiscreteMeasure(std::move(w), "empirical(" + std::to_string(x) + "," +
                                           std::to_string(n) + ")");
}

double familySeminorm(const DiscreteMeasure& nu, const DiscreteMeasure& mu,
                      const TestFunctionFamily& family) {
  double v = 0.0;
  for (const auto& g : family.functions) v = std::max(v, std::abs(nu.integral(g) - mu.integral(g)));
  return v;
}

GenericPoints genericPoints(const DiscreteMeasure& mu, const MetricSpace& space,
                            const MapSequence& maps, const TestFunctionFamily& family,
                            double radius, std::size_t m, std::size_t nMax) {
  if (!(radius > 0.0)) throw InvalidArgument("radius must be positive");
  if (m == 0 || m > nMax) throw InvalidArgument("need 1 <= m <= nMax");
  checkMeasureOn(mu, space.size());
  std::vector<double> target(family.size());
  for (std::size_t g = 0; g < family.size(); ++g) target[g] = mu.integral(family.functions[g]);

  std::vector<std::vector<char>> inF(nMax, std::vector<char>(space.size(), 0));
  parallelFor(space.size(), [&](std::size_t xi) {
    const Point x = static_cast<Point>(xi);
    std::vector<double> sums(family.size(), 0.0);
    Point y = x;
    for (std::size_t n = 1; n <= nMax; ++n) {
      double dist = 0.0;
      for (std::size_t g = 0; g < family.size(); ++g) {
        sums[g] += family.functions[g][y];
        dist = std::max(dist, std::abs(sums[g] / static_cast<double>(n) - target[g]));
      }
      inF[n - 1][x] = dist <= radius + 1e-12;
      if (n < nMax) y = maps.apply(n, y);
    }
  });
  GenericPoints out;
  std::vector<Point> generic;
  for (Point x = 0; x < space.size(); ++x) {
    bool all = true;
    for (std::size_t n = m; n <= nMax && all; ++n) all = inF[n - 1][x];
    if (all) generic.push_back(x);
  }
  out.generic = PointSet(space, std::move(generic));
  for (std::size_t n = 1; n <= nMax; ++n) {
    std::vector<Point> pts;
    for (Point x = 0; x < space.size(); ++x) {
      if (inF[n - 1][x]) pts.push_back(x);
    }
    out.perN.emplace_back(space, std::move(pts));
  }
  return out;
}

GenericBoundReport packingBoundOnGeneric(const DiscreteMeasure& mu, const CoverEngine& engine,
                                         const TestFunctionFamily& family,
                                         const GenericBoundConfig& config) {
  const BowenGeometry& geo = engine.geometry();
  const GenericPoints gp =
      genericPoints(mu, geo.space(), geo.maps(), family, config.radius, config.m, config.nMax);
  GenericBoundReport report;
  report.tolerance = config.tolerance;
  report.genericSize = gp.generic.size();
  if (gp.generic.empty()) {
    report.status = "vacuous";
    return report;
  }
  if (config.nMax > geo.horizon()) throw InvalidArgument("nMax exceeds the engine horizon");
  const PressureEstimate left = packingPressure(engine, gp.generic, {config.eps}, config.N,
                                                config.Nmax, config.parts, config.tol);
  report.left = left.value;
  report.rightPerN.resize(config.nMax - config.m + 1, -kInf);
  parallelFor(report.rightPerN.size(), [&](std::size_t i) {
    const std::size_t n = config.m + i;
    const PointSet& X = gp.perN[n - 1];
    if (X.empty()) return;
    report.rightPerN[i] = engine.separatedSum(X, n, config.eps).logValue / static_cast<double>(n);
  });
  report.right = tailMax(report.rightPerN);
  report.status =
      report.left <= report.right + config.tolerance + left.gapAllowance ? "pass" : "fail";
  return report;
}

PointSet nonWanderingSet(const MetricSpace& space, const MapSequence& maps, std::size_t kMax,
                         double radius) {
  if (kMax == 0) throw InvalidArgument("kMax must be >= 1");
  if (!(radius > 0.0)) throw InvalidArgument("radius must be positive");
  std::vector<char> keep(space.size(), 0);
  parallelFor(space.size(), [&](std::size_t xi) {
    const Point x = static_cast<Point>(xi);
    std::vector<char> inU(space.size(), 0);
    std::vector<Point> U;
    for (Point y = 0; y < space.size(); ++y) {
      if (space(x, y) < radius) {
        inU[y] = 1;
        U.push_back(y);
      }
    }
    std::vector<char> seen(space.size(), 0);
    for (std::size_t n = 1; n <= kMax; ++n) {
      std::vector<Point> image = U;
      for (std::size_t k = 1; k <= kMax; ++k) {
        const MapTable& f = maps.map(n + k - 1);
        std::vector<Point> next;
        for (Point y : image) {
          const Point z = f[y];
          if (inU[z]) {
            keep[x] = 1;
            return;
          }
          if (!seen[z]) {
            seen[z] = 1;
            next.push_back(z);
          }
        }
        for (Point z : next) seen[z] = 0;
        image = std::move(next);
      }
    }
  });
  std::vector<Point> out;
  for (Point x = 0; x < space.size(); ++x) {
    if (keep[x]) out.push_back(x);
  }
  return PointSet(space, std::move(out));
}

UniformLimitReport uniformLimitCheck(const DiscreteMeasure& mu, const MetricSpace& space,
                                     const MapSequence& maps, const MapTable& limitMap,
                                     const TestFunctionFamily& family, std::size_t horizon) {
  if (horizon == 0) throw InvalidArgument("horizon must be >= 1");
  if (limitMap.size() != space.size()) throw InvalidArgument("limit map size mismatch");
  checkMeasureOn(mu, space.size());
  UniformLimitReport report;
  double maxDist = 0.0;
  for (std::size_t n = tailStart(horizon) + 1; n <= horizon; ++n) {
    const MapTable& f = maps.map(n);
    double d = 0.0;
    for (Point x = 0; x < space.size(); ++x) d = std::max(d, space(f[x], limitMap[x]));
    report.tail.push_back(n);
    report.tailDistances.push_back(d);
    maxDist = std::max(maxDist, d);
  }
  report.sequenceDefect = invarianceDefect(mu, maps, horizon, family);
  report.limitDefect = familySeminorm(pushforward(mu, limitMap), mu, family);
  report.bound = family.maxLipschitz() * maxDist + report.sequenceDefect;
  report.pass = report.limitDefect <= report.bound + 1e-12;
  return report;
}

}  // namespace ndsp
