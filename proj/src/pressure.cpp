#include "ndsp/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ndsp/error.hpp"
#include "ndsp/parallel.hpp"

namespace ndsp {

namespace {

constexpr int kMaxExpansions = 60;

void checkSchedules(const std::vector<double>& eps, const std::vector<std::size_t>& ns) {
  if (eps.empty()) throw InvalidArgument("epsSchedule must be nonempty");
  if (ns.empty()) throw InvalidArgument("nSchedule must be nonempty");
  for (double e : eps) {
    if (!(e > 0.0)) throw InvalidArgument("epsSchedule entries must be positive");
  }
  for (std::size_t i = 1; i < eps.size(); ++i) {
    if (!(eps[i] < eps[i - 1])) throw InvalidArgument("epsSchedule must be strictly descending");
  }
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] == 0) throw InvalidArgument("nSchedule entries must be >= 1");
    if (i > 0 && ns[i] <= ns[i - 1]) throw InvalidArgument("nSchedule must be strictly ascending");
  }
}

std::size_t smallestEpsIndex(const std::vector<double>& eps) {
  return static_cast<std::size_t>(std::min_element(eps.begin(), eps.end()) - eps.begin());
}

// log(H(d)) with H(d) <= 1 + ln d, the greedy set-cover ratio.
double coverAllowance(const CoverPool& pool) {
  std::size_t largest = 1;
  for (const auto& c : pool.candidates) largest = std::max(largest, c.covers.size());
  return std::log(1.0 + std::log(static_cast<double>(largest)));
}

// log(Delta + 1) for the maximum conflict degree Delta among packing groups.
double packingAllowance(const PackingPool& pool, std::size_t spaceSize) {
  std::vector<std::vector<std::uint32_t>> groupsAt(spaceSize);
  for (std::size_t g = 0; g < pool.groups.size(); ++g) {
    for (Point y : *pool.groups[g].ball) groupsAt[y].push_back(static_cast<std::uint32_t>(g));
  }
  std::vector<std::size_t> stamp(pool.groups.size(), pool.groups.size());
  std::size_t delta = 0;
  for (std::size_t g = 0; g < pool.groups.size(); ++g) {
    std::size_t degree = 0;
    for (Point y : *pool.groups[g].ball) {
      for (auto h : groupsAt[y]) {
        if (h != g && stamp[h] != g) {
          stamp[h] = g;
          ++degree;
        }
      }
    }
    delta = std::max(delta, degree);
  }
  return std::log(static_cast<double>(delta) + 1.0);
}

double separatedAllowance(const CoverEngine& engine, const PointSet& K, std::size_t n, double eps) {
  const auto& layer = engine.geometry().layer(eps, true, n);
  std::size_t delta = 0;
  for (Point x : K) {
    std::size_t degree = 0;
    for (Point y : layer.of(x)) degree += (y != x && K.contains(y)) ? 1 : 0;
    delta = std::max(delta, degree);
  }
  return std::log(static_cast<double>(delta) + 1.0);
}

// Fills perEps and value from the rows using the tail surrogate.
void summarize(PressureEstimate& est, bool useMax) {
  const std::size_t tail = tailStart(est.nSchedule.size());
  est.perEps.assign(est.epsSchedule.size(), 0.0);
  for (std::size_t e = 0; e < est.epsSchedule.size(); ++e) {
    double v = useMax ? -std::numeric_limits<double>::infinity()
                      : std::numeric_limits<double>::infinity();
    for (std::size_t k = tail; k < est.nSchedule.size(); ++k) {
      const double r = est.perScaleTable[e * est.nSchedule.size() + k].normalized;
      v = useMax ? std::max(v, r) : std::min(v, r);
    }
    est.perEps[e] = v;
  }
  est.value = est.perEps[smallestEpsIndex(est.epsSchedule)];
}

}  // namespace

std::string toString(PressureKind kind) {
  switch (kind) {
    case PressureKind::Classical: return "classical";
    case PressureKind::Pesin: return "pesin";
    case PressureKind::Packing: return "packing";
    case PressureKind::CapacityUpper: return "capacityUpper";
    case PressureKind::CapacityLower: return "capacityLower";
  }
  return "unknown";
}

PressureKind pressureKindFromString(const std::string& name) {
  if (name == "classical") return PressureKind::Classical;
  if (name == "pesin") return PressureKind::Pesin;
  if (name == "packing") return PressureKind::Packing;
  if (name == "capacityUpper") return PressureKind::CapacityUpper;
  if (name == "capacityLower") return PressureKind::CapacityLower;
  throw InvalidArgument("unknown pressure kind '" + name + "'");
}

std::size_t tailStart(std::size_t scheduleLength) {
  return scheduleLength - (scheduleLength + 1) / 2;
}

double criticalValueLog(const std::function<double(double)>& logFunctional,
                        std::pair<double, double> bracket, double tol, double logThreshold,
                        std::pair<double, double>* finalBracket) {
  if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
  auto [lo, hi] = bracket;
  if (!(lo < hi)) throw InvalidArgument("bracket must satisfy low < high");
  double width = hi - lo;
  double fLo = logFunctional(lo);
  for (int step = 0; !(fLo >= logThreshold); ++step) {
    if (step == kMaxExpansions) {
      throw NoJumpError("functional stays below the threshold at s = " + std::to_string(lo),
                        std::exp(fLo), std::exp(logFunctional(hi)));
    }
    lo -= width;
    width *= 2.0;
    fLo = logFunctional(lo);
  }
  width = hi - lo;
  double fHi = logFunctional(hi);
  for (int step = 0; !(fHi < logThreshold); ++step) {
    if (step == kMaxExpansions) {
      throw NoJumpError("functional stays above the threshold at s = " + std::to_string(hi),
                        std::exp(fLo), std::exp(fHi));
    }
    hi += width;
    width *= 2.0;
    fHi = logFunctional(hi);
  }
  if (finalBracket) *finalBracket = {lo, hi};
  while (hi - lo > tol) {
    const double mid = lo + (hi - lo) / 2.0;
    if (mid <= lo || mid >= hi) break;
    if (logFunctional(mid) >= logThreshold) lo = mid;
    else hi = mid;
  }
  return lo + (hi - lo) / 2.0;
}

double criticalValue(const std::function<double(double)>& functional,
                     std::pair<double, double> bracket, double tol, double threshold) {
  if (!(threshold > 0.0)) throw InvalidArgument("threshold must be positive");
  return criticalValueLog([&](double s) { return std::log(functional(s)); }, bracket, tol,
                          std::log(threshold));
}

std::pair<double, double> defaultBracket(const Potential& potential, std::size_t points,
                                         std::size_t N) {
  const double norm = potential.supNorm();
  return {-norm - 1.0,
          norm + std::log(static_cast<double>(points)) / static_cast<double>(N) + 1.0};
}

PressureEstimate classicalPressure(const CoverEngine& engine, const PointSet& K,
                                   const std::vector<double>& epsSchedule,
                                   const std::vector<std::size_t>& nSchedule, ClassicalMode mode) {
  checkSchedules(epsSchedule, nSchedule);
  requireNonempty(K, "K");
  PressureEstimate est;
  est.kind = PressureKind::Classical;
  est.epsSchedule = epsSchedule;
  est.nSchedule = nSchedule;
  est.algorithm = mode == ClassicalMode::Separated
                      ? "separated: best of weighted-greedy, lexicographic and packing-center "
                        "separated sets; oracle MWIS when within budget"
                      : "spanning: open-ball fixed-length cover (greedy/oracle), centers in X";
  const std::size_t cols = nSchedule.size();
  est.perScaleTable.resize(epsSchedule.size() * cols);
  std::vector<double> allowance(est.perScaleTable.size(), 0.0);
  parallelFor(est.perScaleTable.size(), [&](std::size_t idx) {
    const double eps = epsSchedule[idx / cols];
    const std::size_t n = nSchedule[idx % cols];
    ScaleRow row{eps, n, 0.0, 0.0, false};
    if (mode == ClassicalMode::Separated) {
      const WeightedSet sep = engine.separatedSum(K, n, eps);
      row.raw = sep.logValue;
      row.exact = sep.exact;
      if (!sep.exact) allowance[idx] = separatedAllowance(engine, K, n, eps) / static_cast<double>(n);
    } else {
      const CoverPool pool = engine.coverPool(K, eps, n, n);
      const CoverSum sum = engine.coverSum(pool, 0.0);
      row.raw = sum.logValue;
      row.exact = sum.exact;
      if (!sum.exact) allowance[idx] = coverAllowance(pool) / static_cast<double>(n);
    }
    row.normalized = row.raw / static_cast<double>(n);
    est.perScaleTable[idx] = row;
  });
  est.exact = std::all_of(est.perScaleTable.begin(), est.perScaleTable.end(),
                          [](const ScaleRow& r) { return r.exact; });
  est.gapAllowance = *std::max_element(allowance.begin(), allowance.end());
  summarize(est, true);
  return est;
}

PressureEstimate capacityPressure(const CoverEngine& engine, const PointSet& K,
                                  const std::vector<double>& epsSchedule,
                                  const std::vector<std::size_t>& nSchedule, bool upper) {
  checkSchedules(epsSchedule, nSchedule);
  requireNonempty(K, "K");
  PressureEstimate est;
  est.kind = upper ? PressureKind::CapacityUpper : PressureKind::CapacityLower;
  est.epsSchedule = epsSchedule;
  est.nSchedule = nSchedule;
  est.algorithm = "fixed-length open-ball cover (greedy/oracle), centers in X; tail " +
                  std::string(upper ? "max" : "min");
  const std::size_t cols = nSchedule.size();
  est.perScaleTable.resize(epsSchedule.size() * cols);
  std::vector<double> allowance(est.perScaleTable.size(), 0.0);
  parallelFor(est.perScaleTable.size(), [&](std::size_t idx) {
    const double eps = epsSchedule[idx / cols];
    const std::size_t n = nSchedule[idx % cols];
    const CoverPool pool = engine.coverPool(K, eps, n, n);
    const CoverSum sum = engine.coverSum(pool, 0.0);
    est.perScaleTable[idx] = {eps, n, sum.logValue, sum.logValue / static_cast<double>(n),
                              sum.exact};
    if (!sum.exact) allowance[idx] = coverAllowance(pool) / static_cast<double>(n);
  });
  est.exact = std::all_of(est.perScaleTable.begin(), est.perScaleTable.end(),
                          [](const ScaleRow& r) { return r.exact; });
  est.gapAllowance = *std::max_element(allowance.begin(), allowance.end());
  summarize(est, upper);
  return est;
}

PressureEstimate pesinPressure(const CoverEngine& engine, const PointSet& K,
                               const std::vector<double>& epsSchedule, std::size_t N,
                               std::size_t Nmax, double tol) {
  if (Nmax < N) throw InvalidArgument("Nmax must be >= N");
  checkSchedules(epsSchedule, {N});
  requireNonempty(K, "K");
  PressureEstimate est;
  est.kind = PressureKind::Pesin;
  est.epsSchedule = epsSchedule;
  est.nSchedule = {N};
  est.window = std::make_pair(N, Nmax);
  est.algorithm = "critical value of the variable-length open-ball cover sum (pooled greedy, "
                  "single-length greedy, oracle when within budget), threshold 1";
  est.perScaleTable.resize(epsSchedule.size());
  est.perEps.resize(epsSchedule.size());
  std::vector<double> allowance(epsSchedule.size(), 0.0);
  std::vector<std::pair<double, double>> brackets(epsSchedule.size());
  const auto initial = defaultBracket(engine.potential(), K.size(), N);
  parallelFor(epsSchedule.size(), [&](std::size_t e) {
    const CoverPool pool = engine.coverPool(K, epsSchedule[e], N, Nmax);
    bool exact = true;
    const double crit = criticalValueLog(
        [&](double s) {
          const CoverSum sum = engine.coverSum(pool, s);
          exact = exact && sum.exact;
          return sum.logValue;
        },
        initial, tol, 0.0, &brackets[e]);
    est.perScaleTable[e] = {epsSchedule[e], N, crit, crit, exact};
    est.perEps[e] = crit;
    if (!exact) allowance[e] = coverAllowance(pool) / static_cast<double>(N);
  });
  est.sBracket = brackets[smallestEpsIndex(epsSchedule)];
  est.value = est.perEps[smallestEpsIndex(epsSchedule)];
  est.exact = std::all_of(est.perScaleTable.begin(), est.perScaleTable.end(),
                          [](const ScaleRow& r) { return r.exact; });
  est.gapAllowance = *std::max_element(allowance.begin(), allowance.end());
  return est;
}

PressureEstimate packingPressure(const CoverEngine& engine, const PointSet& K,
                                 const std::vector<double>& epsSchedule, std::size_t N,
                                 std::size_t Nmax, std::size_t parts, double tol) {
  if (Nmax < N) throw InvalidArgument("Nmax must be >= N");
  if (parts == 0) throw InvalidArgument("parts must be >= 1");
  checkSchedules(epsSchedule, {N});
  requireNonempty(K, "K");
  PressureEstimate est;
  est.kind = PressureKind::Packing;
  est.epsSchedule = epsSchedule;
  est.nSchedule = {N};
  est.window = std::make_pair(N, Nmax);
  est.algorithm = "critical value of the refined packing sum (greedy disjoint closed balls, "
                  "centers in K, oracle when within budget; partitions up to " +
                  std::to_string(parts) + " pieces), threshold 1";
  est.perScaleTable.resize(epsSchedule.size());
  est.perEps.resize(epsSchedule.size());
  std::vector<double> allowance(epsSchedule.size(), 0.0);
  std::vector<std::pair<double, double>> brackets(epsSchedule.size());
  const auto initial = defaultBracket(engine.potential(), K.size(), N);
  parallelFor(epsSchedule.size(), [&](std::size_t e) {
    const PackingPool pool = engine.packingPool(K, epsSchedule[e], N, Nmax);
    bool exact = true;
    const double crit = criticalValueLog(
        [&](double s) {
          const CoverSum sum = engine.refinedPackingSum(pool, s, parts);
          exact = exact && sum.exact;
          return sum.logValue;
        },
        initial, tol, 0.0, &brackets[e]);
    est.perScaleTable[e] = {epsSchedule[e], N, crit, crit, exact};
    est.perEps[e] = crit;
    if (!exact) {
      allowance[e] = packingAllowance(pool, engine.geometry().size()) / static_cast<double>(N);
    }
  });
  est.sBracket = brackets[smallestEpsIndex(epsSchedule)];
  est.value = est.perEps[smallestEpsIndex(epsSchedule)];
  est.exact = std::all_of(est.perScaleTable.begin(), est.perScaleTable.end(),
                          [](const ScaleRow& r) { return r.exact; });
  est.gapAllowance = *std::max_element(allowance.begin(), allowance.end());
  return est;
}

RelationshipReport relationshipReport(const CoverEngine& engine, const PointSet& K,
                                      const RelationshipConfig& config) {
  if (config.Nmax < config.N) throw InvalidArgument("Nmax must be >= N");
  std::vector<std::size_t> nSchedule;
  for (std::size_t n = config.N; n <= config.Nmax; ++n) nSchedule.push_back(n);
  RelationshipReport report;
  report.classical =
      classicalPressure(engine, K, config.epsSchedule, nSchedule, ClassicalMode::Separated);
  report.classicalSpanning =
      classicalPressure(engine, K, config.epsSchedule, nSchedule, ClassicalMode::Spanning);
  report.capacityUpper = capacityPressure(engine, K, config.epsSchedule, nSchedule, true);
  report.capacityLower = capacityPressure(engine, K, config.epsSchedule, nSchedule, false);
  report.pesin = pesinPressure(engine, K, config.epsSchedule, config.N, config.Nmax, config.tol);
  report.packing = packingPressure(engine, K, config.epsSchedule, config.N, config.Nmax,
                                   config.parts, config.tol);

  auto check = [&](const std::string& name, const PressureEstimate& lhs,
                   const PressureEstimate& rhs) {
    ChainCheck c;
    c.name = name;
    c.lhs = lhs.value;
    c.rhs = rhs.value;
    c.tolerance = config.chainTol + lhs.gapAllowance + rhs.gapAllowance;
    c.pass = c.lhs <= c.rhs + c.tolerance;
    report.checks.push_back(c);
  };
  check("P^B <= CP_lower", report.pesin, report.capacityLower);
  check("CP_lower <= CP_upper", report.capacityLower, report.capacityUpper);
  check("P^B <= P^P", report.pesin, report.packing);
  check("P^P <= P", report.packing, report.classical);
  check("P^P <= CP_upper", report.packing, report.capacityUpper);
  {
    ChainCheck c;
    c.name = "|CP_upper - P_spanning|";
    c.lhs = std::abs(report.capacityUpper.value - report.classicalSpanning.value);
    c.rhs = 0.0;
    c.tolerance = config.chainTol;
    c.pass = c.lhs <= c.tolerance;
    report.checks.push_back(c);
  }
  for (std::size_t i = 0; i < report.capacityUpper.perScaleTable.size(); ++i) {
    report.maxScaleGap =
        std::max(report.maxScaleGap, std::abs(report.capacityUpper.perScaleTable[i].normalized -
                                              report.classicalSpanning.perScaleTable[i].normalized));
  }
  {
    ChainCheck c;
    c.name = "scale-by-scale |CP_upper - P_spanning|";
    c.lhs = report.maxScaleGap;
    c.rhs = 0.0;
    c.tolerance = config.scaleTol;
    c.pass = c.lhs <= c.tolerance;
    report.checks.push_back(c);
  }
  report.pass = std::all_of(report.checks.begin(), report.checks.end(),
                            [](const ChainCheck& c) { return c.pass; });
  return report;
}

namespace {
std::size_t horizonOf(const std::vector<std::size_t>& ns) {
  if (ns.empty()) throw InvalidArgument("nSchedule must be nonempty");
  return *std::max_element(ns.begin(), ns.end());
}
}  // namespace

PressureEstimate classicalPressure(const MetricSpace& space, const MapSequence& maps,
                                   const PointSet& K, const Potential& potential,
                                   const std::vector<double>& epsSchedule,
                                   const std::vector<std::size_t>& nSchedule, ClassicalMode mode,
                                   EngineOptions options) {
  CoverEngine engine(space, maps, potential, horizonOf(nSchedule), options);
  return classicalPressure(engine, K, epsSchedule, nSchedule, mode);
}

PressureEstimate capacityPressure(const MetricSpace& space, const MapSequence& maps,
                                  const PointSet& K, const Potential& potential,
                                  const std::vector<double>& epsSchedule,
                                  const std::vector<std::size_t>& nSchedule, bool upper,
                                  EngineOptions options) {
  CoverEngine engine(space, maps, potential, horizonOf(nSchedule), options);
  return capacityPressure(engine, K, epsSchedule, nSchedule, upper);
}

PressureEstimate pesinPressure(const MetricSpace& space, const MapSequence& maps,
                               const PointSet& K, const Potential& potential,
                               const std::vector<double>& epsSchedule, std::size_t N,
                               std::size_t Nmax, double tol, EngineOptions options) {
  if (Nmax < N) throw InvalidArgument("Nmax must be >= N");
  CoverEngine engine(space, maps, potential, Nmax, options);
  return pesinPressure(engine, K, epsSchedule, N, Nmax, tol);
}

PressureEstimate packingPressure(const MetricSpace& space, const MapSequence& maps,
                                 const PointSet& K, const Potential& potential,
                                 const std::vector<double>& epsSchedule, std::size_t N,
                                 std::size_t Nmax, std::size_t parts, double tol,
                                 EngineOptions options) {
  if (Nmax < N) throw InvalidArgument("Nmax must be >= N");
  CoverEngine engine(space, maps, potential, Nmax, options);
  return packingPressure(engine, K, epsSchedule, N, Nmax, parts, tol);
}

}  // namespace ndsp
