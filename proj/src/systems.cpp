#include "ndsp/systems.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <sstream>
#include <limits>

#include "ndsp/error.hpp"

namespace ndsp {

using nlohmann::json;

struct MapSequence::State {
  std::size_t spaceSize;
  Generator generator;
  std::optional<Periodicity> periodicity;
  mutable std::shared_mutex mutex;
  std::map<std::size_t, std::unique_ptr<const MapTable>> memo;

  std::size_t canonical(std::size_t j) const {
    if (!periodicity || j <= periodicity->preperiod) return j;
    const std::size_t offset = j - periodicity->preperiod - 1;
    return periodicity->preperiod + offset % periodicity->period + 1;
  }

  MapTable generateChecked(std::size_t j) const {
    MapTable table = generator(j);
    if (table.size() != spaceSize) {
      throw InvalidArgument("map f_" + std::to_string(j) + " has " + std::to_string(table.size()) +
                            " entries, expected " + std::to_string(spaceSize));
    }
    for (std::size_t x = 0; x < table.size(); ++x) {
      if (table[x] >= spaceSize) {
        throw InvalidArgument("map f_" + std::to_string(j) + " sends point " + std::to_string(x) +
                              " outside the space");
      }
    }
    return table;
  }
};

MapSequence::MapSequence(std::size_t spaceSize, Generator generator,
                         std::optional<Periodicity> periodicity)
    : state_(std::make_shared<State>()) {
  if (!generator) throw InvalidArgument("map sequence needs a generator");
  if (periodicity && periodicity->period == 0) throw InvalidArgument("period must be positive");
  state_->spaceSize = spaceSize;
  state_->generator = std::move(generator);
  state_->periodicity = periodicity;
  if (periodicity) {
    const std::size_t first = periodicity->preperiod + 1;
    for (std::size_t j = first; j < first + 3 * periodicity->period; ++j) {
      if (state_->generateChecked(j) != state_->generateChecked(j + periodicity->period)) {
        throw InvalidArgument("generator does not honor its declared period at index " +
                              std::to_string(j));
      }
    }
  }
}

MapSequence MapSequence::constant(MapTable table) {
  const std::size_t size = table.size();
  return MapSequence(size, [t = std::move(table)](std::size_t) { return t; },
                     Periodicity{0, 1});
}

MapSequence MapSequence::cycling(std::vector<MapTable> tables) {
  if (tables.empty()) throw InvalidArgument("map sequence needs at least one table");
  const std::size_t size = tables.front().size();
  const std::size_t period = tables.size();
  return MapSequence(
      size, [t = std::move(tables)](std::size_t j) { return t[(j - 1) % t.size()]; },
      Periodicity{0, period});
}

MapSequence MapSequence::identity(std::size_t spaceSize) {
  MapTable table(spaceSize);
  for (std::size_t x = 0; x < spaceSize; ++x) table[x] = static_cast<Point>(x);
  return constant(std::move(table));
}

std::size_t MapSequence::spaceSize() const noexcept { return state_->spaceSize; }

const std::optional<MapSequence::Periodicity>& MapSequence::periodicity() const noexcept {
  return state_->periodicity;
}

const MapTable& MapSequence::map(std::size_t j) const {
  if (j == 0) throw InvalidArgument("map index starts at 1");
  const std::size_t key = state_->canonical(j);
  {
    std::shared_lock lock(state_->mutex);
    auto it = state_->memo.find(key);
    if (it != state_->memo.end()) return *it->second;
  }
  auto table = std::make_unique<const MapTable>(state_->generateChecked(key));
  std::unique_lock lock(state_->mutex);
  auto [it, inserted] = state_->memo.try_emplace(key, std::move(table));
  return *it->second;
}

MapTable MapSequence::compose(std::size_t i, std::size_t j) const {
  if (i == 0) throw InvalidArgument("compose: i must be >= 1");
  MapTable result(spaceSize());
  for (std::size_t x = 0; x < result.size(); ++x) result[x] = static_cast<Point>(x);
  for (std::size_t k = 0; k < j; ++k) {
    const MapTable& f = map(i + k);
    for (auto& y : result) y = f[y];
  }
  return result;
}

Point MapSequence::composeAt(std::size_t i, std::size_t j, Point x) const {
  if (i == 0) throw InvalidArgument("compose: i must be >= 1");
  if (x >= spaceSize()) throw InvalidArgument("point outside space");
  for (std::size_t k = 0; k < j; ++k) x = map(i + k)[x];
  return x;
}

Potential::Potential(std::vector<double> values, std::string name)
    : values_(std::move(values)), name_(std::move(name)) {
  if (values_.empty()) throw InvalidArgument("potential needs at least one value");
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("potential values must be finite");
    supNorm_ = std::max(supNorm_, std::abs(v));
  }
}

Potential Potential::constant(std::size_t size, double c) {
  std::ostringstream os;
  os.precision(17);
  os << "const(" << c << ")";
  return Potential(std::vector<double>(size, c), os.str());
}

double Potential::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Potential::max() const { return *std::max_element(values_.begin(), values_.end()); }

Potential Potential::plus(double c) const {
  std::vector<double> v = values_;
  for (auto& x : v) x += c;
  return Potential(std::move(v), name_ + "+c");
}

Potential Potential::scaled(double c) const {
  std::vector<double> v = values_;
  for (auto& x : v) x *= c;
  return Potential(std::move(v), "c*" + name_);
}

Potential Potential::absolute() const {
  std::vector<double> v = values_;
  for (auto& x : v) x = std::abs(x);
  return Potential(std::move(v), "|" + name_ + "|");
}

Potential Potential::renamed(std::string name) const { return Potential(values_, std::move(name)); }

Potential Potential::mix(double t, const Potential& a, const Potential& b) {
  if (a.size() != b.size()) throw InvalidArgument("potentials live on different spaces");
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = t * a.values_[i] + (1.0 - t) * b.values_[i];
  return Potential(std::move(v), "mix");
}

Potential operator+(const Potential& a, const Potential& b) {
  if (a.size() != b.size()) throw InvalidArgument("potentials live on different spaces");
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values_[i] + b.values_[i];
  return Potential(std::move(v), a.name_ + "+" + b.name_);
}

double birkhoffSum(const Potential& potential, const MapSequence& maps, std::size_t n, Point x) {
  if (n == 0) throw InvalidArgument("birkhoffSum: n must be >= 1");
  if (x >= potential.size() || potential.size() != maps.spaceSize()) {
    throw InvalidArgument("birkhoffSum: point or potential does not match the space");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += potential(x);
    x = maps.apply(i + 1, x);
  }
  return sum;
}

double TestFunctionFamily::maxLipschitz() const {
  double best = 0.0;
  for (double l : lipschitzBounds) best = std::max(best, l);
  return best;
}

void TestFunctionFamily::validate(const MetricSpace& space) const {
  if (functions.empty()) throw InvalidArgument("test-function family is empty");
  if (lipschitzBounds.size() != functions.size() || names.size() != functions.size()) {
    throw InvalidArgument("test-function family has mismatched names/bounds");
  }
  for (std::size_t f = 0; f < functions.size(); ++f) {
    if (functions[f].size() != space.size()) {
      throw InvalidArgument("test function " + names[f] + " has the wrong length");
    }
  }
  if (space.size() > 64) return;
  for (std::size_t f = 0; f < functions.size(); ++f) {
    const auto& g = functions[f];
    for (Point x = 0; x < space.size(); ++x) {
      for (Point y = x + 1; y < space.size(); ++y) {
        if (std::abs(g[x] - g[y]) > lipschitzBounds[f] * space(x, y) * (1.0 + 1e-12)) {
          throw InvalidArgument("Lipschitz bound of " + names[f] + " fails at " +
                                std::to_string(x) + "," + std::to_string(y));
        }
      }
    }
  }
}

TestFunctionFamily anchorFamily(const MetricSpace& space, const std::vector<Point>& anchors) {
  TestFunctionFamily family;
  for (Point a : anchors) {
    std::vector<double> dist(space.size());
    double nearest = std::numeric_limits<double>::infinity();
    for (Point x = 0; x < space.size(); ++x) {
      dist[x] = space(a, x);
      if (x != a) nearest = std::min(nearest, dist[x]);
    }
    family.names.push_back("dist(" + space.label(a) + ")");
    family.functions.push_back(dist);
    family.lipschitzBounds.push_back(1.0);
    if (std::isfinite(nearest)) {
      std::vector<double> bump(space.size());
      for (Point x = 0; x < space.size(); ++x) bump[x] = std::max(0.0, 1.0 - dist[x] / nearest);
      family.names.push_back("bump(" + space.label(a) + ")");
      family.functions.push_back(std::move(bump));
      family.lipschitzBounds.push_back(1.0 / nearest);
    }
  }
  return family;
}

namespace {

std::string fieldOf(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

template <class T>
T getOr(const json& j, const std::string& key, T fallback, const std::string& prefix) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fieldOf(prefix, key), "has the wrong type");
  }
}

template <class T>
T require(const json& j, const std::string& key, const std::string& prefix) {
  if (!j.contains(key)) throw ConfigError(fieldOf(prefix, key), "is required");
  return getOr<T>(j, key, T{}, prefix);
}

std::size_t positiveSize(const json& j, const std::string& key, std::size_t fallback,
                         const std::string& prefix) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw ConfigError(fieldOf(prefix, key), "must be a positive integer");
  }
  return static_cast<std::size_t>(v.get<long long>());
}

std::vector<Point> evenAnchors(std::size_t size, std::size_t count) {
  std::vector<Point> anchors;
  if (size <= 64) {
    for (std::size_t x = 0; x < size; ++x) anchors.push_back(static_cast<Point>(x));
    return anchors;
  }
  for (std::size_t k = 0; k < count; ++k) anchors.push_back(static_cast<Point>(k * size / count));
  return anchors;
}

std::vector<std::string> letterLabels(std::size_t n) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) {
    labels.push_back(n <= 26 ? std::string(1, static_cast<char>('a' + i)) : std::to_string(i));
  }
  return labels;
}

std::shared_ptr<const MetricSpace> circleSpace(std::size_t q) {
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < q; ++k) labels.push_back(std::to_string(k) + "/" + std::to_string(q));
  return std::make_shared<const MetricSpace>(
      q,
      [q](Point x, Point y) {
        const std::size_t diff = x > y ? x - y : y - x;
        return static_cast<double>(std::min(diff, q - diff)) / static_cast<double>(q);
      },
      std::move(labels));
}

// Grid map by name: identity, doubling, tripling, rotation:<k>.
MapTable circleMap(const std::string& name, std::size_t q, const std::string& field) {
  MapTable table(q);
  std::size_t mult = 1;
  std::size_t shift = 0;
  if (name == "identity") {
  } else if (name == "doubling") {
    mult = 2;
  } else if (name == "tripling") {
    mult = 3;
  } else if (name.rfind("rotation:", 0) == 0) {
    long long k = 0;
    try {
      k = std::stoll(name.substr(9));
    } catch (const std::exception&) {
      throw ConfigError(field, "bad rotation step in '" + name + "'");
    }
    const auto mod = static_cast<long long>(q);
    shift = static_cast<std::size_t>(((k % mod) + mod) % mod);
  } else {
    throw ConfigError(field, "unknown circle map '" + name + "'");
  }
  for (std::size_t x = 0; x < q; ++x) table[x] = static_cast<Point>((mult * x + shift) % q);
  return table;
}

TestFunctionFamily circleFamily(const MetricSpace& space) {
  const std::size_t q = space.size();
  TestFunctionFamily family = anchorFamily(space, evenAnchors(q, 12));
  // cos/sin of 2 pi x have Lipschitz constant 2 pi w.r.t. the circle metric.
  std::vector<double> c(q), s(q);
  for (std::size_t k = 0; k < q; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(q);
    c[k] = std::cos(angle);
    s[k] = std::sin(angle);
  }
  family.names.push_back("cos");
  family.functions.push_back(std::move(c));
  family.lipschitzBounds.push_back(2.0 * std::numbers::pi);
  family.names.push_back("sin");
  family.functions.push_back(std::move(s));
  family.lipschitzBounds.push_back(2.0 * std::numbers::pi);
  return family;
}

void checkKeys(const json& d, std::initializer_list<const char*> allowed, const std::string& prefix) {
  for (auto it = d.begin(); it != d.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return it.key() == a; }) == allowed.end()) {
      throw ConfigError(fieldOf(prefix, it.key()), "unknown key for this system family");
    }
  }
}

System buildShift(const json& d, const std::string& prefix) {
  checkKeys(d, {"family", "L", "alphabet", "theta", "potential"}, prefix);
  const std::size_t L = positiveSize(d, "L", 0, prefix);
  if (L == 0) throw ConfigError(fieldOf(prefix, "L"), "is required");
  const std::size_t A = positiveSize(d, "alphabet", 2, prefix);
  if (A < 2) throw ConfigError(fieldOf(prefix, "alphabet"), "must be at least 2");
  const double theta = getOr<double>(d, "theta", 0.25, prefix);
  if (!(theta > 0.0 && theta < 1.0)) {
    throw ConfigError(fieldOf(prefix, "theta"), "must lie in (0,1)");
  }
  double total = 1.0;
  for (std::size_t i = 0; i < L; ++i) total *= static_cast<double>(A);
  if (total > static_cast<double>(1u << 16)) {
    throw ConfigError(fieldOf(prefix, "L"), "alphabet^L exceeds 65536 points");
  }
  const auto P = static_cast<std::size_t>(total);

  std::vector<std::size_t> power(L);
  power[L - 1] = 1;
  for (std::size_t i = L - 1; i-- > 0;) power[i] = power[i + 1] * A;
  std::vector<double> thetaPow(L);
  for (std::size_t k = 0; k < L; ++k) thetaPow[k] = std::pow(theta, static_cast<double>(k));

  std::vector<std::string> labels;
  labels.reserve(P);
  for (std::size_t x = 0; x < P; ++x) {
    std::string word;
    for (std::size_t i = 0; i < L; ++i) {
      const std::size_t s = (x / power[i]) % A;
      word += s < 10 ? static_cast<char>('0' + s) : static_cast<char>('a' + s - 10);
    }
    labels.push_back(std::move(word));
  }

  auto space = std::make_shared<const MetricSpace>(
      P,
      [power, thetaPow, A, L](Point x, Point y) {
        if (x == y) return 0.0;
        for (std::size_t i = 0; i < L; ++i) {
          if ((x / power[i]) % A != (y / power[i]) % A) return thetaPow[i];
        }
        return 0.0;
      },
      std::move(labels));

  // Left rotation: (x_0 x_1 ... x_{L-1}) -> (x_1 ... x_{L-1} x_0).
  MapTable rotate(P);
  for (std::size_t x = 0; x < P; ++x) {
    const std::size_t head = x / power[0];
    rotate[x] = static_cast<Point>((x % power[0]) * A + head);
  }

  System sys{"cyclic-shift", d, space, MapSequence::constant(std::move(rotate)),
             Potential::zero(P), {}, L, std::nullopt, L, A};

  // Cylinder indicators of length 1..3 plus distance to a few anchor words.
  TestFunctionFamily family = anchorFamily(*space, evenAnchors(P, 8));
  const std::size_t maxLen = std::min<std::size_t>(3, L);
  for (std::size_t m = 1; m <= maxLen; ++m) {
    std::size_t count = 1;
    for (std::size_t i = 0; i < m; ++i) count *= A;
    for (std::size_t w = 0; w < count; ++w) {
      std::vector<double> g(P);
      for (std::size_t x = 0; x < P; ++x) g[x] = (x / power[m - 1]) == w ? 1.0 : 0.0;
      family.names.push_back("cyl" + std::to_string(m) + ":" + std::to_string(w));
      family.functions.push_back(std::move(g));
      family.lipschitzBounds.push_back(1.0 / thetaPow[m - 1]);
    }
  }
  sys.testFunctions = std::move(family);
  if (d.contains("potential")) sys.potential = parsePotential(d["potential"], sys, fieldOf(prefix, "potential"));
  return sys;
}

System buildInline(const json& d, const std::string& prefix) {
  checkKeys(d, {"family", "points", "matrix", "labels", "maps", "limit", "potential"}, prefix);
  std::vector<std::string> labels;
  if (d.contains("labels")) labels = getOr<std::vector<std::string>>(d, "labels", {}, prefix);
  std::shared_ptr<const MetricSpace> space;
  try {
    if (d.contains("matrix")) {
      const auto rows = getOr<std::vector<std::vector<double>>>(d, "matrix", {}, prefix);
      std::vector<double> flat;
      for (const auto& row : rows) {
        if (row.size() != rows.size()) {
          throw ConfigError(fieldOf(prefix, "matrix"), "must be square");
        }
        flat.insert(flat.end(), row.begin(), row.end());
      }
      space = std::make_shared<const MetricSpace>(
          MetricSpace::fromMatrix(rows.size(), std::move(flat), labels));
    } else if (d.contains("points")) {
      const auto& pts = d.at("points");
      if (!pts.is_array() || pts.empty()) {
        throw ConfigError(fieldOf(prefix, "points"), "must be a nonempty array");
      }
      std::vector<std::vector<double>> coords;
      for (const auto& p : pts) {
        if (p.is_number()) coords.push_back({p.get<double>()});
        else if (p.is_array()) coords.push_back(p.get<std::vector<double>>());
        else throw ConfigError(fieldOf(prefix, "points"), "entries must be numbers or arrays");
      }
      auto metric = MetricSpace::euclidean(coords);
      if (!labels.empty()) {
        metric = MetricSpace(metric.size(), [m = std::make_shared<MetricSpace>(metric)](
                                                Point x, Point y) { return (*m)(x, y); },
                             labels);
      }
      space = std::make_shared<const MetricSpace>(std::move(metric));
    } else {
      throw ConfigError(fieldOf(prefix, "points"), "inline system needs points or matrix");
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(fieldOf(prefix, d.contains("matrix") ? "matrix" : "points"), e.what());
  } catch (const json::exception&) {
    throw ConfigError(fieldOf(prefix, d.contains("matrix") ? "matrix" : "points"),
                      "has the wrong type");
  }
  const std::size_t P = space->size();
  auto readTable = [&](const json& t, const std::string& field) {
    if (!t.is_array() || t.size() != P) {
      throw ConfigError(field, "map table must list one image per point");
    }
    MapTable table;
    for (const auto& v : t) {
      if (!v.is_number_integer() || v.get<long long>() < 0 ||
          static_cast<std::size_t>(v.get<long long>()) >= P) {
        throw ConfigError(field, "map image outside the space");
      }
      table.push_back(static_cast<Point>(v.get<long long>()));
    }
    return table;
  };
  std::vector<MapTable> tables;
  if (!d.contains("maps")) {
    tables.push_back(MapSequence::identity(P).map(1));
  } else {
    const auto& maps = d.at("maps");
    if (!maps.is_array() || maps.empty()) {
      throw ConfigError(fieldOf(prefix, "maps"), "must be a nonempty list of map tables");
    }
    for (std::size_t i = 0; i < maps.size(); ++i) {
      tables.push_back(readTable(maps[i], fieldOf(prefix, "maps") + "[" + std::to_string(i) + "]"));
    }
  }
  System sys{"inline", d, space, MapSequence::cycling(tables), Potential::zero(P),
             anchorFamily(*space, evenAnchors(P, 16)), std::nullopt, std::nullopt, 0, 0};
  if (d.contains("limit")) sys.limitMap = readTable(d.at("limit"), fieldOf(prefix, "limit"));
  if (d.contains("potential")) sys.potential = parsePotential(d["potential"], sys, fieldOf(prefix, "potential"));
  return sys;
}

}  // namespace

System builtinSystem(const json& d, const std::string& prefix) {
  if (!d.is_object()) throw ConfigError(prefix, "system descriptor must be an object");
  const auto family = require<std::string>(d, "family", prefix);
  std::optional<System> sys;
  if (family == "single-point") {
    checkKeys(d, {"family", "phi", "potential"}, prefix);
    auto space = std::make_shared<const MetricSpace>(
        1, [](Point, Point) { return 0.0; }, std::vector<std::string>{"p"});
    TestFunctionFamily fam{{"one"}, {{1.0}}, {0.0}};
    sys = System{family, d, space, MapSequence::identity(1),
                 Potential::constant(1, getOr<double>(d, "phi", 0.0, prefix)), fam,
                 std::nullopt, std::nullopt, 0, 0};
  } else if (family == "two-point") {
    checkKeys(d, {"family", "map", "phi", "potential"}, prefix);
    const auto mapName = getOr<std::string>(d, "map", "identity", prefix);
    MapTable table;
    if (mapName == "identity") table = {0, 1};
    else if (mapName == "collapse") table = {1, 1};
    else throw ConfigError(fieldOf(prefix, "map"), "must be 'identity' or 'collapse'");
    auto space = std::make_shared<const MetricSpace>(
        2, [](Point x, Point y) { return x == y ? 0.0 : 1.0; }, letterLabels(2));
    sys = System{family, d, space, MapSequence::constant(table),
                 Potential::constant(2, getOr<double>(d, "phi", 0.0, prefix)),
                 anchorFamily(*space, {0, 1}), std::nullopt, std::nullopt, 0, 0};
  } else if (family == "n-cycle") {
    checkKeys(d, {"family", "n", "phi", "potential"}, prefix);
    const std::size_t n = positiveSize(d, "n", 3, prefix);
    MapTable table(n);
    for (std::size_t x = 0; x < n; ++x) table[x] = static_cast<Point>((x + 1) % n);
    auto space = std::make_shared<const MetricSpace>(
        n, [](Point x, Point y) { return x == y ? 0.0 : 1.0; }, letterLabels(n));
    sys = System{family, d, space, MapSequence::constant(table),
                 Potential::constant(n, getOr<double>(d, "phi", 0.0, prefix)),
                 anchorFamily(*space, evenAnchors(n, 16)), std::nullopt, std::nullopt, 0, 0};
  } else if (family == "cyclic-shift") {
    return buildShift(d, prefix);
  } else if (family == "circle-grid" || family == "switching" || family == "uniform-limit") {
    checkKeys(d, {"family", "q", "maps", "steps", "g", "h", "schedule", "step", "potential"},
              prefix);
    const std::size_t q = positiveSize(d, "q", 0, prefix);
    if (q == 0) throw ConfigError(fieldOf(prefix, "q"), "is required");
    if (q > (1u << 16)) throw ConfigError(fieldOf(prefix, "q"), "exceeds 65536 points");
    auto space = circleSpace(q);
    std::optional<MapTable> limit;
    MapSequence maps = MapSequence::identity(q);
    if (family == "circle-grid") {
      const auto kind = getOr<std::string>(d, "maps", "rotation", prefix);
      if (kind == "doubling-tripling") {
        if (q % 6 != 0) throw ConfigError(fieldOf(prefix, "q"), "must be divisible by 6");
        maps = MapSequence::cycling({circleMap("doubling", q, prefix), circleMap("tripling", q, prefix)});
      } else if (kind == "rotation") {
        const auto steps = getOr<std::vector<long long>>(d, "steps", {1}, prefix);
        if (steps.empty()) throw ConfigError(fieldOf(prefix, "steps"), "must be nonempty");
        std::vector<MapTable> tables;
        for (long long k : steps) {
          tables.push_back(circleMap("rotation:" + std::to_string(k), q, fieldOf(prefix, "steps")));
        }
        maps = MapSequence::cycling(std::move(tables));
      } else {
        throw ConfigError(fieldOf(prefix, "maps"), "must be 'rotation' or 'doubling-tripling'");
      }
    } else if (family == "switching") {
      const auto g = circleMap(require<std::string>(d, "g", prefix), q, fieldOf(prefix, "g"));
      const auto h = circleMap(require<std::string>(d, "h", prefix), q, fieldOf(prefix, "h"));
      const auto schedule =
          getOr<std::vector<std::string>>(d, "schedule", {"g", "h"}, prefix);
      if (schedule.empty()) throw ConfigError(fieldOf(prefix, "schedule"), "must be nonempty");
      std::vector<MapTable> tables;
      for (const auto& s : schedule) {
        if (s == "g") tables.push_back(g);
        else if (s == "h") tables.push_back(h);
        else throw ConfigError(fieldOf(prefix, "schedule"), "entries must be 'g' or 'h'");
      }
      maps = MapSequence::cycling(std::move(tables));
    } else {
      // Rotation by alpha_n = (step/q)(1 + 2^-n), snapped to the grid (ties up).
      const auto step = getOr<long long>(d, "step", 1, prefix);
      const auto mod = static_cast<long long>(q);
      maps = MapSequence(q, [step, mod](std::size_t n) {
        const double exact = static_cast<double>(step) * (1.0 + std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(n, 1000))));
        const auto snapped = static_cast<long long>(std::floor(exact + 0.5));
        const long long s = ((snapped % mod) + mod) % mod;
        MapTable t(static_cast<std::size_t>(mod));
        for (long long x = 0; x < mod; ++x) t[static_cast<std::size_t>(x)] = static_cast<Point>((x + s) % mod);
        return t;
      });
      limit = circleMap("rotation:" + std::to_string(step), q, fieldOf(prefix, "step"));
    }
    sys = System{family, d, space, maps, Potential::zero(q), circleFamily(*space),
                 std::nullopt, limit, 0, 0};
  } else if (family == "inline") {
    return buildInline(d, prefix);
  } else {
    throw ConfigError(fieldOf(prefix, "family"), "unknown system family '" + family + "'");
  }
  if (d.contains("potential")) {
    sys->potential = parsePotential(d["potential"], *sys, fieldOf(prefix, "potential"));
  }
  return std::move(*sys);
}

Potential parsePotential(const json& entry, const System& system, const std::string& field) {
  const std::size_t P = system.space->size();
  if (entry.is_number()) return Potential::constant(P, entry.get<double>());
  if (entry.is_array()) {
    if (entry.size() != P) {
      throw ConfigError(field, "needs one value per point (" + std::to_string(P) + ")");
    }
    std::vector<double> v;
    for (const auto& e : entry) {
      if (!e.is_number()) throw ConfigError(field, "values must be numbers");
      v.push_back(e.get<double>());
    }
    try {
      return Potential(std::move(v), "values");
    } catch (const InvalidArgument& e) {
      throw ConfigError(field, e.what());
    }
  }
  if (entry.is_string()) {
    const auto name = entry.get<std::string>();
    if (name == "zero") return Potential::zero(P).renamed("zero");
    if (name == "first-symbol") {
      if (system.family != "cyclic-shift") {
        throw ConfigError(field, "'first-symbol' needs a cyclic-shift system");
      }
      std::vector<double> v(P);
      for (Point x = 0; x < P; ++x) v[x] = static_cast<double>(shiftSymbol(system, x, 0));
      return Potential(std::move(v), "first-symbol");
    }
    if (name == "cos") {
      std::vector<double> v(P);
      for (Point x = 0; x < P; ++x) {
        v[x] = std::cos(2.0 * std::numbers::pi * static_cast<double>(x) / static_cast<double>(P));
      }
      return Potential(std::move(v), "cos");
    }
    throw ConfigError(field, "unknown potential '" + name + "'");
  }
  throw ConfigError(field, "must be a number, a list of values, or a name");
}

std::size_t shiftSymbol(const System& shift, Point x, std::size_t position) {
  if (shift.family != "cyclic-shift") throw InvalidArgument("not a cyclic-shift system");
  if (position >= shift.wordLength) throw InvalidArgument("symbol position beyond word length");
  std::size_t p = 1;
  for (std::size_t i = position + 1; i < shift.wordLength; ++i) p *= shift.alphabet;
  return (x / p) % shift.alphabet;
}

Point shiftWord(const System& shift, const std::vector<std::size_t>& symbols) {
  if (shift.family != "cyclic-shift") throw InvalidArgument("not a cyclic-shift system");
  if (symbols.size() != shift.wordLength) throw InvalidArgument("word has the wrong length");
  std::size_t x = 0;
  for (std::size_t s : symbols) {
    if (s >= shift.alphabet) throw InvalidArgument("symbol outside alphabet");
    x = x * shift.alphabet + s;
  }
  return static_cast<Point>(x);
}

PointSet shiftCylinder(const System& shift, const std::vector<std::size_t>& prefix) {
  if (shift.family != "cyclic-shift") throw InvalidArgument("not a cyclic-shift system");
  if (prefix.size() > shift.wordLength) throw InvalidArgument("prefix longer than word");
  std::size_t head = 0;
  for (std::size_t s : prefix) {
    if (s >= shift.alphabet) throw InvalidArgument("symbol outside alphabet");
    head = head * shift.alphabet + s;
  }
  std::size_t tail = 1;
  for (std::size_t i = prefix.size(); i < shift.wordLength; ++i) tail *= shift.alphabet;
  std::vector<Point> members(tail);
  for (std::size_t r = 0; r < tail; ++r) members[r] = static_cast<Point>(head * tail + r);
  return PointSet(*shift.space, std::move(members));
}

}  // namespace ndsp
