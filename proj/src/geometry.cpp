#include "ndsp/geometry.hpp"

#include <algorithm>
#include <mutex>
#include <unordered_map>

#include "ndsp/error.hpp"

namespace ndsp {

namespace {

void checkBallArgs(const MetricSpace& space, const MapSequence& maps, std::size_t n, double eps) {
  if (n == 0) throw InvalidArgument("Bowen horizon n must be >= 1");
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  if (maps.spaceSize() != space.size()) throw InvalidArgument("maps do not act on this space");
}

std::uint64_t hashPoints(const std::vector<Point>& pts) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Point p : pts) {
    h ^= p;
    h *= 1099511628211ULL;
  }
  return h ^ pts.size();
}

}  // namespace

double bowenDistance(const MetricSpace& space, const MapSequence& maps, std::size_t n, Point x,
                     Point y) {
  if (n == 0) throw InvalidArgument("Bowen horizon n must be >= 1");
  if (!space.contains(x) || !space.contains(y)) throw InvalidArgument("point outside space");
  if (maps.spaceSize() != space.size()) throw InvalidArgument("maps do not act on this space");
  double best = space(x, y);
  for (std::size_t i = 1; i < n; ++i) {
    x = maps.apply(i, x);
    y = maps.apply(i, y);
    best = std::max(best, space(x, y));
  }
  return best;
}

BowenBall bowenBall(const MetricSpace& space, const MapSequence& maps, std::size_t n, double eps,
                    Point center, bool closed) {
  checkBallArgs(space, maps, n, eps);
  if (!space.contains(center)) throw InvalidArgument("center outside space");
  const std::size_t P = space.size();
  std::vector<Point> alive(P);
  for (std::size_t y = 0; y < P; ++y) alive[y] = static_cast<Point>(y);
  std::vector<Point> orbitY(alive);
  Point c = center;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      c = maps.apply(i, c);
      const MapTable& f = maps.map(i);
      for (auto& y : orbitY) y = f[y];
    }
    std::vector<Point> keptAlive;
    std::vector<Point> keptOrbit;
    for (std::size_t k = 0; k < alive.size(); ++k) {
      const double d = space(c, orbitY[k]);
      if (closed ? d <= eps : d < eps) {
        keptAlive.push_back(alive[k]);
        keptOrbit.push_back(orbitY[k]);
      }
    }
    alive = std::move(keptAlive);
    orbitY = std::move(keptOrbit);
  }
  return BowenBall{center, n, eps, closed, PointSet(space, std::move(alive))};
}

BowenGeometry::BowenGeometry(const MetricSpace& space, const MapSequence& maps,
                             std::size_t horizon)
    : space_(&space), maps_(maps), horizon_(horizon) {
  if (horizon == 0) throw InvalidArgument("geometry horizon must be >= 1");
  if (maps.spaceSize() != space.size()) throw InvalidArgument("maps do not act on this space");
  orbit_.reserve(horizon + 1);
  orbit_.push_back(MapSequence::identity(space.size()).map(1));
  for (std::size_t i = 1; i <= horizon; ++i) {
    const MapTable& f = maps.map(i);
    MapTable next(space.size());
    for (std::size_t x = 0; x < next.size(); ++x) next[x] = f[orbit_[i - 1][x]];
    orbit_.push_back(std::move(next));
  }
}

void BowenGeometry::requireHorizon(std::size_t n) const {
  if (n == 0 || n > horizon_) {
    throw InvalidArgument("horizon " + std::to_string(n) + " outside 1.." +
                          std::to_string(horizon_));
  }
}

double BowenGeometry::distance(std::size_t n, Point x, Point y) const {
  requireHorizon(n);
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) best = std::max(best, (*space_)(orbit_[i][x], orbit_[i][y]));
  return best;
}

std::vector<std::vector<double>> BowenGeometry::birkhoffTable(const Potential& potential) const {
  if (potential.size() != size()) throw InvalidArgument("potential does not match the space");
  std::vector<std::vector<double>> table(horizon_ + 1, std::vector<double>(size(), 0.0));
  for (std::size_t n = 1; n <= horizon_; ++n) {
    for (std::size_t x = 0; x < size(); ++x) {
      table[n][x] = table[n - 1][x] + potential(orbit_[n - 1][x]);
    }
  }
  return table;
}

const BowenGeometry::Layer& BowenGeometry::layer(double eps, bool closed, std::size_t n) const {
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  requireHorizon(n);
  const auto key = std::make_tuple(eps, closed, n);
  {
    std::shared_lock lock(mutex_);
    auto it = layers_.find(key);
    if (it != layers_.end()) return *it->second;
  }
  const std::size_t P = size();
  std::vector<std::vector<Point>> perCenter(P);
  if (n == 1) {
    for (Point x = 0; x < P; ++x) {
      for (Point y = 0; y < P; ++y) {
        const double d = (*space_)(x, y);
        if (closed ? d <= eps : d < eps) perCenter[x].push_back(y);
      }
    }
  } else {
    const Layer& prev = layer(eps, closed, n - 1);
    const MapTable& o = orbit_[n - 1];
    for (Point x = 0; x < P; ++x) {
      for (Point y : prev.of(x)) {
        const double d = (*space_)(o[x], o[y]);
        if (closed ? d <= eps : d < eps) perCenter[x].push_back(y);
      }
    }
  }
  auto built = std::make_unique<Layer>();
  built->ballOf.resize(P);
  std::unordered_multimap<std::uint64_t, std::uint32_t> seen;
  for (Point x = 0; x < P; ++x) {
    const std::uint64_t h = hashPoints(perCenter[x]);
    std::uint32_t id = static_cast<std::uint32_t>(built->balls.size());
    auto [lo, hi] = seen.equal_range(h);
    for (auto it = lo; it != hi; ++it) {
      if (built->balls[it->second] == perCenter[x]) {
        id = it->second;
        break;
      }
    }
    if (id == built->balls.size()) {
      seen.emplace(h, id);
      built->balls.push_back(std::move(perCenter[x]));
    }
    built->ballOf[x] = id;
  }
  std::unique_lock lock(mutex_);
  auto [it, inserted] = layers_.try_emplace(key, std::move(built));
  return *it->second;
}

}  // namespace ndsp
