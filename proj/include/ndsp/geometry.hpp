#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <shared_mutex>
#include <tuple>
#include <vector>

#include "ndsp/space.hpp"
#include "ndsp/systems.hpp"

namespace ndsp {

struct BowenBall {
  Point center = 0;
  std::size_t n = 1;
  double eps = 0.0;
  bool closed = false;
  PointSet members;
};

/// d_n(x,y) = max_{0<=i<n} d(f_1^i x, f_1^i y).
double bowenDistance(const MetricSpace& space, const MapSequence& maps, std::size_t n, Point x,
                     Point y);

/// Materialized open (d_n < eps) or closed (d_n <= eps) Bowen ball, by
/// exhaustive scan.
BowenBall bowenBall(const MetricSpace& space, const MapSequence& maps, std::size_t n, double eps,
                    Point center, bool closed);

/// Orbits, Birkhoff sums and Bowen balls of every center up to a fixed
/// horizon, memoized. Layers at horizon n are derived from horizon n-1 by
/// filtering with the distance at time n-1, so building all horizons costs
/// one pass per horizon over the previous ball sizes.
///
/// Thread-safe; returned references stay valid for the lifetime of the object.
class BowenGeometry {
 public:
  /// Distinct balls at one (eps, closed, n): `balls[ballOf[x]]` is the ball of x.
  struct Layer {
    std::vector<std::vector<Point>> balls;
    std::vector<std::uint32_t> ballOf;
    const std::vector<Point>& of(Point x) const { return balls[ballOf[x]]; }
  };

  BowenGeometry(const MetricSpace& space, const MapSequence& maps, std::size_t horizon);

  const MetricSpace& space() const noexcept { return *space_; }
  const MapSequence& maps() const noexcept { return maps_; }
  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t size() const noexcept { return space_->size(); }

  /// f_1^i x for 0 <= i <= horizon.
  Point orbit(std::size_t i, Point x) const { return orbit_[i][x]; }
  /// d_n(x,y) from the cached orbits.
  double distance(std::size_t n, Point x, Point y) const;
  /// S_n phi(x) for every x, 1 <= n <= horizon (same summation order as birkhoffSum).
  std::vector<std::vector<double>> birkhoffTable(const Potential& potential) const;

  const Layer& layer(double eps, bool closed, std::size_t n) const;

 private:
  void requireHorizon(std::size_t n) const;

  const MetricSpace* space_;
  MapSequence maps_;
  std::size_t horizon_;
  std::vector<MapTable> orbit_;
  mutable std::shared_mutex mutex_;
  mutable std::map<std::tuple<double, bool, std::size_t>, std::unique_ptr<const Layer>> layers_;
};

}  // namespace ndsp
