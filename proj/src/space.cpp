#include "ndsp/space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ndsp/error.hpp"

namespace ndsp {

namespace {

constexpr double kTriangleSlack = 1e-12;

// Deterministic triple sampler (splitmix64) for large spaces.
std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

MetricSpace::MetricSpace(std::size_t size, DistanceFn distance,
                         std::vector<std::string> labels)
    : size_(size), distance_(std::move(distance)), labels_(std::move(labels)) {
  if (size_ == 0) throw InvalidArgument("metric space must have at least one point");
  if (!distance_) throw InvalidArgument("metric space needs a distance function");
  if (!labels_.empty() && labels_.size() != size_) {
    throw InvalidArgument("label count does not match point count");
  }
  if (size_ <= kDenseLimit) {
    dense_.resize(size_ * size_);
    for (std::size_t i = 0; i < size_; ++i) {
      for (std::size_t j = 0; j < size_; ++j) {
        dense_[i * size_ + j] = distance_(static_cast<Point>(i), static_cast<Point>(j));
      }
    }
  }
  validate();
}

MetricSpace MetricSpace::line(std::vector<double> coordinates) {
  const std::size_t n = coordinates.size();
  std::vector<std::string> labels;
  labels.reserve(n);
  for (double c : coordinates) {
    std::ostringstream os;
    os << c;
    labels.push_back(os.str());
  }
  return MetricSpace(
      n,
      [coords = std::move(coordinates)](Point x, Point y) {
        return std::abs(coords[x] - coords[y]);
      },
      std::move(labels));
}

MetricSpace MetricSpace::euclidean(const std::vector<std::vector<double>>& coordinates) {
  if (coordinates.empty()) throw InvalidArgument("euclidean space needs points");
  const std::size_t dim = coordinates.front().size();
  for (const auto& row : coordinates) {
    if (row.size() != dim) throw InvalidArgument("points have inconsistent dimension");
  }
  return MetricSpace(coordinates.size(), [coords = coordinates](Point x, Point y) {
    double acc = 0.0;
    for (std::size_t k = 0; k < coords[x].size(); ++k) {
      const double d = coords[x][k] - coords[y][k];
      acc += d * d;
    }
    return std::sqrt(acc);
  });
}

MetricSpace MetricSpace::fromMatrix(std::size_t size, std::vector<double> matrix,
                                    std::vector<std::string> labels) {
  if (matrix.size() != size * size) {
    throw InvalidArgument("distance matrix must be size*size");
  }
  return MetricSpace(
      size,
      [m = std::move(matrix), size](Point x, Point y) { return m[std::size_t{x} * size + y]; },
      std::move(labels));
}

double MetricSpace::distance(Point x, Point y) const {
  if (!contains(x) || !contains(y)) throw InvalidArgument("point outside space");
  return (*this)(x, y);
}

std::string MetricSpace::label(Point x) const {
  if (!contains(x)) throw InvalidArgument("point outside space");
  return labels_.empty() ? std::to_string(x) : labels_[x];
}

double MetricSpace::diameter() const {
  double best = 0.0;
  for (Point x = 0; x < size_; ++x) {
    for (Point y = x + 1; y < size_; ++y) best = std::max(best, (*this)(x, y));
  }
  return best;
}

void MetricSpace::validate() const {
  const auto n = static_cast<Point>(size_);
  for (Point x = 0; x < n; ++x) {
    if ((*this)(x, x) != 0.0) {
      throw InvalidArgument("dist(x,x) != 0 at point " + std::to_string(x));
    }
    for (Point y = x + 1; y < n; ++y) {
      const double dxy = (*this)(x, y);
      if (!(dxy > 0.0) || !std::isfinite(dxy)) {
        throw InvalidArgument("distance must be positive and finite between distinct points " +
                              std::to_string(x) + "," + std::to_string(y));
      }
      if (dxy != (*this)(y, x)) {
        throw InvalidArgument("distance is not symmetric at " + std::to_string(x) + "," +
                              std::to_string(y));
      }
    }
  }
  auto checkTriple = [this](Point x, Point y, Point z) {
    const double lhs = (*this)(x, z);
    const double rhs = (*this)(x, y) + (*this)(y, z);
    if (lhs > rhs * (1.0 + kTriangleSlack)) {
      throw InvalidArgument("triangle inequality violated at " + std::to_string(x) + "," +
                            std::to_string(y) + "," + std::to_string(z));
    }
  };
  if (size_ <= 64) {
    for (Point x = 0; x < n; ++x)
      for (Point y = 0; y < n; ++y)
        for (Point z = 0; z < n; ++z) checkTriple(x, y, z);
  } else {
    std::uint64_t state = 0x5eed;
    for (int i = 0; i < 20000; ++i) {
      checkTriple(static_cast<Point>(splitmix(state) % n), static_cast<Point>(splitmix(state) % n),
                  static_cast<Point>(splitmix(state) % n));
    }
  }
}

PointSet::PointSet(const MetricSpace& parent, std::vector<Point> members)
    : parent_(&parent), members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  if (!members_.empty() && !parent.contains(members_.back())) {
    throw InvalidArgument("point " + std::to_string(members_.back()) + " outside space of size " +
                          std::to_string(parent.size()));
  }
}

PointSet PointSet::all(const MetricSpace& parent) {
  std::vector<Point> members(parent.size());
  for (std::size_t i = 0; i < members.size(); ++i) members[i] = static_cast<Point>(i);
  return PointSet(parent, std::move(members));
}

bool PointSet::contains(Point x) const {
  return std::binary_search(members_.begin(), members_.end(), x);
}

bool PointSet::isSubsetOf(const PointSet& other) const {
  return std::includes(other.members_.begin(), other.members_.end(), members_.begin(),
                       members_.end());
}

bool PointSet::intersects(const PointSet& other) const {
  auto a = members_.begin();
  auto b = other.members_.begin();
  while (a != members_.end() && b != other.members_.end()) {
    if (*a == *b) return true;
    if (*a < *b) ++a; else ++b;
  }
  return false;
}

PointSet PointSet::unionWith(const PointSet& other) const {
  std::vector<Point> merged;
  merged.reserve(members_.size() + other.members_.size());
  std::set_union(members_.begin(), members_.end(), other.members_.begin(), other.members_.end(),
                 std::back_inserter(merged));
  return PointSet(*(parent_ ? parent_ : other.parent_), std::move(merged));
}

void requireNonempty(const PointSet& set, const char* what) {
  if (set.empty()) throw InvalidArgument(std::string(what) + " must be nonempty");
}

}  // namespace ndsp
