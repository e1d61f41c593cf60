#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ndsp {

using Point = std::uint32_t;

/// A finite metric space: points are the dense indices 0..size()-1.
///
/// The distance is validated at construction: symmetry and identity of
/// indiscernibles on every pair, the triangle inequality on every triple when
/// size() <= 64 and on a deterministic sample of triples otherwise. Spaces with
/// at most `kDenseLimit` points cache the full distance matrix.
class MetricSpace {
 public:
  using DistanceFn = std::function<double(Point, Point)>;
  static constexpr std::size_t kDenseLimit = 1024;

  MetricSpace(std::size_t size, DistanceFn distance,
              std::vector<std::string> labels = {});

  /// Points on the real line with |a-b|.
  static MetricSpace line(std::vector<double> coordinates);
  /// Points in R^d (rows of `coordinates`) with the Euclidean distance.
  static MetricSpace euclidean(const std::vector<std::vector<double>>& coordinates);
  /// Explicit symmetric matrix, row-major.
  static MetricSpace fromMatrix(std::size_t size, std::vector<double> matrix,
                                std::vector<std::string> labels = {});

  std::size_t size() const noexcept { return size_; }
  /// Unchecked distance.
  double operator()(Point x, Point y) const {
    return dense_.empty() ? distance_(x, y) : dense_[std::size_t{x} * size_ + y];
  }
  /// Range-checked distance.
  double distance(Point x, Point y) const;
  bool contains(Point x) const noexcept { return x < size_; }
  std::string label(Point x) const;
  double diameter() const;

 private:
  void validate() const;

  std::size_t size_;
  DistanceFn distance_;
  std::vector<double> dense_;
  std::vector<std::string> labels_;
};

/// Sorted, deduplicated set of points of one parent space.
class PointSet {
 public:
  PointSet() = default;
  PointSet(const MetricSpace& parent, std::vector<Point> members);
  PointSet(const MetricSpace& parent, std::initializer_list<Point> members)
      : PointSet(parent, std::vector<Point>(members)) {}

  static PointSet all(const MetricSpace& parent);

  const MetricSpace* parent() const noexcept { return parent_; }
  std::span<const Point> members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  bool contains(Point x) const;
  auto begin() const noexcept { return members_.begin(); }
  auto end() const noexcept { return members_.end(); }
  Point operator[](std::size_t i) const { return members_[i]; }

  bool isSubsetOf(const PointSet& other) const;
  bool intersects(const PointSet& other) const;
  PointSet unionWith(const PointSet& other) const;

  friend bool operator==(const PointSet& a, const PointSet& b) {
    return a.members_ == b.members_;
  }

 private:
  const MetricSpace* parent_ = nullptr;
  std::vector<Point> members_;
};

/// Throws InvalidArgument when `set` is empty (the subset K of a pressure).
void requireNonempty(const PointSet& set, const char* what);

}  // namespace ndsp
