#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ndsp/space.hpp"

namespace ndsp {

using MapTable = std::vector<Point>;

/// The sequence f_1, f_2, ... of selfmaps of a finite space.
///
/// Maps are produced on demand by a generator and memoized; every generated
/// table is checked to send valid points to valid points. A declared
/// eventual period lets the memo store only preperiod + period tables.
/// Copies share the memo.
class MapSequence {
 public:
  using Generator = std::function<MapTable(std::size_t)>;
  struct Periodicity {
    std::size_t preperiod = 0;
    std::size_t period = 1;
  };

  MapSequence(std::size_t spaceSize, Generator generator,
              std::optional<Periodicity> periodicity = std::nullopt);

  /// f_j = table for every j.
  static MapSequence constant(MapTable table);
  /// f_j = tables[(j-1) mod tables.size()].
  static MapSequence cycling(std::vector<MapTable> tables);
  static MapSequence identity(std::size_t spaceSize);

  std::size_t spaceSize() const noexcept;
  const std::optional<Periodicity>& periodicity() const noexcept;

  /// The table of f_j, j >= 1.
  const MapTable& map(std::size_t j) const;
  Point apply(std::size_t j, Point x) const { return map(j)[x]; }
  /// f_i^j = f_{i+j-1} o ... o f_i; j = 0 gives the identity.
  MapTable compose(std::size_t i, std::size_t j) const;
  Point composeAt(std::size_t i, std::size_t j, Point x) const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

/// Real-valued potential on the points of a space.
class Potential {
 public:
  explicit Potential(std::vector<double> values, std::string name = "phi");
  static Potential constant(std::size_t size, double c);
  static Potential zero(std::size_t size) { return constant(size, 0.0); }

  double operator()(Point x) const { return values_[x]; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return values_.size(); }
  double supNorm() const noexcept { return supNorm_; }
  double min() const;
  double max() const;

  Potential plus(double c) const;
  Potential scaled(double c) const;
  Potential absolute() const;
  Potential renamed(std::string name) const;
  /// t*a + (1-t)*b pointwise.
  static Potential mix(double t, const Potential& a, const Potential& b);
  friend Potential operator+(const Potential& a, const Potential& b);

 private:
  std::vector<double> values_;
  std::string name_;
  double supNorm_ = 0.0;
};

/// S_n phi(x), summed left to right along the orbit x, f_1 x, ..., f_1^{n-1} x.
double birkhoffSum(const Potential& potential, const MapSequence& maps, std::size_t n, Point x);

/// Finite family of test functions standing in for the weak* topology.
struct TestFunctionFamily {
  std::vector<std::string> names;
  std::vector<std::vector<double>> functions;
  std::vector<double> lipschitzBounds;

  std::size_t size() const noexcept { return functions.size(); }
  double maxLipschitz() const;
  /// Throws InvalidArgument when empty, ragged or (for small spaces) when a
  /// declared bound fails on some pair.
  void validate(const MetricSpace& space) const;
};

/// Distance-to-anchor functions plus a smoothed indicator per anchor.
TestFunctionFamily anchorFamily(const MetricSpace& space, const std::vector<Point>& anchors);

/// A fully built dynamical system.
struct System {
  std::string family;
  nlohmann::json descriptor;
  std::shared_ptr<const MetricSpace> space;
  MapSequence maps;
  Potential potential;
  TestFunctionFamily testFunctions;
  /// Largest horizon for which the model is faithful (cyclic shifts: L).
  std::optional<std::size_t> maxHorizon;
  /// Limit map of a uniformly convergent sequence, when the family has one.
  std::optional<MapTable> limitMap;
  /// Shift parameters, when family == "cyclic-shift".
  std::size_t wordLength = 0;
  std::size_t alphabet = 0;

  const MetricSpace& metric() const { return *space; }
};

/// Builds one of the shipped families from a JSON descriptor. Throws
/// ConfigError naming the offending field (prefixed by `fieldPrefix`).
System builtinSystem(const nlohmann::json& descriptor, const std::string& fieldPrefix = "system");

/// Parses a potential entry (number, list, or named builtin) for `system`.
Potential parsePotential(const nlohmann::json& entry, const System& system,
                         const std::string& field);

/// Shift helpers: symbol at position i of word x, and the word index of a
/// symbol list (position 0 first).
std::size_t shiftSymbol(const System& shift, Point x, std::size_t position);
Point shiftWord(const System& shift, const std::vector<std::size_t>& symbols);
/// Words whose first `prefix.size()` symbols equal `prefix`.
PointSet shiftCylinder(const System& shift, const std::vector<std::size_t>& prefix);

}  // namespace ndsp
