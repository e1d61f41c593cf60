#pragma once

#include "brute.hpp"
#include "ndsp/cover.hpp"
#include "ndsp/space.hpp"
#include "ndsp/systems.hpp"

namespace bridge {

// Library view of a brute-force system; keeps the space alive for engines.
struct Lib {
  explicit Lib(const brute::Nds& s)
      : space(ndsp::MetricSpace::line(s.coords)), maps(toMaps(s)), phi(s.phi) {}

  ndsp::PointSet all() const { return ndsp::PointSet::all(space); }
  ndsp::PointSet subset(const std::vector<std::size_t>& K) const {
    return ndsp::PointSet(space, std::vector<ndsp::Point>(K.begin(), K.end()));
  }
  ndsp::CoverEngine engine(std::size_t horizon, ndsp::EngineOptions options = {}) const {
    return ndsp::CoverEngine(space, maps, phi, horizon, options);
  }

  static ndsp::MapSequence toMaps(const brute::Nds& s) {
    std::vector<ndsp::MapTable> tables;
    for (const auto& t : s.tables) tables.emplace_back(t.begin(), t.end());
    return ndsp::MapSequence::cycling(std::move(tables));
  }

  ndsp::MetricSpace space;
  ndsp::MapSequence maps;
  ndsp::Potential phi;
};

inline std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace bridge
