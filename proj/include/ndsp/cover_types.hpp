#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ndsp/space.hpp"

namespace ndsp {

enum class CoverMode { FixedLengthCover, VariableLengthCover, Packing, RefinedPacking, OpenCover };

std::string toString(CoverMode mode);

struct Witness {
  Point center = 0;
  std::size_t n = 0;
  double logWeight = 0.0;
  // Partition piece for refined packings; 0 otherwise.
  std::size_t piece = 0;
};

/// A weighted cover or packing sum together with the family realizing it.
/// `logValue` is the log-sum-exp of the witness log weights taken in witness
/// order, and `value` is its exponential.
struct CoverSum {
  double value = 0.0;
  double logValue = 0.0;
  std::vector<Witness> witnesses;
  CoverMode mode = CoverMode::FixedLengthCover;
  bool exact = false;
};

/// log(sum exp(v_i)) accumulated in the given order; -inf for an empty list.
double logSumExp(std::span<const double> values);

/// Sets logValue/value from the witnesses.
void finalizeSum(CoverSum& sum);

}  // namespace ndsp
