#pragma once

#include "vtem/brownian.hpp"
#include "vtem/models.hpp"

#include <cmath>
#include <vector>

namespace vtem::testing {

// Deterministic pseudo-random states for property checks.
inline std::vector<Vector> random_states(int dim, double scale, int count,
                                         std::uint64_t seed = 99) {
  SplitMix64 rng(SplitMix64::mix(seed));
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Vector x(dim);
    for (int i = 0; i < dim; ++i) x[i] = scale * (2.0 * rng.uniform01() - 1.0);
    out.push_back(std::move(x));
  }
  return out;
}

inline Vector vec1(double x) { return Vector::Constant(1, x); }

inline Vector vec2(double a, double b) {
  Vector x(2);
  x << a, b;
  return x;
}

}  // namespace vtem::testing
