#pragma once

#include "vtem/types.hpp"

#include <cstdint>
#include <vector>

namespace vtem {

// Counter-based splittable generator (splitmix64). Streams are keyed by
// (seed, path_id); draws are a pure function of the key and the draw index,
// so identical keys reproduce identical sequences on any worker.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  std::uint64_t next();
  // Uniform on (0,1), never exactly 0 or 1.
  double uniform01();

  static std::uint64_t mix(std::uint64_t z);
  static std::uint64_t stream_key(std::uint64_t seed, std::int64_t path_id);

 private:
  std::uint64_t state_;
};

// Standard normal draws via Box-Muller on the splitmix stream. The pairing
// is part of the reproducibility contract.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::int64_t path_id)
      : rng_(SplitMix64::stream_key(seed, path_id)) {}

  double next();

 private:
  SplitMix64 rng_;
  bool have_carry_ = false;
  double carry_ = 0.0;
};

// One path's Brownian increments at the fine step. increments is row-major
// (step-major): increment of coordinate j at step k is increments[k*m + j],
// distributed N(0, dt_fine). Coarse grids are derived by coarsen() and
// remember the parent's fine step for interpolation.
struct BrownianGrid {
  std::uint64_t seed = 0;
  std::int64_t path_id = 0;
  double horizon = 1.0;
  double dt_fine = 1.0;
  int noise_dim = 1;
  std::vector<double> increments;

  std::int64_t steps() const {
    return static_cast<std::int64_t>(increments.size()) / noise_dim;
  }
  Vector increment(std::int64_t k) const;
  // B(b*dt_fine) - B(a*dt_fine), the exact sum of increments [a, b).
  Vector partial_sum(std::int64_t a, std::int64_t b) const;
};

BrownianGrid brownian_grid(std::uint64_t seed, std::int64_t path_id, double T,
                           double dt_fine, int noise_dim);

// Coarse grid at dt = factor * dt_fine; element j is the exact in-order sum
// of fine increments [j*factor, (j+1)*factor).
BrownianGrid coarsen(const BrownianGrid& grid, std::int64_t factor);

}  // namespace vtem
