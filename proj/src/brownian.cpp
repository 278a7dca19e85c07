#include "vtem/brownian.hpp"

#include <cmath>
#include <sstream>

namespace vtem {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr double kTwoPi = 6.283185307179586476925286766559;
}  // namespace

std::uint64_t SplitMix64::mix(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::next() {
  state_ += kGolden;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform01() {
  // 53 mantissa bits, shifted into (0,1).
  return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t SplitMix64::stream_key(std::uint64_t seed, std::int64_t path_id) {
  const std::uint64_t a = mix(seed);
  const std::uint64_t b = mix(static_cast<std::uint64_t>(path_id) * kGolden + 0x1234567899ULL);
  return mix(a ^ (b + kGolden + (a << 6) + (a >> 2)));
}

double NormalStream::next() {
  if (have_carry_) {
    have_carry_ = false;
    return carry_;
  }
  const double u1 = rng_.uniform01();
  const double u2 = rng_.uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  carry_ = r * std::sin(kTwoPi * u2);
  have_carry_ = true;
  return r * std::cos(kTwoPi * u2);
}

Vector BrownianGrid::increment(std::int64_t k) const {
  Vector out(noise_dim);
  const std::size_t base = static_cast<std::size_t>(k) * noise_dim;
  for (int j = 0; j < noise_dim; ++j) out[j] = increments[base + j];
  return out;
}

Vector BrownianGrid::partial_sum(std::int64_t a, std::int64_t b) const {
  Vector out = Vector::Zero(noise_dim);
  for (std::int64_t k = a; k < b; ++k) {
    const std::size_t base = static_cast<std::size_t>(k) * noise_dim;
    for (int j = 0; j < noise_dim; ++j) out[j] += increments[base + j];
  }
  return out;
}

BrownianGrid brownian_grid(std::uint64_t seed, std::int64_t path_id, double T,
                           double dt_fine, int noise_dim) {
  if (!(dt_fine > 0.0)) throw ConfigError("brownian_grid: dt_fine must be positive");
  if (noise_dim <= 0) throw ConfigError("brownian_grid: noise_dim must be positive");
  const double steps_real = T / dt_fine;
  const std::int64_t steps = std::llround(steps_real);
  if (steps <= 0 || std::abs(steps * dt_fine - T) > 1e-9 * std::max(1.0, T)) {
    std::ostringstream os;
    os << "brownian_grid: horizon " << T << " is not an integer multiple of dt "
       << dt_fine;
    throw ConfigError(os.str());
  }
  BrownianGrid grid;
  grid.seed = seed;
  grid.path_id = path_id;
  grid.horizon = T;
  grid.dt_fine = dt_fine;
  grid.noise_dim = noise_dim;
  grid.increments.resize(static_cast<std::size_t>(steps) * noise_dim);
  NormalStream normals(seed, path_id);
  const double scale = std::sqrt(dt_fine);
  for (double& v : grid.increments) v = scale * normals.next();
  return grid;
}

BrownianGrid coarsen(const BrownianGrid& grid, std::int64_t factor) {
  if (factor <= 0) throw ConfigError("coarsen: factor must be positive");
  const std::int64_t fine_steps = grid.steps();
  if (fine_steps % factor != 0) {
    std::ostringstream os;
    os << "coarsen: factor " << factor << " does not divide " << fine_steps
       << " fine steps";
    throw ConfigError(os.str());
  }
  BrownianGrid out;
  out.seed = grid.seed;
  out.path_id = grid.path_id;
  out.horizon = grid.horizon;
  out.dt_fine = grid.dt_fine * static_cast<double>(factor);
  out.noise_dim = grid.noise_dim;
  const std::int64_t coarse_steps = fine_steps / factor;
  out.increments.assign(static_cast<std::size_t>(coarse_steps) * grid.noise_dim, 0.0);
  // In-order accumulation so the coarse entries are exact grouped sums.
  for (std::int64_t j = 0; j < coarse_steps; ++j) {
    for (std::int64_t k = j * factor; k < (j + 1) * factor; ++k) {
      const std::size_t src = static_cast<std::size_t>(k) * grid.noise_dim;
      const std::size_t dst = static_cast<std::size_t>(j) * grid.noise_dim;
      for (int c = 0; c < grid.noise_dim; ++c) {
        out.increments[dst + c] += grid.increments[src + c];
      }
    }
  }
  return out;
}

}  // namespace vtem
