#include "vtem/validation.hpp"

#include <cmath>
#include <sstream>

namespace vtem {

std::string format_state(const Vector& x) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < x.size(); ++i) {
    if (i) os << ", ";
    os << x[i];
  }
  os << ")";
  return os.str();
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  os << subject << ": " << (pass() ? "pass" : "FAIL") << " ("
     << samples_checked << " samples, " << violations.size() << " violations)";
  if (!violations.empty()) {
    const Violation& v = violations.front();
    os << "; first: " << v.check << " at " << format_state(v.witness)
       << " measured " << v.measured << " bound " << v.bound;
    if (!v.detail.empty()) os << " [" << v.detail << "]";
  }
  return os.str();
}

namespace {

// Kronecker sequence alphas: fractional parts of sqrt of small primes.
double kronecker_alpha(int i) {
  static const double primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  const double s = std::sqrt(primes[i % 12]);
  return s - std::floor(s);
}

}  // namespace

std::vector<Vector> sample_box(const Vector& lo, const Vector& hi, int count) {
  const int dim = static_cast<int>(lo.size());
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Vector x(dim);
    for (int i = 0; i < dim; ++i) {
      double u = std::fmod((k + 1) * kronecker_alpha(i) + 0.5 * kronecker_alpha(i + 1), 1.0);
      x[i] = lo[i] + u * (hi[i] - lo[i]);
    }
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<Vector> sample_box(int dim, double half_width, int count) {
  Vector lo = Vector::Constant(dim, -half_width);
  Vector hi = Vector::Constant(dim, half_width);
  return sample_box(lo, hi, count);
}

std::vector<Vector> sample_directions(int dim, int count) {
  std::vector<Vector> dirs;
  dirs.reserve(static_cast<std::size_t>(count));
  if (dim == 1) {
    dirs.push_back(Vector::Constant(1, 1.0));
    dirs.push_back(Vector::Constant(1, -1.0));
    return dirs;
  }
  // Map the box sequence through a deterministic normal-ish transform; only
  // coverage matters, not distribution.
  std::vector<Vector> raw = sample_box(dim, 1.0, count);
  for (Vector& x : raw) {
    // Avoid near-zero vectors.
    if (x.norm() < 1e-3) x = Vector::Constant(dim, 1.0);
    dirs.push_back(x / x.norm());
  }
  // Always include the coordinate axes.
  for (int i = 0; i < dim; ++i) {
    Vector e = Vector::Zero(dim);
    e[i] = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  return dirs;
}

}  // namespace vtem
