#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace vtem {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Error hierarchy shared by every module. The C API maps these to status
// codes, the CLI maps them to exit codes.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A non-finite value appeared where the scheme guarantees finiteness.
class NumericFailure : public Error {
 public:
  using Error::Error;
};

// An input outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// V(x) = 0 where a V-power formula requires V > 0.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

// A step size or parameter violating the truncation policy.
class PolicyViolation : public Error {
 public:
  using Error::Error;
};

// Inconsistent run configuration (grids, factors, file contents).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A model failed one of its construction-time validators.
class ValidationError : public Error {
 public:
  using Error::Error;
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }
inline bool all_finite(const Matrix& m) { return m.allFinite(); }

std::string format_state(const Vector& x);

}  // namespace vtem
