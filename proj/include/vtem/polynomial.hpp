#pragma once

#include "vtem/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vtem {

// Exact rational, normalized with positive denominator.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  Rational operator*(std::int64_t k) const { return Rational(num * k, den); }
};

// Sparse multivariate polynomial with exact rational coefficients.
// Differentiation is coefficient manipulation, so gradients and Hessians of
// parsed models stay exact until evaluation.
class Polynomial {
 public:
  struct Term {
    Rational coeff;
    std::vector<int> exponents;  // one entry per variable
  };

  Polynomial() = default;
  explicit Polynomial(int vars) : vars_(vars) {}

  int vars() const { return vars_; }
  bool empty() const { return terms_.empty(); }
  const std::vector<Term>& terms() const { return terms_; }
  int degree() const;

  void add_term(Rational coeff, std::vector<int> exponents);
  Polynomial derivative(int var) const;
  double eval(const Vector& x) const;
  // Upper bound sum |c_a| u^|a| of |p(x)| over |x| <= u (coordinate-wise
  // crude; valid since each |x_i| <= u).
  double coefficient_bound(double u) const;

  // Monomials as c*x1^a*x2^b (also plain x for one variable); throws
  // ConfigError on malformed input. var_count <= 0 means infer.
  static Polynomial parse(const std::string& text, int var_count);

  std::string to_string() const;

 private:
  int vars_ = 0;
  std::vector<Term> terms_;
};

}  // namespace vtem
