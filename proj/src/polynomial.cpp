#include "vtem/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

namespace vtem {

Rational::Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
  if (den == 0) throw ConfigError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(std::abs(num), den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

int Polynomial::degree() const {
  int deg = 0;
  for (const Term& t : terms_) {
    int total = 0;
    for (int e : t.exponents) total += e;
    deg = std::max(deg, total);
  }
  return deg;
}

void Polynomial::add_term(Rational coeff, std::vector<int> exponents) {
  if (coeff.num == 0) return;
  if (static_cast<int>(exponents.size()) > vars_) {
    vars_ = static_cast<int>(exponents.size());
    for (Term& t : terms_) t.exponents.resize(vars_, 0);
  }
  exponents.resize(vars_, 0);
  for (Term& t : terms_) {
    if (t.exponents == exponents) {
      // Exact rational addition.
      const std::int64_t num = t.coeff.num * coeff.den + coeff.num * t.coeff.den;
      const std::int64_t den = t.coeff.den * coeff.den;
      t.coeff = Rational(num, den);
      if (t.coeff.num == 0) {
        terms_.erase(std::remove_if(terms_.begin(), terms_.end(),
                                    [&](const Term& u) { return u.coeff.num == 0; }),
                     terms_.end());
      }
      return;
    }
  }
  terms_.push_back({coeff, std::move(exponents)});
}

Polynomial Polynomial::derivative(int var) const {
  Polynomial out(vars_);
  for (const Term& t : terms_) {
    if (var >= static_cast<int>(t.exponents.size()) || t.exponents[var] == 0) continue;
    std::vector<int> e = t.exponents;
    const int k = e[var];
    e[var] -= 1;
    out.add_term(t.coeff * k, std::move(e));
  }
  return out;
}

double Polynomial::eval(const Vector& x) const {
  double acc = 0.0;
  for (const Term& t : terms_) {
    double m = t.coeff.value();
    for (std::size_t i = 0; i < t.exponents.size(); ++i) {
      for (int k = 0; k < t.exponents[i]; ++k) m *= x[static_cast<int>(i)];
    }
    acc += m;
  }
  return acc;
}

double Polynomial::coefficient_bound(double u) const {
  double acc = 0.0;
  for (const Term& t : terms_) {
    int total = 0;
    for (int e : t.exponents) total += e;
    acc += std::abs(t.coeff.value()) * std::pow(u, total);
  }
  return acc;
}

namespace {

struct Cursor {
  const std::string& s;
  std::size_t i = 0;

  void skip_ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool done() {
    skip_ws();
    return i >= s.size();
  }
  char peek() {
    skip_ws();
    return i < s.size() ? s[i] : '\0';
  }
  char take() {
    skip_ws();
    return s[i++];
  }
};

std::int64_t parse_integer(Cursor& c) {
  c.skip_ws();
  std::size_t start = c.i;
  while (c.i < c.s.size() && std::isdigit(static_cast<unsigned char>(c.s[c.i]))) ++c.i;
  if (c.i == start) throw ConfigError("polynomial parse: expected integer at '" +
                                      c.s.substr(start) + "'");
  return std::stoll(c.s.substr(start, c.i - start));
}

// Coefficient: integer, integer/integer, or decimal (converted exactly by
// scaling with a power of ten).
Rational parse_coefficient(Cursor& c) {
  const std::int64_t whole = parse_integer(c);
  if (c.peek() == '/') {
    c.take();
    const std::int64_t den = parse_integer(c);
    return Rational(whole, den);
  }
  if (c.peek() == '.') {
    c.take();
    std::size_t start = c.i;
    const std::int64_t frac = parse_integer(c);
    const std::size_t digits = c.i - start;
    std::int64_t scale = 1;
    for (std::size_t k = 0; k < digits; ++k) scale *= 10;
    return Rational(whole * scale + frac, scale);
  }
  return Rational(whole, 1);
}

// Variable reference: x (first variable), u (envelope variable), or xN.
int parse_var_index(Cursor& c) {
  const char v = c.take();
  if (v != 'x' && v != 'u') throw ConfigError("polynomial parse: expected variable, got '" +
                                              std::string(1, v) + "'");
  if (c.i < c.s.size() && std::isdigit(static_cast<unsigned char>(c.s[c.i]))) {
    const std::int64_t idx = parse_integer(c);
    if (idx < 1) throw ConfigError("polynomial parse: variable index must be >= 1");
    return static_cast<int>(idx) - 1;
  }
  return 0;
}

}  // namespace

Polynomial Polynomial::parse(const std::string& text, int var_count) {
  Polynomial poly(std::max(var_count, 0));
  Cursor c{text};
  bool first = true;
  while (!c.done()) {
    int sign = 1;
    while (c.peek() == '+' || c.peek() == '-') {
      if (c.take() == '-') sign = -sign;
    }
    if (c.done()) {
      if (first) break;
      throw ConfigError("polynomial parse: dangling sign in '" + text + "'");
    }
    Rational coeff(sign, 1);
    std::vector<int> exponents;
    bool saw_factor = false;
    for (;;) {
      const char p = c.peek();
      if (std::isdigit(static_cast<unsigned char>(p))) {
        const Rational k = parse_coefficient(c);
        coeff = Rational(coeff.num * k.num, coeff.den * k.den);
        saw_factor = true;
      } else if (p == 'x' || p == 'u') {
        const int idx = parse_var_index(c);
        int exp = 1;
        if (c.peek() == '^') {
          c.take();
          int esign = 1;
          if (c.peek() == '-') {
            c.take();
            esign = -1;
          }
          const std::int64_t e = parse_integer(c);
          if (esign < 0) throw ConfigError("polynomial parse: negative exponent");
          exp = static_cast<int>(e);
        }
        if (idx >= static_cast<int>(exponents.size())) exponents.resize(idx + 1, 0);
        exponents[idx] += exp;
        saw_factor = true;
      } else {
        break;
      }
      if (c.peek() == '*') {
        c.take();
        continue;
      }
      // Implicit product only after '*'; any other character ends the term.
      break;
    }
    if (!saw_factor) {
      throw ConfigError("polynomial parse: unexpected character '" +
                        std::string(1, c.peek()) + "' in '" + text + "'");
    }
    poly.add_term(coeff, std::move(exponents));
    first = false;
    if (c.done()) break;
    const char next = c.peek();
    if (next != '+' && next != '-') {
      throw ConfigError("polynomial parse: expected '+' or '-' before '" +
                        c.s.substr(c.i) + "'");
    }
  }
  if (var_count > 0 && poly.vars() > var_count) {
    throw ConfigError("polynomial parse: variable index exceeds dimension");
  }
  if (var_count > poly.vars()) {
    Polynomial widened(var_count);
    for (const Term& t : poly.terms()) {
      std::vector<int> e = t.exponents;
      e.resize(var_count, 0);
      widened.add_term(t.coeff, std::move(e));
    }
    return widened;
  }
  return poly;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const Term& t : terms_) {
    if (!first) os << " + ";
    os << t.coeff.num;
    if (t.coeff.den != 1) os << "/" << t.coeff.den;
    for (std::size_t i = 0; i < t.exponents.size(); ++i) {
      if (t.exponents[i] > 0) {
        os << "*x" << (i + 1);
        if (t.exponents[i] > 1) os << "^" << t.exponents[i];
      }
    }
    first = false;
  }
  return os.str();
}

}  // namespace vtem
