#include "vtem/models.hpp"

#include "vtem/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

namespace vtem {

namespace {

std::vector<Vector> default_samples(const ModelBundle& bundle, int count = 160) {
  const double hw = bundle.validation_half_width();
  std::vector<Vector> samples = sample_box(bundle.system.state_dim, hw, count);
  samples.push_back(bundle.x0);
  if (bundle.system.equilibrium) samples.push_back(*bundle.system.equilibrium);
  return samples;
}

void merge(ValidationReport& into, ValidationReport part) {
  into.samples_checked += part.samples_checked;
  for (Violation& v : part.violations) {
    v.check = part.subject + "/" + v.check;
    into.violations.push_back(std::move(v));
  }
}

}  // namespace

ValidationReport validate_bundle(const ModelBundle& bundle) {
  ValidationReport report;
  report.subject = bundle.name;
  const std::vector<Vector> samples = default_samples(bundle);

  merge(report, validate_system(bundle.system, samples));
  merge(report, validate_derivatives(bundle.spec, samples, 1e-5));
  merge(report, validate_class_membership(bundle.spec, samples));
  merge(report, validate_structure_condition(bundle.spec, bundle.system,
                                             bundle.structure_lambda, samples));

  if (bundle.decay.w) {
    ValidationReport decay_report;
    decay_report.subject = "decay";
    for (const Vector& x : samples) {
      ++decay_report.samples_checked;
      const double w = bundle.decay.w(x);
      if (w < 0.0) {
        decay_report.violations.push_back({"nonnegative", x, w, 0.0,
                                           "w must be nonnegative"});
      }
      if (bundle.decay.mu) {
        const double floor =
            *bundle.decay.mu * std::pow(bundle.spec.value(x), bundle.spec.rho);
        if (w - floor < -1e-9 * std::max(1.0, floor)) {
          decay_report.violations.push_back({"mu-floor", x, w, floor,
                                             "w below mu V^rho"});
        }
      }
    }
    merge(report, std::move(decay_report));
  }

  try {
    validate_policy_parameters(bundle.policy, bundle.spec);
  } catch (const PolicyViolation& e) {
    report.violations.push_back({"policy/parameters", bundle.x0, bundle.policy.theta,
                                 0.0, e.what()});
  }
  if (!policy_feasible(bundle.policy, bundle.x0)) {
    report.violations.push_back(
        {"policy/feasibility", bundle.x0,
         envelope_level(bundle.policy, bundle.policy.delta_star),
         bundle.policy.envelope.forward(std::max(bundle.x0.norm(), 1.0)),
         "K delta_star^-theta below phi(|x0| v 1)"});
  }

  const double hw = bundle.validation_half_width();
  const std::vector<double> u_values = {hw, std::max(1.0, 0.5 * hw),
                                        std::max(1.0, 0.25 * hw)};
  const DecayFunction* decay = bundle.decay.w ? &bundle.decay : nullptr;
  merge(report, envelope_validate(bundle.policy, bundle.spec, bundle.system,
                                  decay, u_values));
  merge(report, validate_envelope_monotone(bundle.policy.envelope,
                                           std::max(hw, 4.0)));
  return report;
}

void require_valid(const ModelBundle& bundle) {
  const ValidationReport report = validate_bundle(bundle);
  if (!report.pass()) throw ValidationError(report.summary());
}

ModelBundle example_planar_quartic(std::optional<Vector> x0,
                                   std::optional<double> delta_star) {
  ModelBundle bundle;
  bundle.name = "planar-quartic";

  bundle.system.state_dim = 2;
  bundle.system.noise_dim = 2;
  bundle.system.drift = [](const Vector& x) -> Vector {
    return (-2.0 * x.squaredNorm()) * x;
  };
  bundle.system.diffusion = [](const Vector& x) -> Matrix {
    const double s = 2.0 * std::sqrt(2.0) * x.squaredNorm();
    Matrix g = Matrix::Zero(2, 2);
    g(0, 0) = s;
    g(1, 1) = s;
    return g;
  };
  bundle.system.equilibrium = Vector::Zero(2);

  bundle.spec.value = [](const Vector& x) { return x.squaredNorm(); };
  bundle.spec.gradient = [](const Vector& x) -> Vector { return 2.0 * x; };
  bundle.spec.hessian = [](const Vector& x) -> Matrix {
    return 2.0 * Matrix::Identity(x.size(), x.size());
  };
  bundle.spec.rho = 0.125;
  bundle.spec.delta = 0.5;
  bundle.spec.smoothness_order = 2;
  bundle.spec.growth_constant = 2.0 * std::sqrt(2.0);
  bundle.spec.class_flag = LyapunovClass::KernelZero;

  // L V^rho = 4 rho (4 rho - 1) |x|^(2 rho + 2) = -w with rho = 1/8.
  const double rho = bundle.spec.rho;
  bundle.decay.w = [rho](const Vector& x) {
    return -4.0 * rho * (4.0 * rho - 1.0) * std::pow(x.norm(), 2.0 * rho + 2.0);
  };
  bundle.decay.kernel_is_origin = true;

  bundle.policy.variant = TruncationVariant::StabilityBar;
  bundle.policy.bar_mode = BarWeightMode::LambdaWeighted;
  bundle.policy.envelope.forward = [](double u) { return 16.0 * (u + 2.0) * (u + 2.0); };
  bundle.policy.envelope.inverse = [](double v) { return 0.25 * std::sqrt(v) - 2.0; };
  bundle.policy.envelope.domain_floor = 0.0;
  bundle.policy.theta = 0.4;
  bundle.policy.delta_star = delta_star.value_or(1e-4);

  if (x0) {
    if (x0->size() != 2) throw ConfigError("planar-quartic: x0 must have 2 entries");
    bundle.x0 = *x0;
  } else {
    bundle.x0 = Vector(2);
    bundle.x0 << 1.0, std::sqrt(3.0);
  }
  // K dt^-theta = phi(|x0| v 1) dt^-0.4, so the radius is 4 dt^-0.2 - 2.
  bundle.policy.k_const = bundle.policy.envelope.forward(std::max(bundle.x0.norm(), 1.0));

  bundle.structure_lambda = 0.0;
  bundle.provenance =
      "planar quartic: f = -2|x|^2 x, g = 2 sqrt(2) |x|^2 I2, V = |x|^2, "
      "rho = 1/8, w = |x|^(2 rho + 2)/4 from the closed form of L V^rho; "
      "envelope 16(u+2)^2 dominates the Lambda-weighted growth ratios "
      "(worst ratio 64 as u -> 0); K = phi(|x0| v 1) = 256, theta = 0.4, "
      "delta_star = 1e-4, radius(dt) = 4 dt^-0.2 - 2.";
  require_valid(bundle);
  return bundle;
}

ModelBundle example_scalar_cubic(double rho, double x0, double delta_star) {
  if (!(rho > 0.0) || !(rho < 1.0)) {
    throw ConfigError("example_scalar_cubic: rho must lie in (0, 1)");
  }
  ModelBundle bundle;
  bundle.name = "scalar-cubic";

  bundle.system.state_dim = 1;
  bundle.system.noise_dim = 1;
  bundle.system.drift = [](const Vector& x) -> Vector {
    Vector f(1);
    f[0] = -0.5 * x[0] - x[0] * x[0] * x[0];
    return f;
  };
  bundle.system.diffusion = [](const Vector& x) -> Matrix {
    Matrix g(1, 1);
    g(0, 0) = x[0];
    return g;
  };
  bundle.system.equilibrium = Vector::Zero(1);

  bundle.spec.value = [](const Vector& x) { return x[0] * x[0]; };
  bundle.spec.gradient = [](const Vector& x) -> Vector {
    Vector g(1);
    g[0] = 2.0 * x[0];
    return g;
  };
  bundle.spec.hessian = [](const Vector&) -> Matrix {
    Matrix h(1, 1);
    h(0, 0) = 2.0;
    return h;
  };
  bundle.spec.rho = rho;
  bundle.spec.delta = 0.5;
  bundle.spec.smoothness_order = 2;
  bundle.spec.growth_constant = 2.0;
  bundle.spec.class_flag = LyapunovClass::KernelZero;

  // L V^rho <= -2 rho (1 - rho) V^rho, so w = mu V^rho with mu = 2 rho (1-rho).
  const double mu = 2.0 * rho * (1.0 - rho);
  bundle.decay.w = [mu, rho](const Vector& x) {
    return mu * std::pow(x[0] * x[0], rho);
  };
  bundle.decay.kernel_is_origin = true;
  bundle.decay.mu = mu;

  bundle.policy.variant = TruncationVariant::StabilityBar;
  // V^rho = |x|^(2 rho) with w >= mu V^rho: the bar ratios reduce to
  // |f|/|x| and |g|^2/|x|^2, dominated by u^2 + 1.
  bundle.policy.bar_mode = BarWeightMode::NormSimplified;
  bundle.policy.envelope.forward = [](double u) { return u * u + 1.0; };
  bundle.policy.envelope.inverse = [](double v) { return std::sqrt(v - 1.0); };
  bundle.policy.envelope.domain_floor = 0.0;
  bundle.policy.k_const = 110.0;
  bundle.policy.theta = 0.25;
  bundle.policy.delta_star = delta_star;

  bundle.x0 = Vector::Constant(1, x0);
  bundle.structure_lambda = 0.0;

  RateAssumption rate;
  rate.metric_u = [](const Vector& x) { return x.squaredNorm(); };
  rate.delta2 = 0.5;
  rate.kappa = [](double v) { return std::sqrt(v); };
  rate.kappa_inv = [](double v) { return v * v; };
  rate.a = 1.0;
  rate.q = 4.0;
  rate.tau = 1.0;
  rate.c1 = 2.0;
  rate.iota = 1.0;
  rate.kbar = 2.0;
  rate.r = 1.0;
  rate.p_bar = 2.0 * rho;  // identity modulus: |x|^p_bar <= V^rho
  bundle.rate = rate;

  std::ostringstream notes;
  notes << "scalar cubic: f = -0.5x - x^3, g = x, V = x^2, rho = " << rho
        << ", mu = 2 rho (1-rho) = " << mu
        << "; simplified bar weights |f|/|x| and |g|^2/|x|^2 with envelope "
           "u^2 + 1; K = 110, theta = 1/4, delta_star = " << delta_star
        << ", radius(dt) = sqrt(110 dt^-0.25 - 1). Rate data: U = |x|^2, "
           "kappa = sqrt, a = 1, q = 4, tau = 1; the tau window needs rho > a "
           "so it is infeasible for rho < 1 and reported as such.";
  bundle.provenance = notes.str();
  require_valid(bundle);
  return bundle;
}

ModelBundle example_duffing_vdp(std::optional<Vector> x0,
                                std::optional<double> delta_star) {
  ModelBundle bundle;
  bundle.name = "duffing-vdp";

  bundle.system.state_dim = 2;
  bundle.system.noise_dim = 2;
  bundle.system.drift = [](const Vector& x) -> Vector {
    Vector f(2);
    f[0] = x[1];
    f[1] = -3.0 * x[0] - 2.0 * x[1] - 2.0 * x[1] * x[0] * x[0] -
           x[0] * x[0] * x[0];
    return f;
  };
  bundle.system.diffusion = [](const Vector& x) -> Matrix {
    Matrix g = Matrix::Zero(2, 2);
    g(1, 0) = std::sqrt(2.0) * x[0];
    g(1, 1) = std::sqrt(2.5) * x[1];
    return g;
  };
  bundle.system.equilibrium = Vector::Zero(2);

  bundle.spec.value = [](const Vector& x) {
    const double x1 = x[0], x2 = x[1];
    return x1 * x1 * x1 * x1 + x2 * x2 + x1 * x2 + 4.0 * x1 * x1;
  };
  bundle.spec.gradient = [](const Vector& x) -> Vector {
    Vector g(2);
    g[0] = 4.0 * x[0] * x[0] * x[0] + x[1] + 8.0 * x[0];
    g[1] = 2.0 * x[1] + x[0];
    return g;
  };
  bundle.spec.hessian = [](const Vector& x) -> Matrix {
    Matrix h(2, 2);
    h(0, 0) = 12.0 * x[0] * x[0] + 8.0;
    h(0, 1) = 1.0;
    h(1, 0) = 1.0;
    h(1, 1) = 2.0;
    return h;
  };
  bundle.spec.rho = 1.0;
  bundle.spec.delta = 0.25;
  bundle.spec.smoothness_order = 4;
  bundle.spec.growth_constant = 25.0;
  bundle.spec.class_flag = LyapunovClass::Hat;

  // L V = -4 x1^2 x2^2 - x1^2 - 0.5 x2^2 - x1^4 <= -0.5|x|^2.
  bundle.decay.w = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  bundle.decay.kernel_is_origin = true;

  bundle.policy.variant = TruncationVariant::StabilityHat;
  bundle.policy.envelope.forward = [](double u) {
    return std::pow(36.0 + 16.0 * u * u * u * u, 0.75);
  };
  bundle.policy.envelope.inverse = [](double v) {
    return 0.5 * std::pow(std::pow(v, 4.0 / 3.0) - 36.0, 0.25);
  };
  bundle.policy.envelope.domain_floor = 1.0;
  bundle.policy.theta = 0.4;
  bundle.policy.delta_star = delta_star.value_or(0.1);

  if (x0) {
    if (x0->size() != 2) throw ConfigError("duffing-vdp: x0 must have 2 entries");
    bundle.x0 = *x0;
  } else {
    bundle.x0 = Vector(2);
    bundle.x0 << 2.0, 1.0;
  }
  bundle.policy.k_const = bundle.policy.envelope.forward(std::max(bundle.x0.norm(), 1.0));

  bundle.structure_lambda = 0.0;
  bundle.provenance =
      "Duffing-van der Pol in (z, z'): f = (x2, -3x1 - 2x2 - 2x2 x1^2 - x1^3), "
      "g row 2 = (sqrt(2) x1, sqrt(2.5) x2), V = x1^4 + x2^2 + x1 x2 + 4 x1^2 "
      "(positive definite; V >= 0.5|x|^2 = w), rho = 1, delta = 1/4. Hat "
      "envelope (36 + 16 u^4)^(3/4) dominates the weighted ratios (checked "
      "numerically; the intermediate bound 5(8u^4+21)^(1/4)(36+16u^4)^(1/2) "
      "is looser than the final envelope at small u). K = phi(|x0| v 1), "
      "theta = 0.4, delta_star = 0.1. An alternative construction truncates "
      "at (|x0| v 1) dt^-0.4; this bundle uses phi^-1(K dt^-theta) so the "
      "radius stays consistent with the envelope level.";
  require_valid(bundle);
  return bundle;
}

std::vector<std::string> builtin_model_names() {
  return {"planar-quartic", "scalar-cubic", "duffing-vdp"};
}

ModelBundle load_builtin(const std::string& name) {
  return load_builtin_custom(name, std::nullopt, std::nullopt, std::nullopt);
}

ModelBundle load_builtin_custom(const std::string& name,
                                std::optional<double> rho,
                                std::optional<Vector> x0,
                                std::optional<double> delta_star) {
  if (name == "planar-quartic" || name == "duffing-vdp") {
    if (rho) {
      throw ConfigError("model '" + name + "' does not take a rho override");
    }
    return name == "planar-quartic" ? example_planar_quartic(x0, delta_star)
                                    : example_duffing_vdp(x0, delta_star);
  }
  if (name == "scalar-cubic") {
    if (x0 && x0->size() != 1) {
      throw ConfigError("scalar-cubic: x0 must have 1 entry");
    }
    return example_scalar_cubic(rho.value_or(0.5), x0 ? (*x0)[0] : 19.0,
                                delta_star.value_or(0.008));
  }
  throw ConfigError("unknown model '" + name + "'");
}

// ---------------------------------------------------------------------------
// Polynomial model descriptions.

namespace {

struct Assignment {
  std::string key;
  std::string value;
};

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<Assignment> parse_assignments(const std::string& text) {
  std::vector<Assignment> out;
  std::string statement;
  auto flush = [&]() {
    const std::string s = trim(statement);
    statement.clear();
    if (s.empty() || s[0] == '#') return;
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("model description: missing '=' in '" + s + "'");
    }
    Assignment a{trim(s.substr(0, eq)), trim(s.substr(eq + 1))};
    if (a.key.empty() || a.value.empty()) {
      throw ConfigError("model description: empty key or value in '" + s + "'");
    }
    out.push_back(std::move(a));
  };
  for (char ch : text) {
    if (ch == '\n' || ch == ';') {
      flush();
    } else {
      statement.push_back(ch);
    }
  }
  flush();
  return out;
}

double parse_number(const std::string& value, const std::string& key) {
  const std::size_t slash = value.find('/');
  try {
    if (slash != std::string::npos) {
      const double num = std::stod(trim(value.substr(0, slash)));
      const double den = std::stod(trim(value.substr(slash + 1)));
      if (den == 0.0) throw ConfigError("model description: zero denominator for " + key);
      return num / den;
    }
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (trim(value.substr(used)).size()) throw std::invalid_argument(value);
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("model description: bad number '" + value + "' for " + key);
  }
}

Vector parse_vector(const std::string& value, const std::string& key) {
  std::vector<double> entries;
  std::string token;
  std::istringstream is(value);
  while (std::getline(is, token, ',')) entries.push_back(parse_number(trim(token), key));
  Vector out(static_cast<int>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) out[static_cast<int>(i)] = entries[i];
  return out;
}

}  // namespace

ModelBundle build_polynomial_model(const std::string& text) {
  const std::vector<Assignment> assignments = parse_assignments(text);
  std::map<std::string, std::string> table;
  for (const Assignment& a : assignments) {
    if (table.count(a.key)) {
      throw ConfigError("model description: duplicate key '" + a.key + "'");
    }
    table[a.key] = a.value;
  }
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = table.find(key);
    if (it == table.end()) return std::nullopt;
    std::string v = it->second;
    table.erase(it);
    return v;
  };

  // Dimensions: explicit d/m win, otherwise inferred from component keys.
  int d = 0, m = 0;
  if (auto v = take("d")) d = static_cast<int>(parse_number(*v, "d"));
  if (auto v = take("m")) m = static_cast<int>(parse_number(*v, "m"));
  if (d == 0) {
    if (table.count("f")) {
      d = 1;
    } else {
      while (table.count("f" + std::to_string(d + 1))) ++d;
    }
  }
  if (d <= 0) throw ConfigError("model description: missing drift (f or f1..fd)");
  if (m == 0) {
    if (table.count("g")) {
      m = 1;
    } else {
      int cols = 0;
      for (int j = 1; j <= 16; ++j) {
        if (table.count("g1" + std::to_string(j))) cols = j;
      }
      m = std::max(1, cols);
    }
  }

  std::vector<Polynomial> f_polys;
  if (auto v = take("f")) {
    if (d != 1) throw ConfigError("model description: scalar f needs d = 1");
    f_polys.push_back(Polynomial::parse(*v, d));
  } else {
    for (int i = 1; i <= d; ++i) {
      auto v = take("f" + std::to_string(i));
      if (!v) throw ConfigError("model description: missing f" + std::to_string(i));
      f_polys.push_back(Polynomial::parse(*v, d));
    }
  }
  std::vector<std::vector<Polynomial>> g_polys(
      static_cast<std::size_t>(d), std::vector<Polynomial>(static_cast<std::size_t>(m)));
  if (auto v = take("g")) {
    if (d != 1 || m != 1) throw ConfigError("model description: scalar g needs d = m = 1");
    g_polys[0][0] = Polynomial::parse(*v, d);
  } else {
    for (int i = 1; i <= d; ++i) {
      for (int j = 1; j <= m; ++j) {
        if (auto v = take("g" + std::to_string(i) + std::to_string(j))) {
          g_polys[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] =
              Polynomial::parse(*v, d);
        }
      }
    }
  }

  auto v_text = take("V");
  if (!v_text) v_text = take("v");
  if (!v_text) throw ConfigError("model description: missing V");
  const Polynomial v_poly = Polynomial::parse(*v_text, d);
  std::vector<Polynomial> v_grad;
  std::vector<std::vector<Polynomial>> v_hess(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    v_grad.push_back(v_poly.derivative(i));
    for (int j = 0; j < d; ++j) {
      v_hess[static_cast<std::size_t>(i)].push_back(v_grad.back().derivative(j));
    }
  }

  ModelBundle bundle;
  bundle.name = "polynomial";
  if (auto v = take("name")) bundle.name = *v;
  bundle.system.state_dim = d;
  bundle.system.noise_dim = m;
  bundle.system.drift = [f_polys, d](const Vector& x) -> Vector {
    Vector f(d);
    for (int i = 0; i < d; ++i) f[i] = f_polys[static_cast<std::size_t>(i)].eval(x);
    return f;
  };
  bundle.system.diffusion = [g_polys, d, m](const Vector& x) -> Matrix {
    Matrix g(d, m);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < m; ++j) {
        const Polynomial& p = g_polys[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        g(i, j) = p.empty() ? 0.0 : p.eval(x);
      }
    }
    return g;
  };

  bundle.spec.value = [v_poly](const Vector& x) { return v_poly.eval(x); };
  bundle.spec.gradient = [v_grad, d](const Vector& x) -> Vector {
    Vector g(d);
    for (int i = 0; i < d; ++i) g[i] = v_grad[static_cast<std::size_t>(i)].eval(x);
    return g;
  };
  bundle.spec.hessian = [v_hess, d](const Vector& x) -> Matrix {
    Matrix h(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        h(i, j) = v_hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].eval(x);
      }
    }
    return h;
  };

  bundle.spec.rho = 0.5;
  if (auto v = take("rho")) bundle.spec.rho = parse_number(*v, "rho");
  bundle.spec.delta = 0.5;
  if (auto v = take("delta")) bundle.spec.delta = parse_number(*v, "delta");
  bundle.spec.smoothness_order = std::min(4, std::max(2, v_poly.degree()));
  if (auto v = take("p")) bundle.spec.smoothness_order = static_cast<int>(parse_number(*v, "p"));

  std::string class_name = v_poly.eval(Vector::Zero(d)) == 0.0 ? "kernelzero" : "offset";
  if (auto v = take("class")) class_name = *v;
  if (class_name == "offset") {
    bundle.spec.class_flag = LyapunovClass::Offset;
  } else if (class_name == "kernelzero") {
    bundle.spec.class_flag = LyapunovClass::KernelZero;
  } else if (class_name == "hat") {
    bundle.spec.class_flag = LyapunovClass::Hat;
  } else {
    throw ConfigError("model description: unknown class '" + class_name + "'");
  }

  if (auto v = take("x0")) {
    bundle.x0 = parse_vector(*v, "x0");
    if (bundle.x0.size() != d) throw ConfigError("model description: x0 dimension mismatch");
  } else {
    bundle.x0 = Vector::Zero(d);
  }

  // Declare the equilibrium when the coefficients vanish at the origin.
  {
    const Vector zero = Vector::Zero(d);
    if (bundle.system.drift(zero).norm() <= 1e-12 &&
        bundle.system.diffusion(zero).norm() <= 1e-12) {
      bundle.system.equilibrium = zero;
    }
  }

  if (auto v = take("w")) {
    const Polynomial w_poly = Polynomial::parse(*v, d);
    bundle.decay.w = [w_poly](const Vector& x) { return w_poly.eval(x); };
    bundle.decay.kernel_is_origin = true;
  }
  if (auto v = take("mu")) bundle.decay.mu = parse_number(*v, "mu");

  std::string variant = bundle.decay.w ? "bar" : "finite";
  if (auto v = take("variant")) variant = *v;
  if (variant == "finite") {
    bundle.policy.variant = TruncationVariant::FiniteTime;
  } else if (variant == "bar") {
    bundle.policy.variant = TruncationVariant::StabilityBar;
    bundle.policy.bar_mode = BarWeightMode::LambdaWeighted;
  } else if (variant == "bar-norm") {
    bundle.policy.variant = TruncationVariant::StabilityBar;
    bundle.policy.bar_mode = BarWeightMode::NormSimplified;
  } else if (variant == "hat") {
    bundle.policy.variant = TruncationVariant::StabilityHat;
  } else {
    throw ConfigError("model description: unknown variant '" + variant + "'");
  }
  if (bundle.policy.variant != TruncationVariant::FiniteTime &&
      bundle.policy.bar_mode != BarWeightMode::NormSimplified && !bundle.decay.w) {
    throw ConfigError("model description: stability variants require w");
  }

  if (auto v = take("phi")) {
    const Polynomial phi_poly = Polynomial::parse(*v, 1);
    bundle.policy.envelope.forward = [phi_poly](double u) {
      Vector arg(1);
      arg[0] = u;
      return phi_poly.eval(arg);
    };
    bundle.policy.envelope.domain_floor = 0.0;
  } else {
    // Trivial coefficient-sum envelope: sum |c_a| u^|a| dominates |f| and
    // |g|^2 on |x| <= u, hence every variant ratio with denominators >= 1
    // only for the finite-time weights. Stability variants need an explicit
    // phi.
    if (bundle.policy.variant != TruncationVariant::FiniteTime) {
      throw ConfigError("model description: stability variants require an explicit phi");
    }
    std::vector<Polynomial> fs = f_polys;
    std::vector<std::vector<Polynomial>> gs = g_polys;
    bundle.policy.envelope.forward = [fs, gs](double u) {
      double fb = 0.0;
      for (const Polynomial& p : fs) fb += p.coefficient_bound(u);
      double gb = 0.0;
      for (const auto& row : gs) {
        for (const Polynomial& p : row) gb += p.coefficient_bound(u);
      }
      return fb + gb * gb + u;
    };
    bundle.policy.envelope.domain_floor = 0.0;
  }
  bundle.policy.theta = 0.4;
  if (auto v = take("theta")) bundle.policy.theta = parse_number(*v, "theta");
  bundle.policy.delta_star = 0.1;
  if (auto v = take("dstar")) bundle.policy.delta_star = parse_number(*v, "dstar");
  if (auto v = take("K")) {
    bundle.policy.k_const = parse_number(*v, "K");
  } else {
    bundle.policy.k_const =
        bundle.policy.envelope.forward(std::max(bundle.x0.norm(), 1.0));
  }
  if (auto v = take("lambda")) bundle.structure_lambda = parse_number(*v, "lambda");

  if (auto v = take("c")) {
    bundle.spec.growth_constant = parse_number(*v, "c");
  } else {
    // Tight sampled constant with 5% headroom.
    const bool offset = bundle.spec.class_flag != LyapunovClass::KernelZero;
    double c = 1.0;
    for (const Vector& x : sample_box(d, std::max(2.0 * bundle.x0.norm(), 2.0), 128)) {
      const double val = v_poly.eval(x);
      if (val < 0.0) continue;
      const double base = offset ? 1.0 + val : val;
      if (base <= 0.0) continue;
      c = std::max(c, bundle.spec.gradient(x).norm() /
                          std::pow(base, 1.0 - bundle.spec.delta));
      c = std::max(c, bundle.spec.hessian(x).norm() /
                          std::pow(base, 1.0 - 2.0 * bundle.spec.delta));
    }
    bundle.spec.growth_constant = 1.05 * c;
  }

  if (!table.empty()) {
    throw ConfigError("model description: unknown key '" + table.begin()->first + "'");
  }

  std::ostringstream notes;
  notes << "polynomial model (d = " << d << ", m = " << m << "): V = "
        << v_poly.to_string();
  bundle.provenance = notes.str();
  require_valid(bundle);
  return bundle;
}

}  // namespace vtem
