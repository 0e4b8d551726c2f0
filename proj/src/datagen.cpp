#include "pdenet/datagen.hpp"

#include <cmath>
#include <functional>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace pdenet {

namespace {

using JetFormula = std::function<Jet(std::span<const Jet>)>;

/// Closed-form solution written once in jet arithmetic; every derivative is
/// exact up to rounding.
class FormulaSolution final : public Solution {
 public:
  FormulaSolution(int dims, JetFormula formula) : dims_(dims), formula_(std::move(formula)) {}

  Jet jet(std::span<const double> x, int order) const override {
    const auto set = MultiIndexSet::full(dims_, order);
    std::vector<Jet> coords;
    for (int d = 0; d < dims_; ++d) coords.push_back(Jet::variable(set, x[static_cast<std::size_t>(d)], d));
    return formula_(coords);
  }

 private:
  int dims_;
  JetFormula formula_;
};

/// u = 0.5 sin(x - u t): the smooth inviscid Burgers solution before
/// characteristics cross (0.5 t < 1 on the domain).
class InviscidSolution final : public Solution {
 public:
  static constexpr double kAmplitude = 0.5;

  Jet jet(std::span<const double> x, int order) const override {
    const double u0 = solve(x[0], x[1]);
    const auto set = MultiIndexSet::full(2, order);
    const Jet X = Jet::variable(set, x[0], 0);
    const Jet T = Jet::variable(set, x[1], 1);
    // Newton's method in jet arithmetic: each pass fixes at least one more
    // derivative order, the value is already converged.
    Jet u = Jet::constant(set, u0);
    for (int it = 0; it <= order + 1; ++it) {
      const Jet phase = X - u * T;
      const Jet g = u - kAmplitude * sin(phase);
      const Jet dg = 1.0 + kAmplitude * (T * cos(phase));
      u = u - g * reciprocal(dg);
    }
    u[0] = u0;
    return u;
  }

  double value(std::span<const double> x) const override { return solve(x[0], x[1]); }

  static double solve(double x, double t) {
    double u = kAmplitude * std::sin(x);
    for (int it = 0; it < 50; ++it) {
      const double phase = x - u * t;
      const double g = u - kAmplitude * std::sin(phase);
      const double dg = 1.0 + kAmplitude * t * std::cos(phase);
      const double step = g / dg;
      u -= step;
      if (std::abs(step) <= 1e-13 * std::max(1.0, std::abs(u))) return u;
    }
    throw std::runtime_error("inviscid Newton solve did not converge at x=" + std::to_string(x) +
                             ", t=" + std::to_string(t));
  }
};

Vector unit(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out / out.norm();
}

Box box(std::initializer_list<double> lower, std::initializer_list<double> upper) {
  Box b;
  b.lower = Vector::Map(std::data(lower), static_cast<Eigen::Index>(lower.size()));
  b.upper = Vector::Map(std::data(upper), static_cast<Eigen::Index>(upper.size()));
  return b;
}

EquationCase make_wave() {
  EquationCase c;
  c.name = "wave";
  c.variables = {"x", "t"};
  c.domain = box({0.0, 0.0}, {2.0 * std::numbers::pi, 2.0 * std::numbers::pi});
  c.solution = std::make_shared<FormulaSolution>(2, [](std::span<const Jet> v) {
    const Jet& x = v[0];
    const Jet& t = v[1];
    return sin(x - t) + 0.5 * sin(2.0 * (x + t));
  });
  c.dictionary = parse_dictionary(c.variables, "u_tt, u_xx, u_t, u_x, u, u^2, uu_x, uu_t");
  c.phi_star = unit({1, -1, 0, 0, 0, 0, 0, 0});
  c.residual_tolerance = 1e-10;
  return c;
}

EquationCase make_helmholtz() {
  EquationCase c;
  c.name = "helmholtz";
  c.variables = {"x0", "x1"};
  c.domain = box({0.0, 0.0}, {std::numbers::pi, std::numbers::pi});
  // k = 2. The (sqrt2, sqrt2) mode alone would also satisfy u_x0x0 = -2u and
  // u_x1x1 = -2u separately; the (2, 0) mode pins the relation to
  // u_x0x0 + u_x1x1 + 4u = 0.
  c.solution = std::make_shared<FormulaSolution>(2, [](std::span<const Jet> v) {
    const double r2 = std::numbers::sqrt2;
    return sin(r2 * v[0]) * sin(r2 * v[1]) + 0.5 * cos(2.0 * v[0]);
  });
  c.dictionary = parse_dictionary(c.variables, "u_x0x0, u_x1x1, u_x0, u_x1, u, u^2, uu_x1, uu_x0");
  c.phi_star = unit({1, 1, 0, 0, 4, 0, 0, 0});
  c.residual_tolerance = 1e-10;
  return c;
}

EquationCase make_inviscid() {
  EquationCase c;
  c.name = "inviscid";
  c.variables = {"x", "t"};
  c.domain = box({0.0, 0.0}, {2.0 * std::numbers::pi, 0.9});
  c.solution = std::make_shared<InviscidSolution>();
  c.dictionary = parse_dictionary(c.variables, "u_tt, u_xx, u_t, u_x, u, u^2, uu_x, u_xx^2");
  c.phi_star = unit({0, 0, 1, 0, 0, 0, 1, 0});
  c.residual_tolerance = 1e-10;
  return c;
}

EquationCase make_kdv() {
  EquationCase c;
  c.name = "kdv";
  c.variables = {"x", "t"};
  c.domain = box({-10.0, 0.0}, {10.0, 5.0});
  // Two-soliton solution u = -2 (log tau)_xx. A single soliton is a travelling
  // wave and would also satisfy u_t + c u_x = 0 and u_tt = c^2 u_xx.
  c.solution = std::make_shared<FormulaSolution>(2, [](std::span<const Jet> v) {
    const Jet& x = v[0];
    const Jet& t = v[1];
    constexpr double k1 = 1.0, k2 = 1.4;
    constexpr double x1 = -4.0, x2 = -8.0;  // initial crest positions
    const double coupling = ((k1 - k2) / (k1 + k2)) * ((k1 - k2) / (k1 + k2));
    const Jet e1 = exp(k1 * (x - x1) - (k1 * k1 * k1) * t);
    const Jet e2 = exp(k2 * (x - x2) - (k2 * k2 * k2) * t);
    const Jet e12 = coupling * (e1 * e2);
    const Jet tau = 1.0 + e1 + e2 + e12;
    const Jet tau_x = k1 * e1 + k2 * e2 + (k1 + k2) * e12;
    const Jet tau_xx = (k1 * k1) * e1 + (k2 * k2) * e2 + ((k1 + k2) * (k1 + k2)) * e12;
    const Jet inv = reciprocal(tau);
    return -2.0 * ((tau_xx * inv) - square(tau_x * inv));
  });
  c.dictionary = parse_dictionary(c.variables, "u_xxx, u_tt, u_xx, u_t, u_x, u, uu_x, u_x^2");
  c.phi_star = unit({1, 0, 0, 1, 0, 0, -6, 0});
  c.residual_tolerance = 1e-8;
  return c;
}

EquationCase make_vortex() {
  EquationCase c;
  c.name = "vortex";
  c.variables = {"x", "y", "t"};
  c.domain = box({-3.0, -3.0, 0.0}, {3.0, 3.0, 2.0 * std::numbers::pi});
  c.solution = std::make_shared<FormulaSolution>(3, [](std::span<const Jet> v) {
    const Jet& x = v[0];
    const Jet& y = v[1];
    const Jet ct = cos(v[2]);
    const Jet st = sin(v[2]);
    const Jet rx = x * ct + y * st - 1.0;
    const Jet ry = y * ct - x * st;
    return exp(-(square(rx) + square(ry)));
  });
  c.dictionary = parse_dictionary(c.variables, "u_t, u_x, u_y, x u_x, y u_x, x u_y, y u_y, u");
  c.phi_star = unit({1, 0, 0, 0, -1, 1, 0, 0});
  c.residual_tolerance = 1e-8;
  return c;
}

EquationCase make_hjb() {
  static std::once_flag once;
  static std::shared_ptr<const Solution> solved;
  std::call_once(once, [] { solved = solve_hjb(HjbSettings{}); });

  EquationCase c;
  c.name = "hjb";
  c.variables = {"x0", "x1"};
  const HjbSettings s;
  c.domain = box({0.0, 0.0}, {2.0 * std::numbers::pi, s.t_end});
  c.solution = solved;
  c.dictionary = parse_dictionary(c.variables, "u_x1x1, u_x0x0, u_x1, u_x0, u, u^2, uu_x0, u_x0^2");
  c.phi_star = unit({0, 1, -1, 0, 0, -1, 0, -1});
  c.residual_tolerance = 1e-3;
  return c;
}

EquationCase make_ode_exp() {
  EquationCase c;
  c.name = "ode_exp";
  c.variables = {"t"};
  c.domain = box({0.0}, {1.0});
  c.solution = std::make_shared<FormulaSolution>(1, [](std::span<const Jet> v) { return exp(1.0 * v[0]); });
  c.dictionary = parse_dictionary(c.variables, "u_t, u");
  c.phi_star = unit({1, -1});
  c.residual_tolerance = 1e-10;
  return c;
}

}  // namespace

std::vector<std::string> case_names() { return {"wave", "helmholtz", "inviscid", "kdv", "vortex", "hjb", "ode_exp"}; }

EquationCase make_case(const std::string& name) {
  if (name == "wave") return make_wave();
  if (name == "helmholtz") return make_helmholtz();
  if (name == "inviscid") return make_inviscid();
  if (name == "kdv") return make_kdv();
  if (name == "vortex") return make_vortex();
  if (name == "hjb") return make_hjb();
  if (name == "ode_exp") return make_ode_exp();
  throw std::invalid_argument("unknown equation case '" + name + "'");
}

double gaussian_noise(Rng& rng, double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("noise sigma must be non-negative");
  const double z = rng.normal();
  return sigma == 0.0 ? 0.0 : sigma * z;
}

Dataset sample_dataset(const EquationCase& c, int samples, double sigma, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("sample count must be >= 1");
  const Eigen::Index dims = c.domain.dims();
  Dataset d{Matrix(dims, samples), Vector(samples), Vector(samples)};
  Rng rng(seed);
  std::vector<double> x(static_cast<std::size_t>(dims));
  for (Eigen::Index j = 0; j < samples; ++j) {
    for (Eigen::Index i = 0; i < dims; ++i) {
      x[static_cast<std::size_t>(i)] = rng.uniform(c.domain.lower(i), c.domain.upper(i));
      d.points(i, j) = x[static_cast<std::size_t>(i)];
    }
    d.clean(j) = c.solution->value(x);
    d.values(j) = d.clean(j) + gaussian_noise(rng, sigma);
  }
  return d;
}

Problem make_problem(const EquationCase& c, int samples, double sigma, std::uint64_t seed) {
  Dataset d = sample_dataset(c, samples, sigma, seed);
  return Problem{c.name, c.dictionary, std::move(d.points), std::move(d.values), c.domain, c.phi_star};
}

Matrix grid_points(const Box& b, int count) {
  const int dims = b.dims();
  const int per_axis = std::max(2, static_cast<int>(std::ceil(std::pow(static_cast<double>(count), 1.0 / dims) - 1e-9)));
  Eigen::Index total = 1;
  for (int d = 0; d < dims; ++d) total *= per_axis;
  Matrix p(dims, total);
  for (Eigen::Index k = 0; k < total; ++k) {
    Eigen::Index rest = k;
    for (int d = 0; d < dims; ++d) {
      const double s = static_cast<double>(rest % per_axis) / (per_axis - 1);
      rest /= per_axis;
      p(d, k) = b.lower(d) + s * (b.upper(d) - b.lower(d));
    }
  }
  return p;
}

std::vector<Jet> oracle_jets(const EquationCase& c, const Matrix& points, int order) {
  std::vector<Jet> jets;
  jets.reserve(static_cast<std::size_t>(points.cols()));
  std::vector<double> x(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index k = 0; k < points.cols(); ++k) {
    Eigen::Map<Vector>(x.data(), points.rows()) = points.col(k);
    jets.push_back(c.solution->jet(x, order));
  }
  return jets;
}

ResidualReport residual_check(const EquationCase& c, int grid_size, double tolerance, const Vector* phi) {
  const Matrix points = grid_points(c.domain, grid_size);
  const std::vector<Jet> jets = oracle_jets(c, points, required_order(c.dictionary));
  const Matrix d = feature_matrix(c.dictionary, points, jets);
  const Vector residual = d * (phi ? *phi : c.phi_star);
  Eigen::Index worst = 0;
  ResidualReport r;
  r.max_residual = residual.cwiseAbs().maxCoeff(&worst);
  r.worst_point = points.col(worst);
  r.tolerance = tolerance;
  r.passed = r.max_residual < tolerance;
  return r;
}

}  // namespace pdenet
