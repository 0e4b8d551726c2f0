#include "pdenet/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "pdenet/datagen.hpp"

namespace pdenet {

double recovery_error(const Vector& phi, const Vector& phi_star) {
  if (phi.size() != phi_star.size()) throw std::invalid_argument("coefficient vectors differ in length");
  const double n1 = phi.norm();
  const double n2 = phi_star.norm();
  if (!(n1 > 0.0) || !(n2 > 0.0)) throw std::invalid_argument("recovery_error of a zero vector");
  const double cosine = std::min(1.0, std::abs(phi.dot(phi_star)) / (n1 * n2));
  if (cosine < 0.5) return std::sqrt(1.0 - cosine);
  // Near collinear, 1 - |cos| = |u - s v|^2 / 2 on the unit vectors avoids
  // the cancellation that would leave ~1e-8 for identical inputs.
  const double s = phi.dot(phi_star) < 0.0 ? -1.0 : 1.0;
  const double d = (phi / n1 - s * (phi_star / n2)).norm();
  return std::min(1.0, d / std::numbers::sqrt2);
}

void CrlbParams::validate() const {
  if (!(sigma > 0.0)) throw std::invalid_argument("CRLB needs sigma > 0");
  if (samples < 1) throw std::invalid_argument("CRLB needs J >= 1");
  if (amplitude == 0.0) throw std::invalid_argument("CRLB needs C != 0");
}

namespace {

// sinh(a) - a without the cancellation of the direct difference near 0.
double sinh_minus_identity(double a) {
  if (std::abs(a) >= 1.0) return std::sinh(a) - a;
  const double a2 = a * a;
  double term = a * a2 / 6.0, sum = 0.0;
  for (int k = 1; k < 30 && term != 0.0; ++k) {
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    term *= a2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
  }
  return sum;
}

}  // namespace

double crlb_bound(const CrlbParams& p) {
  p.validate();
  const double a = p.a;
  const double prefactor = p.sigma * p.sigma / (p.amplitude * p.amplitude * static_cast<double>(p.samples));
  if (std::abs(a) < 1e-3) {
    // 8 a^3 e^{-a} sinh a / (cosh 2a - 1 - 2a^2) has a removable singularity at 0.
    const double series =
        12.0 + a * (-12.0 + a * (32.0 / 5.0 + a * (-12.0 / 5.0 + a * (332.0 / 525.0 + a * (-52.0 / 525.0 + a * (16.0 / 7875.0))))));
    return prefactor * series;
  }
  // cosh 2a - 1 - 2a^2 = 2 (sinh a - a)(sinh a + a) and e^{-a} sinh a = -expm1(-2a) / 2.
  const double numerator = -0.5 * std::expm1(-2.0 * a);
  const double denominator = 2.0 * sinh_minus_identity(a) * (std::sinh(a) + a);
  return prefactor * 8.0 * a * a * a * numerator / denominator;
}

QuadratureRule gauss_legendre(int n, double lo, double hi) {
  if (n < 1) throw std::invalid_argument("quadrature needs at least one node");
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      // Final derivative at the converged node.
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    rule.nodes[static_cast<std::size_t>(i)] = mid - half * x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = mid + half * x;
    rule.weights[static_cast<std::size_t>(i)] = rule.weights[static_cast<std::size_t>(n - 1 - i)] = half * w;
  }
  return rule;
}

FisherMatrix fisher_numeric(double a, double amplitude, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("Fisher information needs sigma > 0");
  static const QuadratureRule rule = gauss_legendre(64, 0.0, 1.0);
  // Gaussian location model: F_pq = (1/sigma^2) int_0^1 dmu/dp dmu/dq dt,
  // mu = C e^{a t}.
  FisherMatrix f;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double t = rule.nodes[i];
    const double e = std::exp(a * t);
    const double dmu_da = amplitude * t * e;
    const double dmu_dc = e;
    f.aa += rule.weights[i] * dmu_da * dmu_da;
    f.aC += rule.weights[i] * dmu_da * dmu_dc;
    f.CC += rule.weights[i] * dmu_dc * dmu_dc;
  }
  const double s2 = sigma * sigma;
  f.aa /= s2;
  f.aC /= s2;
  f.CC /= s2;
  return f;
}

std::optional<double> growth_rate_from_phi(const Vector& phi, double degenerate_below) {
  if (phi.size() != 2) throw std::invalid_argument("growth rate needs phi over {u_t, u}");
  if (std::abs(phi(0)) < degenerate_below) return std::nullopt;
  return -phi(1) / phi(0);
}

std::uint64_t trial_seed(std::uint64_t master, const std::string& case_name, double sigma, int trial) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", sigma);
  const std::string key = case_name + "|" + buf + "|" + std::to_string(trial);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : key) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return master + h;
}

OdeExperiment ode_experiment(const std::vector<double>& sigmas, int trials, int samples, std::uint64_t master_seed,
                             TrainConfig cfg, const LossWeights& w) {
  if (trials < 1) throw std::invalid_argument("ode_experiment needs trials >= 1");
  const EquationCase c = make_case("ode_exp");
  OdeExperiment out;
  cfg.num_samples = samples;
  for (double sigma : sigmas) {
    OdeLevel level;
    level.sigma = sigma;
    level.crlb = sigma > 0.0 ? crlb_bound({1.0, 1.0, sigma, samples}) : 0.0;
    double sum = 0.0;
    for (int t = 0; t < trials; ++t) {
      OdeTrial trial;
      trial.sigma = sigma;
      trial.trial = t;
      trial.seed = trial_seed(master_seed, c.name, sigma, t);
      cfg.seed = trial.seed;
      const Problem problem = make_problem(c, samples, sigma, trial.seed);
      const TrainResult r = train(problem, cfg, w);
      trial.err = recovery_error(r.phi, c.phi_star);
      if (auto a_hat = growth_rate_from_phi(r.phi)) {
        trial.a_hat = *a_hat;
        trial.squared_error = (*a_hat - 1.0) * (*a_hat - 1.0);
        sum += trial.squared_error;
        ++level.used_trials;
      } else {
        trial.degenerate = true;
        std::clog << "[ode] sigma=" << sigma << " trial " << t << ": phi_ut ~ 0, trial excluded\n";
      }
      out.trials.push_back(trial);
    }
    level.mse = level.used_trials > 0 ? sum / level.used_trials : std::numeric_limits<double>::quiet_NaN();
    out.levels.push_back(level);
  }
  return out;
}

}  // namespace pdenet
