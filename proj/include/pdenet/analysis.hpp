#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pdenet/tape.hpp"
#include "pdenet/training.hpp"

namespace pdenet {

/// sqrt(1 - |phi . phi_star| / (|phi| |phi_star|)), in [0, 1]; zero iff the
/// vectors are collinear. Throws std::invalid_argument for a zero vector.
double recovery_error(const Vector& phi, const Vector& phi_star);

/// Noisy observation of u(t) = C e^{a t} on t ~ U[0, 1].
struct CrlbParams {
  double a = 1.0;
  double amplitude = 1.0;  // C
  double sigma = 1.0;
  long samples = 1000;     // J

  void validate() const;
};

/// Closed-form lower bound on E[(a_hat - a)^2] for unbiased estimators:
/// 8 sigma^2 / (C^2 J) * a^3 e^{-a} sinh a / (cosh 2a - 1 - 2a^2),
/// continued through a = 0 by its Taylor series.
double crlb_bound(const CrlbParams& p);

struct FisherMatrix {
  double aa = 0.0;
  double aC = 0.0;
  double CC = 0.0;

  /// (F^{-1})_aa.
  double inverse_aa() const { return CC / (aa * CC - aC * aC); }
};

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [lo, hi].
QuadratureRule gauss_legendre(int n, double lo = -1.0, double hi = 1.0);

/// Fisher information of (a, C) per observation: the Gaussian y-integral in
/// closed form, the t-integral over [0, 1] by 64-point Gauss-Legendre.
FisherMatrix fisher_numeric(double a, double amplitude, double sigma);

/// a_hat from a recovered coefficient vector over the dictionary {u_t, u}:
/// u_t - a u = 0 gives a = -phi_u / phi_ut.
std::optional<double> growth_rate_from_phi(const Vector& phi, double degenerate_below = 1e-8);

struct OdeTrial {
  double sigma = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  bool degenerate = false;
  double a_hat = 0.0;
  double squared_error = 0.0;
  double err = 0.0;  // recovery_error of phi
};

struct OdeLevel {
  double sigma = 0.0;
  double mse = 0.0;     // over non-degenerate trials
  double crlb = 0.0;
  int used_trials = 0;
};

struct OdeExperiment {
  std::vector<OdeTrial> trials;
  std::vector<OdeLevel> levels;
};

/// Seed of trial t at noise sigma for a named case: master + FNV-1a of
/// "case|sigma|trial".
std::uint64_t trial_seed(std::uint64_t master, const std::string& case_name, double sigma, int trial);

/// Trains on u = e^t data for every (sigma, trial) and pairs the empirical MSE
/// of a_hat with crlb_bound(a = 1, C = 1, sigma, J).
OdeExperiment ode_experiment(const std::vector<double>& sigmas, int trials, int samples, std::uint64_t master_seed,
                             TrainConfig cfg, const LossWeights& w);

}  // namespace pdenet
