#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pdenet/dictionary.hpp"
#include "pdenet/jet.hpp"
#include "pdenet/random.hpp"
#include "pdenet/training.hpp"

namespace pdenet {

/// Reference solution u with exact derivatives. Implementations are
/// read-only after construction and safe to share between threads.
class Solution {
 public:
  virtual ~Solution() = default;
  /// Jet of u at x with every derivative up to `order` (<= 3).
  virtual Jet jet(std::span<const double> x, int order) const = 0;
  virtual double value(std::span<const double> x) const { return jet(x, 0).value(); }
};

/// A named PDE with its domain, reference solution, dictionary and unit
/// ground-truth coefficients (in dictionary term order).
struct EquationCase {
  std::string name;
  std::vector<std::string> variables;
  Box domain;
  std::shared_ptr<const Solution> solution;
  DictionarySpec dictionary;
  Vector phi_star;
  double residual_tolerance = 1e-10;
};

/// The catalog: wave, helmholtz, inviscid, kdv, vortex, hjb, ode_exp.
std::vector<std::string> case_names();
/// Throws std::invalid_argument for an unknown name. hjb runs its solver on
/// first use and caches the result.
EquationCase make_case(const std::string& name);

/// N(0, sigma^2). One normal variate is consumed even for sigma = 0 so the
/// stream does not depend on sigma.
double gaussian_noise(Rng& rng, double sigma);

struct Dataset {
  Matrix points;  // dims x J
  Vector values;  // u(x) + noise
  Vector clean;   // u(x)
};

Dataset sample_dataset(const EquationCase& c, int samples, double sigma, std::uint64_t seed);
Problem make_problem(const EquationCase& c, int samples, double sigma, std::uint64_t seed);

/// Tensor grid with ceil(count^(1/dims)) nodes per axis, endpoints included.
Matrix grid_points(const Box& box, int count);

/// Exact jets of the reference solution at every column of points.
std::vector<Jet> oracle_jets(const EquationCase& c, const Matrix& points, int order);

struct ResidualReport {
  double max_residual = 0.0;
  Vector worst_point;
  double tolerance = 0.0;
  bool passed = false;
};

/// max |sum_i phi_i D_i(u, x)| over the grid. Uses the case's phi_star unless
/// phi is given.
ResidualReport residual_check(const EquationCase& c, int grid_size, double tolerance,
                              const Vector* phi = nullptr);

/// Grid solution of u_{x1} = u_{x0x0} - u^2 - u_{x0}^2, 2pi-periodic in x0,
/// by Fourier collocation and classical RK4.
struct HjbSettings {
  int modes = 256;
  double dt = 1e-4;
  double t_end = 0.5;
  double amplitude = 0.2;  // u(x0, 0) = amplitude * sin(x0)
};

std::shared_ptr<const Solution> solve_hjb(const HjbSettings& settings);

}  // namespace pdenet
