#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pdenet/datagen.hpp"

namespace pdenet {

namespace {

// Real Fourier coefficients for N nodes x_j = 2 pi j / N, packed as
// [a_0, a_1..a_{M-1}, b_1..b_{M-1}] with M = N/2; the Nyquist mode is dropped.
struct FourierBasis {
  int nodes;
  int half;

  explicit FourierBasis(int n) : nodes(n), half(n / 2) {
    if (n < 8 || n % 2 != 0) throw std::invalid_argument("HJB grid needs an even number of nodes >= 8");
  }

  int size() const { return 2 * half - 1; }

  Matrix analysis() const {
    Matrix f(size(), nodes);
    for (int j = 0; j < nodes; ++j) {
      const double x = 2.0 * std::numbers::pi * j / nodes;
      f(0, j) = 1.0 / nodes;
      for (int k = 1; k < half; ++k) {
        f(k, j) = 2.0 / nodes * std::cos(k * x);
        f(half - 1 + k, j) = 2.0 / nodes * std::sin(k * x);
      }
    }
    return f;
  }

  // Values of the `order`-th derivative of each basis function at the nodes.
  Matrix synthesis(int order) const {
    Matrix e(nodes, size());
    for (int j = 0; j < nodes; ++j) {
      const double x = 2.0 * std::numbers::pi * j / nodes;
      e(j, 0) = order == 0 ? 1.0 : 0.0;
      for (int k = 1; k < half; ++k) {
        const double scale = std::pow(static_cast<double>(k), order);
        const double shift = order * std::numbers::pi / 2.0;
        e(j, k) = scale * std::cos(k * x + shift);
        e(j, half - 1 + k) = scale * std::sin(k * x + shift);
      }
    }
    return e;
  }
};

/// Fourier coefficients of u and du/dt stored at every RK4 step; evaluation
/// uses cubic Hermite interpolation in time and the exact trigonometric
/// series in space.
class HjbSolution final : public Solution {
 public:
  explicit HjbSolution(const HjbSettings& s) : settings_(s), basis_(s.modes) {
    const int n = s.modes;
    steps_ = static_cast<int>(std::llround(s.t_end / s.dt));
    if (steps_ < 1) throw std::invalid_argument("HJB needs at least one time step");
    const Matrix analysis = basis_.analysis();
    const Matrix d1 = basis_.synthesis(1) * analysis;
    const Matrix d2 = basis_.synthesis(2) * analysis;

    auto rhs = [&](const Vector& u) -> Vector {
      const Vector ux = d1 * u;
      return d2 * u - u.cwiseAbs2() - ux.cwiseAbs2();
    };

    Vector u(n);
    for (int j = 0; j < n; ++j) u(j) = s.amplitude * std::sin(2.0 * std::numbers::pi * j / n);

    coeffs_.resize(basis_.size(), steps_ + 1);
    rates_.resize(basis_.size(), steps_ + 1);
    for (int step = 0; step <= steps_; ++step) {
      const Vector du = rhs(u);
      if (!du.allFinite()) throw std::runtime_error("HJB solve diverged at step " + std::to_string(step));
      coeffs_.col(step) = analysis * u;
      rates_.col(step) = analysis * du;
      if (step == steps_) break;
      const Vector k2 = rhs(u + 0.5 * s.dt * du);
      const Vector k3 = rhs(u + 0.5 * s.dt * k2);
      const Vector k4 = rhs(u + s.dt * k3);
      u += s.dt / 6.0 * (du + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }

  Jet jet(std::span<const double> x, int order) const override {
    if (order < 0 || order > kMaxJetOrder) throw std::invalid_argument("jet order must be in [0, 3]");
    const auto set = MultiIndexSet::full(2, order);
    // Time-derivative coefficient vectors c^(j)(t), j = 0..order.
    const double h = settings_.dt;
    const double t = std::clamp(x[1], 0.0, settings_.t_end);
    const int n = std::min(static_cast<int>(std::floor(t / h)), steps_ - 1);
    const double s = (t - n * h) / h;
    const double hermite[4][4] = {
        // h00, h10, h01, h11 and their s-derivatives
        {2 * s * s * s - 3 * s * s + 1, s * s * s - 2 * s * s + s, -2 * s * s * s + 3 * s * s, s * s * s - s * s},
        {6 * s * s - 6 * s, 3 * s * s - 4 * s + 1, -6 * s * s + 6 * s, 3 * s * s - 2 * s},
        {12 * s - 6, 6 * s - 4, -12 * s + 6, 6 * s - 2},
        {12, 6, -12, 6},
    };
    std::vector<Vector> c(static_cast<std::size_t>(order) + 1);
    for (int j = 0; j <= order; ++j) {
      const double scale = std::pow(h, -j);
      c[static_cast<std::size_t>(j)] =
          scale * (hermite[j][0] * coeffs_.col(n) + h * hermite[j][1] * rates_.col(n) +
                   hermite[j][2] * coeffs_.col(n + 1) + h * hermite[j][3] * rates_.col(n + 1));
    }

    const int half = basis_.half;
    Jet out(set);
    for (std::size_t i = 0; i < set->size(); ++i) {
      const int dx = (*set)[i][0];
      const int dt = (*set)[i][1];
      const Vector& cj = c[static_cast<std::size_t>(dt)];
      double acc = dx == 0 ? cj(0) : 0.0;
      const double shift = dx * std::numbers::pi / 2.0;
      for (int k = 1; k < half; ++k) {
        const double scale = std::pow(static_cast<double>(k), dx);
        acc += scale * (cj(k) * std::cos(k * x[0] + shift) + cj(half - 1 + k) * std::sin(k * x[0] + shift));
      }
      out[i] = acc;
    }
    return out;
  }

 private:
  HjbSettings settings_;
  FourierBasis basis_;
  int steps_ = 0;
  Matrix coeffs_;
  Matrix rates_;
};

}  // namespace

std::shared_ptr<const Solution> solve_hjb(const HjbSettings& settings) {
  return std::make_shared<HjbSolution>(settings);
}

}  // namespace pdenet
