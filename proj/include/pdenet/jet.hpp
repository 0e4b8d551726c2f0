#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "pdenet/multi_index.hpp"

namespace pdenet {

inline constexpr int kMaxJetOrder = 3;

/// Truncated multivariate Taylor expansion at a point. coeffs[i] holds the
/// partial derivative D^alpha f for alpha = indices()[i] (not the Taylor
/// coefficient; no 1/alpha! factors).
///
/// Arithmetic between jets over different index sets is a programming error
/// and throws std::logic_error.
class Jet {
 public:
  Jet() = default;
  explicit Jet(std::shared_ptr<const MultiIndexSet> set);

  static Jet constant(std::shared_ptr<const MultiIndexSet> set, double value);
  /// The coordinate function x_i evaluated at `value`.
  static Jet variable(std::shared_ptr<const MultiIndexSet> set, double value, int coordinate);

  const MultiIndexSet& indices() const { return *set_; }
  const std::shared_ptr<const MultiIndexSet>& index_set() const { return set_; }
  std::size_t size() const { return coeffs_.size(); }
  int order() const { return set_->order(); }
  int dims() const { return set_->dims(); }

  double value() const { return coeffs_[0]; }
  double operator[](std::size_t i) const { return coeffs_[i]; }
  double& operator[](std::size_t i) { return coeffs_[i]; }
  /// D^alpha; throws std::out_of_range if alpha is outside the set.
  double at(const MultiIndex& alpha) const { return coeffs_[set_->position(alpha)]; }
  std::span<const double> coeffs() const { return coeffs_; }
  std::span<double> coeffs() { return coeffs_; }

  Jet& operator+=(const Jet& other);
  Jet& operator-=(const Jet& other);
  Jet& operator*=(double s);

 private:
  std::shared_ptr<const MultiIndexSet> set_;
  std::vector<double> coeffs_;
};

void require_same_shape(const Jet& a, const Jet& b);

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator-(Jet a);
Jet operator*(const Jet& a, const Jet& b);
Jet operator*(double s, Jet a);
Jet operator*(Jet a, double s);
Jet operator+(Jet a, double s);
Jet operator+(double s, Jet a);
Jet operator-(Jet a, double s);

inline Jet jet_add(const Jet& a, const Jet& b) { return a + b; }
inline Jet jet_mul(const Jet& a, const Jet& b) { return a * b; }

/// f(a) for a univariate f, given f, f', ..., f^(order) evaluated at a.value().
Jet compose(const Jet& a, std::span<const double> derivatives);

/// log(1 + e^x) without overflow.
double softplus(double x);
/// 1 / (1 + e^-x) without overflow.
double logistic(double x);
/// softplus and its first four derivatives at x.
std::array<double, 5> softplus_derivatives(double x);

Jet jet_softplus(const Jet& a);
Jet exp(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet reciprocal(const Jet& a);
Jet square(const Jet& a);

}  // namespace pdenet
