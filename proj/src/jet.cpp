#include "pdenet/jet.hpp"

#include <cmath>
#include <stdexcept>

namespace pdenet {

Jet::Jet(std::shared_ptr<const MultiIndexSet> set) : set_(std::move(set)), coeffs_(set_->size(), 0.0) {
  if (set_->order() > kMaxJetOrder) throw std::logic_error("jet order above 3");
}

Jet Jet::constant(std::shared_ptr<const MultiIndexSet> set, double value) {
  Jet j(std::move(set));
  j.coeffs_[0] = value;
  return j;
}

Jet Jet::variable(std::shared_ptr<const MultiIndexSet> set, double value, int coordinate) {
  Jet j(std::move(set));
  j.coeffs_[0] = value;
  if (auto p = j.set_->unit(coordinate)) j.coeffs_[*p] = 1.0;
  return j;
}

void require_same_shape(const Jet& a, const Jet& b) {
  if (a.index_set() != b.index_set() && !(a.indices() == b.indices()))
    throw std::logic_error("jet arithmetic on mismatched order/dims");
}

Jet& Jet::operator+=(const Jet& other) {
  require_same_shape(*this, other);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& other) {
  require_same_shape(*this, other);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator-(Jet a) { return a *= -1.0; }
Jet operator*(double s, Jet a) { return a *= s; }
Jet operator*(Jet a, double s) { return a *= s; }
Jet operator+(Jet a, double s) {
  a[0] += s;
  return a;
}
Jet operator+(double s, Jet a) { return std::move(a) + s; }
Jet operator-(Jet a, double s) {
  a[0] -= s;
  return a;
}

Jet operator*(const Jet& a, const Jet& b) {
  require_same_shape(a, b);
  const MultiIndexSet& set = a.indices();
  Jet out(a.index_set());
  for (std::size_t i = 0; i < set.size(); ++i) {
    double acc = 0.0;
    for (const auto& t : set.leibniz(i)) acc += t.coefficient * a[t.left] * b[t.right];
    out[i] = acc;
  }
  return out;
}

Jet compose(const Jet& a, std::span<const double> derivatives) {
  const MultiIndexSet& set = a.indices();
  if (static_cast<int>(derivatives.size()) <= set.order())
    throw std::logic_error("compose needs derivatives up to the jet order");
  Jet out(a.index_set());
  out[0] = derivatives[0];
  for (std::size_t i = 1; i < set.size(); ++i) {
    double acc = 0.0;
    for (const auto& p : set.partitions(i)) {
      double term = p.multiplicity * derivatives[p.blocks.size()];
      for (std::size_t b : p.blocks) term *= a[b];
      acc += term;
    }
    out[i] = acc;
  }
  return out;
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::array<double, 5> softplus_derivatives(double x) {
  const double s = logistic(x);
  const double d2 = s * (1.0 - s);
  return {softplus(x), s, d2, d2 * (1.0 - 2.0 * s), d2 * (1.0 - 6.0 * s + 6.0 * s * s)};
}

Jet jet_softplus(const Jet& a) {
  const auto d = softplus_derivatives(a.value());
  return compose(a, d);
}

Jet exp(const Jet& a) {
  const double e = std::exp(a.value());
  const std::array<double, 4> d{e, e, e, e};
  return compose(a, d);
}

Jet sin(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const std::array<double, 4> d{s, c, -s, -c};
  return compose(a, d);
}

Jet cos(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const std::array<double, 4> d{c, -s, -c, s};
  return compose(a, d);
}

Jet reciprocal(const Jet& a) {
  const double r = 1.0 / a.value();
  const std::array<double, 4> d{r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r};
  return compose(a, d);
}

Jet square(const Jet& a) { return a * a; }

}  // namespace pdenet
