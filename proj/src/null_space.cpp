#include "pdenet/null_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pdenet {

SymmetricEigen jacobi_eigen(const Matrix& symmetric, int max_sweeps) {
  const Eigen::Index n = symmetric.rows();
  if (symmetric.cols() != n) throw std::invalid_argument("jacobi_eigen needs a square matrix");
  Matrix a = 0.5 * (symmetric + symmetric.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double scale = a.norm();
  SymmetricEigen out;

  auto off_diagonal = [&] {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return std::sqrt(2.0 * s);
  };

  const double threshold = std::numeric_limits<double>::epsilon() * 1e-3 * scale;
  for (int sweep = 0; sweep <= max_sweeps; ++sweep) {
    if (scale == 0.0 || off_diagonal() <= threshold) {
      out.sweeps = sweep;
      out.values = a.diagonal();
      out.vectors = std::move(v);
      return out;
    }
    if (sweep == max_sweeps) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation that zeroes a(p,q) (Golub & Van Loan, symmetric Schur).
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  throw ConvergenceError("Jacobi eigendecomposition did not converge after " + std::to_string(max_sweeps) + " sweeps");
}

SingularPair smallest_singular_vector_from_gram(const Matrix& gram) {
  const SymmetricEigen eig = jacobi_eigen(gram);
  const Eigen::Index n = gram.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return eig.values(i) < eig.values(j); });

  auto sigma = [&](Eigen::Index i) { return std::sqrt(std::max(eig.values(i), 0.0)); };
  const double sigma_max = sigma(order.back());
  const double sigma_min = sigma(order.front());
  const double tie = 1e-12 * sigma_max;

  Eigen::Index chosen = order.front();
  for (Eigen::Index i : order)
    if (sigma(i) - sigma_min <= tie) chosen = std::min(chosen, i);

  SingularPair out;
  out.sigma_min = sigma_min;
  out.gap = n > 1 ? sigma(order[1]) - sigma_min : 0.0;
  out.vector = eig.vectors.col(chosen);
  out.vector /= out.vector.norm();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(out.vector(i)) > 1e-10) {
      if (out.vector(i) < 0.0) out.vector = -out.vector;
      break;
    }
  }
  return out;
}

SingularPair smallest_singular_vector(const Matrix& m) {
  if (m.rows() < m.cols()) throw std::invalid_argument("smallest_singular_vector needs K >= L");
  const Matrix gram = m.transpose() * m;
  SingularPair out = smallest_singular_vector_from_gram(gram);
  // Recompute from the matrix itself: sqrt of a tiny Gram eigenvalue is noisy.
  out.sigma_min = (m * out.vector).norm();
  return out;
}

}  // namespace pdenet
