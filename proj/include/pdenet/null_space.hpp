#pragma once

#include <stdexcept>

#include "pdenet/tape.hpp"

namespace pdenet {

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SymmetricEigen {
  Vector values;   // unsorted, as left by the sweeps
  Matrix vectors;  // column i pairs with values(i)
  int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a small symmetric matrix. Throws
/// ConvergenceError if the off-diagonal mass is not negligible after
/// max_sweeps.
SymmetricEigen jacobi_eigen(const Matrix& symmetric, int max_sweeps = 100);

struct SingularPair {
  double sigma_min = 0.0;
  /// sigma_second - sigma_min; zero for a 1-column matrix.
  double gap = 0.0;
  Vector vector;
};

/// Unit v minimizing |M v| (K >= L), from the Gram matrix M^T M.
/// Sign: first component with magnitude above 1e-10 is positive. Eigenvalues
/// within 1e-12 * sigma_max of the minimum count as tied; the tie goes to the
/// lowest Jacobi column.
SingularPair smallest_singular_vector(const Matrix& m);

/// Same, starting from a precomputed Gram matrix.
SingularPair smallest_singular_vector_from_gram(const Matrix& gram);

}  // namespace pdenet
