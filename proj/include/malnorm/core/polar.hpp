#pragma once

#include <cmath>

#include "malnorm/core/errors.hpp"
#include "malnorm/core/matrix.hpp"

namespace malnorm {

struct PolarOptions {
  double rank_tol = 1e-12;  // smallest singular value relative to the largest
  std::size_t max_iterations = 100;
};

/// Unitary (orthogonal, for real input) factor U of the polar decomposition
/// Y = U|Y|, by scaled Newton iteration U <- (z U + (z U)^{-*}) / 2 with the
/// Frobenius-norm scaling z = sqrt(||U^{-1}|| / ||U||).
template <MatrixScalar S>
Matrix<S> polar_unitary(const Matrix<S>& y, PolarOptions opts = {}) {
  require_square(y, "polar_unitary");
  const std::size_t n = y.rows();
  if (n == 0) return y;
  const double stop = 1e-12 * std::sqrt(static_cast<double>(n));

  Matrix<S> u = y;
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    Matrix<S> inv;
    try {
      inv = inverse(u);
    } catch (const SingularityError&) {
      throw SingularityError("polar_unitary: input is rank deficient");
    }
    const double nu = hs_norm(u);
    const double ninv = hs_norm(inv);
    if (it == 0) {
      // ||Y||_F ||Y^{-1}||_F >= sigma_max / sigma_min.
      if (!std::isfinite(ninv) || nu * ninv * opts.rank_tol > static_cast<double>(n)) {
        throw SingularityError("polar_unitary: input is numerically rank deficient");
      }
    }
    const double z = std::sqrt(ninv / nu);
    Matrix<S> next = adjoint(inv);
    next *= S(0.5 / z);
    Matrix<S> scaled = u;
    scaled *= S(0.5 * z);
    next += scaled;
    const double change = hs_distance(next, u);
    u = std::move(next);
    if (change < stop) return u;
  }
  throw ConvergenceError("polar_unitary: Newton iteration did not converge", unitarity_defect(u));
}

}  // namespace malnorm
