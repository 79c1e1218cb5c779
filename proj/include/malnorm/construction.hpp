#pragma once

#include <string_view>
#include <vector>

#include "malnorm/core/errors.hpp"
#include "malnorm/core/matrix.hpp"
#include "malnorm/expanders.hpp"
#include "malnorm/malnormality.hpp"

namespace malnorm {

/// The 3n x 3n block matrix
///   [ 0   2U  0 ]
///   [ 0   0   V ]
///   [ 3I  2I  I ]
template <MatrixScalar S>
Matrix<S> build_X(const Matrix<S>& u, const Matrix<S>& v, double unitarity_tol = 1e-8) {
  require_square(u, "build_X");
  if (u.rows() != v.rows() || u.cols() != v.cols()) throw InputError("build_X: U and V differ in size");
  if (unitarity_defect(u) > unitarity_tol || unitarity_defect(v) > unitarity_tol) {
    throw InputError("build_X: U and V must be unitary");
  }
  const std::size_t n = u.rows();
  Matrix<S> x(3 * n, 3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      x(i, n + j) = S(2.0) * u(i, j);
      x(n + i, 2 * n + j) = v(i, j);
    }
    x(2 * n + i, i) = S(3.0);
    x(2 * n + i, n + i) = S(2.0);
    x(2 * n + i, 2 * n + i) = S(1.0);
  }
  return x;
}

enum class CertificateStatus { pass, fail };

inline std::string_view to_string(CertificateStatus s) {
  return s == CertificateStatus::pass ? "PASS" : "FAIL";
}

struct ConstructionCertificate {
  std::size_t n = 0;
  double delta = 0.0;      // eh_norm of (U, V)
  double x_opnorm = 0.0;
  double mal_X = 0.0;
  double mal_scaled = 0.0;  // mal of X / ||X||
  MalSolver solver = MalSolver::lanczos;
  BasisFlavor flavor = BasisFlavor::complex_hermitian;
  double resolution = 0.0;
  CertificateStatus status = CertificateStatus::fail;
};

struct CertifyOptions {
  double tol = 1e-8;            // solver tolerance
  double resolution = 1e-6;     // mal_X must exceed this to count as positive
  MalSolver solver = MalSolver::lanczos;
};

/// PASS when the pair has delta < 1 and mal(X) clears the resolution.
template <MatrixScalar S>
ConstructionCertificate certify(const Matrix<S>& u, const Matrix<S>& v,
                                std::optional<BasisFlavor> flavor = {}, CertifyOptions opts = {}) {
  const Matrix<S> x = build_X(u, v);
  const BasisFlavor fl = flavor.value_or(default_flavor_for(x));
  ConstructionCertificate c;
  c.n = u.rows();
  c.flavor = fl;
  c.solver = opts.solver;
  c.resolution = opts.resolution;
  const std::vector<Matrix<S>> pair{u, v};
  c.delta = eh_norm<S>(pair, fl, ExpanderOptions{opts.tol, 0});
  c.x_opnorm = operator_norm(x);
  c.mal_X = compute_mal(x, opts.solver, fl, opts.tol).value;
  c.mal_scaled = c.x_opnorm > 0.0 ? c.mal_X / c.x_opnorm : 0.0;
  c.status = (c.delta < 1.0 - opts.tol && c.mal_X > opts.resolution) ? CertificateStatus::pass
                                                                     : CertificateStatus::fail;
  return c;
}

}  // namespace malnorm
