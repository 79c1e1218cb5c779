#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "malnorm/basis.hpp"
#include "malnorm/core/errors.hpp"
#include "malnorm/core/lanczos.hpp"
#include "malnorm/core/matrix.hpp"
#include "malnorm/core/symmetric_eig.hpp"
#include "malnorm/random.hpp"

namespace malnorm {

enum class MalSolver { dense, lanczos, local_opt };

inline std::string_view to_string(MalSolver s) {
  switch (s) {
    case MalSolver::dense: return "dense";
    case MalSolver::lanczos: return "lanczos";
    case MalSolver::local_opt: return "local-opt";
  }
  return "dense";
}

inline MalSolver parse_mal_solver(std::string_view s) {
  if (s == "dense" || s == "exact") return MalSolver::dense;
  if (s == "lanczos" || s == "iterative") return MalSolver::lanczos;
  if (s == "local-opt" || s == "localopt") return MalSolver::local_opt;
  throw InputError("unknown solver '" + std::string(s) + "'");
}

/// Outcome of a malnormality computation. `value` = sqrt(max(lambda1, 0)/2),
/// where lambda1 is the smallest eigenvalue of the Hessian H(X) and
/// `minimizer` the corresponding unit coordinate vector.
struct MalResult {
  double value = 0.0;
  std::vector<double> minimizer;
  double lambda1 = 0.0;
  MalSolver solver = MalSolver::dense;
  BasisFlavor flavor = BasisFlavor::real_symmetric;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
};

inline double mal_from_lambda(double lambda1) { return std::sqrt(std::max(lambda1, 0.0) / 2.0); }

/// The quadratic form f(b) = ||[X, phi(b)]||_2^2 = (1/2) b^T H b on the
/// coordinates of the traceless self-adjoint matrices. Holds X and the basis;
/// the dense Hessian is optional.
template <MatrixScalar S>
class HessianOperator {
 public:
  HessianOperator(Matrix<S> x, TracelessHermitianBasis basis)
      : x_(std::move(x)), x_adj_(adjoint(x_)), basis_(std::move(basis)) {
    require_square(x_, "HessianOperator");
    if (x_.rows() != basis_.n()) throw InputError("HessianOperator: X and basis sizes differ");
    if constexpr (!is_complex_v<S>) {
      if (basis_.flavor() == BasisFlavor::complex_hermitian) {
        throw InputError("HessianOperator: complex-hermitian flavor needs a complex X");
      }
    }
  }

  const Matrix<S>& x() const noexcept { return x_; }
  const TracelessHermitianBasis& basis() const noexcept { return basis_; }
  std::size_t dim() const noexcept { return basis_.dim(); }
  bool has_dense() const noexcept { return dense_.has_value(); }
  const RealMatrix& dense() const {
    if (!dense_) throw Error("HessianOperator: dense Hessian was not built");
    return *dense_;
  }

  /// H_ij = 2 Re <[X, E_i], [X, E_j]>, assembled as a Gram matrix of the
  /// commutators with each (sparse) basis element.
  void materialize() {
    if (dense_) return;
    const std::size_t n = x_.rows();
    const std::size_t d = dim();
    constexpr std::size_t width = is_complex_v<S> ? 2 : 1;
    const std::size_t len = n * n * width;
    std::vector<double> comms(d * len, 0.0);
    Matrix<S> c(n, n);
    for (std::size_t k = 0; k < d; ++k) {
      std::fill(c.entries().begin(), c.entries().end(), S{});
      for (const auto& e : basis_.template sparse_element<S>(k)) {
        // XE: column e.col gains X(:, e.row) * v; EX: row e.row gains v * X(e.col, :).
        for (std::size_t p = 0; p < n; ++p) c(p, e.col) += x_(p, e.row) * e.value;
        for (std::size_t q = 0; q < n; ++q) c(e.row, q) -= e.value * x_(e.col, q);
      }
      const double* src = reinterpret_cast<const double*>(c.data());
      std::copy(src, src + len, comms.begin() + static_cast<std::ptrdiff_t>(k * len));
    }
    RealMatrix h(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      const double* ci = comms.data() + i * len;
      for (std::size_t j = 0; j <= i; ++j) {
        const double* cj = comms.data() + j * len;
        double acc = 0.0;
        for (std::size_t t = 0; t < len; ++t) acc += ci[t] * cj[t];
        h(i, j) = h(j, i) = 2.0 * acc;
      }
    }
    dense_ = std::move(h);
  }

  /// Matrix-free H b = 2 phi^{-1}(P([X*, [X, phi(b)]])).
  std::vector<double> apply_matrix_free(std::span<const double> b) const {
    if (b.size() != dim()) throw DimensionError("apply_hessian: vector has wrong length");
    const Matrix<S> bm = basis_.template phi<S>(b);
    const Matrix<S> c = x_ * bm - bm * x_;
    const Matrix<S> g = x_adj_ * c - c * x_adj_;
    std::vector<double> out = basis_.coordinates(project_traceless_hermitian(g, basis_.flavor()));
    for (auto& v : out) v *= 2.0;
    return out;
  }

  /// H b, using the dense Hessian when it has been built.
  std::vector<double> apply(std::span<const double> b) const {
    if (!dense_) return apply_matrix_free(b);
    if (b.size() != dim()) throw DimensionError("apply_hessian: vector has wrong length");
    return matvec(*dense_, b);
  }

  /// f(b) = ||[X, phi(b)]||_2^2.
  double quadratic_form(std::span<const double> b) const {
    const Matrix<S> bm = basis_.template phi<S>(b);
    return hs_norm_squared(commutator(x_, bm));
  }

 private:
  Matrix<S> x_;
  Matrix<S> x_adj_;
  TracelessHermitianBasis basis_;
  std::optional<RealMatrix> dense_;
};

/// Dense Hessian operator for X in the given basis.
template <MatrixScalar S>
HessianOperator<S> build_hessian(const Matrix<S>& x, const TracelessHermitianBasis& basis) {
  HessianOperator<S> op(x, basis);
  op.materialize();
  return op;
}

template <MatrixScalar S>
std::vector<double> apply_hessian(const HessianOperator<S>& op, std::span<const double> b) {
  return op.apply_matrix_free(b);
}

template <MatrixScalar S>
BasisFlavor default_flavor_for(const Matrix<S>&) {
  return is_complex_v<S> ? BasisFlavor::complex_hermitian : BasisFlavor::real_symmetric;
}

namespace detail {

// Calls fn(matrix) with X in the scalar type the flavor needs: the complex
// flavor forces complex arithmetic, the real flavor keeps X as given.
template <MatrixScalar S, typename Fn>
auto with_flavor_scalar(const Matrix<S>& x, BasisFlavor flavor, Fn&& fn) {
  if constexpr (is_complex_v<S>) {
    return fn(x);
  } else {
    if (flavor == BasisFlavor::complex_hermitian) return fn(to_complex(x));
    return fn(x);
  }
}

inline std::vector<double> residual_vector(std::span<const double> hb, double lambda,
                                           std::span<const double> b) {
  std::vector<double> r(hb.begin(), hb.end());
  axpy(-lambda, b, r);
  return r;
}

}  // namespace detail

/// mal(X) from the smallest eigenvalue of the dense Hessian.
template <MatrixScalar S>
MalResult mal_exact(const Matrix<S>& x, std::optional<BasisFlavor> flavor = {}) {
  require_square(x, "mal_exact");
  if (x.rows() < 2) throw InputError("mal_exact: n must be at least 2");
  const BasisFlavor fl = flavor.value_or(default_flavor_for(x));
  return detail::with_flavor_scalar(x, fl, [&](const auto& xs) {
    auto op = build_hessian(xs, build_basis(xs.rows(), fl));
    const auto pair = symmetric_lowest_eigenpair(op.dense());
    MalResult r;
    r.lambda1 = pair.values.front();
    r.value = mal_from_lambda(r.lambda1);
    r.minimizer = pair.vector;
    r.solver = MalSolver::dense;
    r.flavor = fl;
    const auto hb = op.apply(r.minimizer);
    r.residual = norm2(detail::residual_vector(hb, r.lambda1, r.minimizer));
    r.iterations = 1;
    return r;
  });
}

struct MalIterativeOptions {
  double tol = 1e-10;
  std::size_t max_iterations = 0;  // 0: dimension of the coordinate space
};

/// mal(X) by matrix-free Lanczos on sigma I - H with sigma = 8 ||X||^2, so the
/// smallest eigenvalue of H is the largest of the shifted operator.
template <MatrixScalar S>
MalResult mal_iterative(const Matrix<S>& x, std::optional<BasisFlavor> flavor = {},
                        MalIterativeOptions opts = {}) {
  require_square(x, "mal_iterative");
  if (x.rows() < 2) throw InputError("mal_iterative: n must be at least 2");
  if (!(opts.tol > 0.0)) throw InputError("mal_iterative: tol must be positive");
  const BasisFlavor fl = flavor.value_or(default_flavor_for(x));
  return detail::with_flavor_scalar(x, fl, [&](const auto& xs) {
    HessianOperator op(xs, build_basis(xs.rows(), fl));
    const double xnorm = operator_norm(xs);
    const double sigma = 8.0 * xnorm * xnorm;
    const LinearOperator shifted = [&](std::span<const double> in, std::span<double> out) {
      const auto hb = op.apply_matrix_free(in);
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = sigma * in[i] - hb[i];
    };
    LanczosOptions lopts;
    // Lanczos scales its test by the Ritz value (about sigma here); undo that
    // so `tol` bounds the residual of H itself.
    lopts.tol = opts.tol / std::max(1.0, sigma);
    lopts.max_iterations = opts.max_iterations;
    lopts.check_every = 5;
    const auto res = lanczos_extremes(shifted, op.dim(), SpectrumEnd::highest, lopts);
    MalResult r;
    r.minimizer = res.highest.vector;
    // Rayleigh quotient of the Ritz vector: avoids the cancellation in sigma - theta.
    const auto hb = op.apply_matrix_free(r.minimizer);
    r.lambda1 = dot(r.minimizer, hb);
    r.value = mal_from_lambda(r.lambda1);
    r.solver = MalSolver::lanczos;
    r.flavor = fl;
    r.residual = norm2(detail::residual_vector(hb, r.lambda1, r.minimizer));
    r.iterations = res.iterations;
    r.converged = res.converged;
    return r;
  });
}

struct LocalOptOptions {
  double stationarity_tol = 1e-10;  // on ||Hb - (b^T H b) b||
  std::size_t max_iterations = 500000;
  double initial_step = 1.0;
  double shrink = 0.5;
  double armijo_slope = 1e-4;
  std::size_t dense_limit = 1200;  // build the dense Hessian up to this dimension
};

/// mal(X) by projected gradient descent on the unit sphere of coordinates,
/// b <- normalize(b - eta g) with g = Hb - (b^T H b) b and eta from Armijo
/// backtracking. Any local minimizer of the quadratic on the sphere is a
/// global one, so the returned value agrees with mal_exact.
template <MatrixScalar S>
MalResult mal_localopt(const Matrix<S>& x, std::optional<BasisFlavor> flavor,
                       std::uint64_t seed, LocalOptOptions opts = {}) {
  require_square(x, "mal_localopt");
  if (x.rows() < 2) throw InputError("mal_localopt: n must be at least 2");
  const BasisFlavor fl = flavor.value_or(default_flavor_for(x));
  return detail::with_flavor_scalar(x, fl, [&](const auto& xs) {
    HessianOperator op(xs, build_basis(xs.rows(), fl));
    if (op.dim() <= opts.dense_limit) op.materialize();
    const std::size_t d = op.dim();

    SeededStream stream(seed, 0);
    std::vector<double> b(d);
    for (std::size_t i = 0; i < d; i += 2) {
      const auto [z0, z1] = stream.next_normal_pair();
      b[i] = z0;
      if (i + 1 < d) b[i + 1] = z1;
    }
    scale(b, 1.0 / norm2(b));

    std::vector<double> hb = op.apply(b);
    std::vector<double> g(d);
    double rho = dot(b, hb);
    std::size_t it = 0;
    for (;; ++it) {
      for (std::size_t i = 0; i < d; ++i) g[i] = hb[i] - rho * b[i];
      const double gn2 = dot(g, g);
      if (std::sqrt(gn2) <= opts.stationarity_tol) break;
      if (it >= opts.max_iterations) {
        throw ConvergenceError("mal_localopt: iteration cap reached", mal_from_lambda(rho), b);
      }
      // Along the great circle through b in direction -g (b is orthogonal to g):
      // f(eta) = (rho - 2 eta |g|^2 + eta^2 g^T H g) / (2 (1 + eta^2 |g|^2)).
      // The Armijo test is taken on (f(eta) - f(0)) / (eta |g|^2), which has
      // no cancellation even when the decrease is far below the ulp of f.
      const std::vector<double> hg = op.apply(g);
      const double q = dot(g, hg) / gn2 - rho;
      double eta = opts.initial_step;
      for (;;) {
        const double slope = (-2.0 + eta * q) / (2.0 * (1.0 + eta * eta * gn2));
        if (slope <= -opts.armijo_slope) break;
        eta *= opts.shrink;
        if (eta < 1e-30) break;
      }
      if (eta < 1e-30) {
        // No descent left at working precision: b is stationary.
        break;
      }
      // Normalize by the actual length, not sqrt(1 + eta^2 |g|^2): drift off the
      // sphere feeds back through g and grows geometrically otherwise.
      for (std::size_t i = 0; i < d; ++i) {
        b[i] -= eta * g[i];
        hb[i] -= eta * hg[i];
      }
      const double len = norm2(b);
      scale(b, 1.0 / len);
      scale(hb, 1.0 / len);
      if (it % 64 == 63) hb = op.apply(b);
      rho = dot(b, hb);
    }
    scale(b, 1.0 / norm2(b));
    hb = op.apply(b);
    rho = dot(b, hb);
    MalResult r;
    r.lambda1 = rho;
    r.value = mal_from_lambda(rho);
    r.minimizer = b;
    r.solver = MalSolver::local_opt;
    r.flavor = fl;
    r.residual = norm2(detail::residual_vector(hb, rho, b));
    r.iterations = it;
    return r;
  });
}

/// Dispatch on the solver tag. `tol` is the Lanczos tolerance.
template <MatrixScalar S>
MalResult compute_mal(const Matrix<S>& x, MalSolver solver, std::optional<BasisFlavor> flavor,
                      double tol = 1e-10, std::uint64_t seed = 0) {
  switch (solver) {
    case MalSolver::dense: return mal_exact(x, flavor);
    case MalSolver::lanczos: return mal_iterative(x, flavor, MalIterativeOptions{tol, 0});
    case MalSolver::local_opt: return mal_localopt(x, flavor, seed);
  }
  return mal_exact(x, flavor);
}

/// The n x n shift matrix: ones on the first superdiagonal.
inline RealMatrix shift_matrix(std::size_t n) {
  RealMatrix s(n, n);
  for (std::size_t i = 0; i + 1 < n; ++i) s(i, i + 1) = 1.0;
  return s;
}

struct ShiftScanRow {
  std::size_t n;
  double mal;
  double mal_sqrt_n;
};

inline std::vector<ShiftScanRow> shift_scan(std::span<const std::size_t> sizes) {
  std::vector<ShiftScanRow> rows;
  rows.reserve(sizes.size());
  for (std::size_t n : sizes) {
    if (n < 2) throw InputError("shift_scan: n must be at least 2");
    const double m = mal_exact(shift_matrix(n)).value;
    rows.push_back({n, m, m * std::sqrt(static_cast<double>(n))});
  }
  return rows;
}

}  // namespace malnorm
