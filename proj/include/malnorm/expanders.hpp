#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "malnorm/basis.hpp"
#include "malnorm/core/errors.hpp"
#include "malnorm/core/lanczos.hpp"
#include "malnorm/core/matrix.hpp"
#include "malnorm/ensembles.hpp"
#include "malnorm/malnormality.hpp"

namespace malnorm {

namespace detail {

template <MatrixScalar S>
void check_tuple(std::span<const Matrix<S>> us, double unitarity_tol = 1e-8) {
  if (us.empty()) throw InputError("unitary tuple is empty");
  const std::size_t n = us.front().rows();
  for (const auto& u : us) {
    require_square(u, "unitary tuple");
    if (u.rows() != n) throw DimensionError("unitary tuple: matrices differ in size");
    if (unitarity_defect(u) > unitarity_tol) throw InputError("unitary tuple: matrix is not unitary");
  }
}

template <MatrixScalar S>
void check_operand(std::span<const Matrix<S>> us, const Matrix<S>& x) {
  require_square(x, "superoperator");
  if (x.rows() != us.front().rows()) throw DimensionError("superoperator: operand size differs");
}

// (1/k) sum U_i* X U_i without the input checks.
template <MatrixScalar S>
Matrix<S> apply_E_unchecked(std::span<const Matrix<S>> us, std::span<const Matrix<S>> us_adj,
                            const Matrix<S>& x) {
  Matrix<S> out(x.rows(), x.cols());
  for (std::size_t i = 0; i < us.size(); ++i) out += us_adj[i] * (x * us[i]);
  out /= static_cast<double>(us.size());
  return out;
}

template <MatrixScalar S>
std::vector<Matrix<S>> adjoints(std::span<const Matrix<S>> us) {
  std::vector<Matrix<S>> out;
  out.reserve(us.size());
  for (const auto& u : us) out.push_back(adjoint(u));
  return out;
}

}  // namespace detail

/// E_U(X) = (1/k) sum U_i* X U_i.
template <MatrixScalar S>
Matrix<S> apply_E(std::span<const Matrix<S>> us, const Matrix<S>& x) {
  detail::check_tuple(us);
  detail::check_operand(us, x);
  const auto adj = detail::adjoints(us);
  return detail::apply_E_unchecked<S>(us, adj, x);
}

/// E_U^dagger(X) = (1/k) sum U_i X U_i*.
template <MatrixScalar S>
Matrix<S> apply_E_dagger(std::span<const Matrix<S>> us, const Matrix<S>& x) {
  detail::check_tuple(us);
  detail::check_operand(us, x);
  const auto adj = detail::adjoints(us);
  return detail::apply_E_unchecked<S>(adj, us, x);
}

/// E^h = (E + E^dagger)/2.
template <MatrixScalar S>
Matrix<S> apply_E_h(std::span<const Matrix<S>> us, const Matrix<S>& x) {
  Matrix<S> out = apply_E(us, x);
  out += apply_E_dagger(us, x);
  out *= S(0.5);
  return out;
}

enum class Superoperator { E, E_dagger, E_h, E_dagger_E };

/// A superoperator restricted to the traceless self-adjoint matrices of the
/// given flavor, acting on basis coordinates. For a real-symmetric flavor
/// with complex unitaries this is the compression onto the real subspace.
template <MatrixScalar S>
class CoordinateSuperoperator {
 public:
  CoordinateSuperoperator(std::vector<Matrix<S>> us, BasisFlavor flavor)
      : us_(std::move(us)), basis_(us_.at(0).rows(), flavor) {
    if constexpr (!is_complex_v<S>) {
      if (flavor == BasisFlavor::complex_hermitian) {
        throw InputError("superoperator: complex-hermitian flavor needs complex unitaries");
      }
    }
    detail::check_tuple<S>(us_);
    adj_ = detail::adjoints<S>(us_);
  }

  std::size_t dim() const noexcept { return basis_.dim(); }
  const TracelessHermitianBasis& basis() const noexcept { return basis_; }

  std::vector<double> apply(Superoperator which, std::span<const double> b) const {
    const Matrix<S> m = basis_.template phi<S>(b);
    Matrix<S> r;
    switch (which) {
      case Superoperator::E: r = e(m); break;
      case Superoperator::E_dagger: r = e_dagger(m); break;
      case Superoperator::E_h:
        r = e(m);
        r += e_dagger(m);
        r *= S(0.5);
        break;
      case Superoperator::E_dagger_E:
        // Real adjoint of the compressed map is the compression of E^dagger.
        r = e_dagger(project_traceless_hermitian(e(m), basis_.flavor()));
        break;
    }
    return basis_.coordinates(project_traceless_hermitian(r, basis_.flavor()));
  }

  LinearOperator as_operator(Superoperator which) const {
    return [this, which](std::span<const double> in, std::span<double> out) {
      const auto r = apply(which, in);
      std::copy(r.begin(), r.end(), out.begin());
    };
  }

  /// Dense matrix of the restricted map, column by column. Small n only.
  RealMatrix dense(Superoperator which) const {
    const std::size_t d = dim();
    RealMatrix m(d, d);
    std::vector<double> unit(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      unit[j] = 1.0;
      const auto col = apply(which, unit);
      for (std::size_t i = 0; i < d; ++i) m(i, j) = col[i];
      unit[j] = 0.0;
    }
    return m;
  }

 private:
  Matrix<S> e(const Matrix<S>& m) const { return detail::apply_E_unchecked<S>(us_, adj_, m); }
  Matrix<S> e_dagger(const Matrix<S>& m) const {
    return detail::apply_E_unchecked<S>(adj_, us_, m);
  }

  std::vector<Matrix<S>> us_;
  std::vector<Matrix<S>> adj_;
  TracelessHermitianBasis basis_;
};

struct ExpanderOptions {
  double tol = 1e-10;                // Lanczos residual tolerance
  std::size_t max_iterations = 0;    // 0: dimension of the space
};

namespace detail {

template <MatrixScalar S, typename Fn>
auto with_tuple_scalar(std::span<const Matrix<S>> us, BasisFlavor flavor, Fn&& fn) {
  if constexpr (is_complex_v<S>) {
    return fn(CoordinateSuperoperator<cplx>(std::vector<Matrix<S>>(us.begin(), us.end()), flavor));
  } else {
    if (flavor == BasisFlavor::complex_hermitian) {
      std::vector<ComplexMatrix> c;
      for (const auto& u : us) c.push_back(to_complex(u));
      return fn(CoordinateSuperoperator<cplx>(std::move(c), flavor));
    }
    return fn(CoordinateSuperoperator<double>(std::vector<Matrix<S>>(us.begin(), us.end()), flavor));
  }
}

inline LanczosOptions lanczos_options(const ExpanderOptions& o) {
  LanczosOptions l;
  l.tol = o.tol;
  l.max_iterations = o.max_iterations;
  return l;
}

inline void require_converged(const LanczosResult& r, const char* what) {
  if (!r.converged) {
    throw ConvergenceError(std::string(what) + ": Lanczos did not converge", r.highest.value,
                           r.highest.vector);
  }
}

}  // namespace detail

/// Least delta with tr(E(B)B) <= delta tr(B^2) on traceless self-adjoint B:
/// the largest eigenvalue of E^h restricted to that space. Signed, not clamped.
template <MatrixScalar S>
double edge_constant(std::span<const Matrix<S>> us,
                     BasisFlavor flavor = BasisFlavor::complex_hermitian,
                     ExpanderOptions opts = {}) {
  return detail::with_tuple_scalar(us, flavor, [&](const auto& op) {
    const auto r = lanczos_extremes(op.as_operator(Superoperator::E_h), op.dim(),
                                    SpectrumEnd::highest, detail::lanczos_options(opts));
    detail::require_converged(r, "edge_constant");
    return r.highest.value;
  });
}

/// Largest singular value of E_U on the traceless self-adjoint matrices, from
/// the top eigenvalue of E^dagger E.
template <MatrixScalar S>
double expander_norm(std::span<const Matrix<S>> us,
                     BasisFlavor flavor = BasisFlavor::complex_hermitian,
                     ExpanderOptions opts = {}) {
  return detail::with_tuple_scalar(us, flavor, [&](const auto& op) {
    const auto r = lanczos_extremes(op.as_operator(Superoperator::E_dagger_E), op.dim(),
                                    SpectrumEnd::highest, detail::lanczos_options(opts));
    detail::require_converged(r, "expander_norm");
    return std::sqrt(std::max(r.highest.value, 0.0));
  });
}

/// Largest |eigenvalue| of the self-adjoint E^h on the traceless space.
template <MatrixScalar S>
double eh_norm(std::span<const Matrix<S>> us, BasisFlavor flavor = BasisFlavor::complex_hermitian,
               ExpanderOptions opts = {}) {
  return detail::with_tuple_scalar(us, flavor, [&](const auto& op) {
    const auto r = lanczos_extremes(op.as_operator(Superoperator::E_h), op.dim(),
                                    SpectrumEnd::both, detail::lanczos_options(opts));
    detail::require_converged(r, "eh_norm");
    return std::max(std::abs(r.lowest.value), std::abs(r.highest.value));
  });
}

inline double hastings_threshold(std::size_t k) {
  if (k < 2) throw InputError("hastings_threshold: k must be at least 2");
  return std::sqrt(2.0 * static_cast<double>(k) - 1.0) / static_cast<double>(k);
}

inline double lambda_from_delta(double delta) {
  if (!(delta >= -1.0 && delta <= 1.0)) throw InputError("lambda_from_delta: delta outside [-1, 1]");
  return (1.0 + delta) / 2.0;
}

/// Upper bound on delta from 1 - lambda <= sqrt(2(1 - delta)).
inline double delta_bound_from_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw InputError("delta_bound_from_lambda: lambda outside [0, 1]");
  }
  return 1.0 - (1.0 - lambda) * (1.0 - lambda) / 2.0;
}

/// tr(E(P) P) / tr(P) for an orthogonal projection of rank at most n/2.
template <MatrixScalar S>
double edge_projection_ratio(std::span<const Matrix<S>> us, const Matrix<S>& p) {
  detail::check_tuple(us);
  detail::check_operand(us, p);
  if (!is_self_adjoint(p, 1e-8) || max_abs_entry(p * p - p) > 1e-8) {
    throw InputError("edge_projection_ratio: P is not an orthogonal projection");
  }
  const double tr = real_part(trace(p));
  const long rank = std::lround(tr);
  if (rank < 1) throw InputError("edge_projection_ratio: P must be nonzero");
  if (2 * rank > static_cast<long>(p.rows())) {
    throw InputError("edge_projection_ratio: rank of P exceeds n/2");
  }
  const auto adj = detail::adjoints(us);
  return real_part(trace(detail::apply_E_unchecked<S>(us, adj, p) * p)) / tr;
}

/// |(1/k) sum ||[U_i,B]||^2 - (2||B'||^2 - 2 tr(E(B')B'))| with B' the traceless part.
template <MatrixScalar S>
double commute_identity_residual(std::span<const Matrix<S>> us, const Matrix<S>& b) {
  detail::check_tuple(us);
  detail::check_operand(us, b);
  if (!is_self_adjoint(b, 1e-8)) throw InputError("commute_identity_residual: B is not self-adjoint");
  double lhs = 0.0;
  for (const auto& u : us) lhs += hs_norm_squared(commutator(u, b));
  lhs /= static_cast<double>(us.size());
  const Matrix<S> bd = traceless_part(b);
  const auto adj = detail::adjoints(us);
  const double rhs =
      2.0 * hs_norm_squared(bd) - 2.0 * real_part(trace(detail::apply_E_unchecked<S>(us, adj, bd) * bd));
  return std::abs(lhs - rhs);
}

struct EdgeFromMal {
  double mal_J = 0.0;
  double delta_bound = 0.0;  // 1 - mal(J)^2
  double edge_delta = 0.0;
  bool holds = false;        // edge_delta <= delta_bound + 1e-9
};

/// mal(J) for J = (Re U + i Im V)/2 against the edge constant of (U, V), both
/// over the same flavor of self-adjoint matrices.
template <MatrixScalar S>
EdgeFromMal edge_delta_from_mal(const Matrix<S>& u, const Matrix<S>& v,
                                BasisFlavor flavor = BasisFlavor::complex_hermitian,
                                MalSolver solver = MalSolver::dense, ExpanderOptions opts = {}) {
  const Matrix<S> j = j_map(u, v);
  EdgeFromMal out;
  out.mal_J = compute_mal(j, solver, flavor, opts.tol).value;
  out.delta_bound = 1.0 - out.mal_J * out.mal_J;
  const std::vector<Matrix<S>> pair{u, v};
  out.edge_delta = edge_constant<S>(pair, flavor, opts);
  out.holds = out.edge_delta <= out.delta_bound + 1e-9;
  return out;
}

struct ExpanderReport {
  std::size_t k = 0;
  std::size_t n = 0;
  double edge_delta = 0.0;
  double norm_E = 0.0;
  double norm_Eh = 0.0;
  std::optional<double> hastings_threshold;  // only for k >= 2
  double lambda_upper = 0.0;                 // (1 + edge_delta)/2
};

template <MatrixScalar S>
ExpanderReport expander_report(std::span<const Matrix<S>> us,
                               BasisFlavor flavor = BasisFlavor::complex_hermitian,
                               ExpanderOptions opts = {}) {
  detail::check_tuple(us);
  ExpanderReport r;
  r.k = us.size();
  r.n = us.front().rows();
  r.edge_delta = edge_constant(us, flavor, opts);
  r.norm_E = expander_norm(us, flavor, opts);
  r.norm_Eh = eh_norm(us, flavor, opts);
  if (r.k >= 2) r.hastings_threshold = malnorm::hastings_threshold(r.k);
  r.lambda_upper = lambda_from_delta(std::clamp(r.edge_delta, -1.0, 1.0));
  return r;
}

}  // namespace malnorm
