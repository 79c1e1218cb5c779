#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "malnorm/core/errors.hpp"
#include "malnorm/core/matrix.hpp"

namespace malnorm {

/// Eigen-decomposition of a real symmetric matrix: ascending eigenvalues and,
/// optionally, orthonormal eigenvectors stored as the columns of `vectors`.
struct SymmetricEigenResult {
  std::vector<double> values;
  std::optional<RealMatrix> vectors;
};

struct SymmetricEigOptions {
  double symmetry_tol = 1e-10;       // relative to the largest entry
  std::size_t max_sweeps_per_value = 50;
};

/// Symmetric tridiagonal matrix: diagonal `diag` (n) and sub-diagonal `off`
/// (n-1).
struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  std::size_t size() const noexcept { return diag.size(); }
};

/// Householder reduction A = Q T Q^T. The reflectors are kept in compact form
/// so Q can be applied to single vectors without forming it.
class HouseholderTridiagonalization {
 public:
  explicit HouseholderTridiagonalization(RealMatrix a) : n_(a.rows()) {
    require_square(a, "tridiagonalize");
    tri_.diag.assign(n_, 0.0);
    tri_.off.assign(n_ > 0 ? n_ - 1 : 0, 0.0);
    reflectors_.reserve(n_ > 2 ? n_ - 2 : 0);
    betas_.reserve(n_ > 2 ? n_ - 2 : 0);
    std::vector<double> p(n_), w(n_);
    for (std::size_t k = 0; k + 2 < n_; ++k) {
      // Reflector annihilating a(k+2.., k).
      const std::size_t m = n_ - k - 1;
      std::vector<double> v(m);
      double sigma = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        v[i] = a(k + 1 + i, k);
        if (i > 0) sigma += v[i] * v[i];
      }
      double beta = 0.0;
      double alpha = v[0];
      if (sigma != 0.0) {
        const double norm = std::sqrt(v[0] * v[0] + sigma);
        alpha = v[0] <= 0.0 ? norm : -norm;
        v[0] -= alpha;
        const double vv = v[0] * v[0] + sigma;
        beta = 2.0 / vv;
      }
      tri_.diag[k] = a(k, k);
      tri_.off[k] = alpha;
      if (beta != 0.0) {
        // Trailing block update A <- (I - beta v v^T) A (I - beta v v^T).
        for (std::size_t i = 0; i < m; ++i) {
          double acc = 0.0;
          const double* ai = a.row(k + 1 + i) + (k + 1);
          for (std::size_t j = 0; j < m; ++j) acc += ai[j] * v[j];
          p[i] = beta * acc;
        }
        const double pv = std::inner_product(p.begin(), p.begin() + m, v.begin(), 0.0);
        const double half = 0.5 * beta * pv;
        for (std::size_t i = 0; i < m; ++i) w[i] = p[i] - half * v[i];
        for (std::size_t i = 0; i < m; ++i) {
          double* ai = a.row(k + 1 + i) + (k + 1);
          const double vi = v[i], wi = w[i];
          for (std::size_t j = 0; j < m; ++j) ai[j] -= vi * w[j] + wi * v[j];
        }
      }
      reflectors_.push_back(std::move(v));
      betas_.push_back(beta);
    }
    if (n_ >= 2) {
      tri_.diag[n_ - 2] = a(n_ - 2, n_ - 2);
      tri_.off[n_ - 2] = a(n_ - 1, n_ - 2);
    }
    if (n_ >= 1) tri_.diag[n_ - 1] = a(n_ - 1, n_ - 1);
  }

  const Tridiagonal& tridiagonal() const noexcept { return tri_; }
  std::size_t size() const noexcept { return n_; }

  /// y <- Q y.
  void apply_q(std::span<double> y) const {
    for (std::size_t r = reflectors_.size(); r-- > 0;) apply_reflector(r, y);
  }

  RealMatrix q_matrix() const {
    RealMatrix q = RealMatrix::identity(n_);
    std::vector<double> col(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      std::fill(col.begin(), col.end(), 0.0);
      col[j] = 1.0;
      apply_q(col);
      for (std::size_t i = 0; i < n_; ++i) q(i, j) = col[i];
    }
    return q;
  }

 private:
  void apply_reflector(std::size_t r, std::span<double> y) const {
    const auto& v = reflectors_[r];
    const double beta = betas_[r];
    if (beta == 0.0) return;
    const std::size_t off = r + 1;
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * y[off + i];
    s *= beta;
    for (std::size_t i = 0; i < v.size(); ++i) y[off + i] -= s * v[i];
  }

  std::size_t n_;
  Tridiagonal tri_;
  std::vector<std::vector<double>> reflectors_;
  std::vector<double> betas_;
};

namespace detail {

// Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal matrix.
// `d` holds the diagonal, `e` the sub-diagonal padded to length n. When `z` is
// non-null its columns are rotated along (z starts as Q, ends as eigenvectors).
inline void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, RealMatrix* z,
                           std::size_t max_sweeps) {
  const std::size_t n = d.size();
  if (n == 0) return;
  e.resize(n);
  e[n - 1] = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  double shift_acc = 0.0;
  double tst1 = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m > l) {
      std::size_t iter = 0;
      do {
        if (++iter > max_sweeps) {
          throw ConvergenceError("symmetric_eig: QL iteration cap reached", d[l]);
        }
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        shift_acc += h;

        p = d[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = m; i-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          if (z != nullptr) {
            for (std::size_t k = 0; k < n; ++k) {
              double* zk = z->row(k);
              const double zh = zk[i + 1];
              zk[i + 1] = s * zk[i] + c * zh;
              zk[i] = c * zk[i] - s * zh;
            }
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += shift_acc;
    e[l] = 0.0;
  }
}

inline void check_symmetric(const RealMatrix& h, double rel_tol) {
  require_square(h, "symmetric_eig");
  const double scale = std::max(max_abs_entry(h), std::numeric_limits<double>::min());
  for (std::size_t i = 0; i < h.rows(); ++i)
    for (std::size_t j = i + 1; j < h.cols(); ++j)
      if (std::abs(h(i, j) - h(j, i)) > rel_tol * scale) {
        throw InputError("symmetric_eig: input is not symmetric within tolerance");
      }
}

}  // namespace detail

/// Eigenvalues (ascending) of a symmetric tridiagonal matrix.
inline std::vector<double> tridiagonal_eigenvalues(const Tridiagonal& t,
                                                   std::size_t max_sweeps = 50) {
  std::vector<double> d = t.diag;
  std::vector<double> e(t.size(), 0.0);
  for (std::size_t i = 0; i < t.off.size(); ++i) e[i] = t.off[i];
  detail::tridiagonal_ql(d, e, nullptr, max_sweeps);
  std::sort(d.begin(), d.end());
  return d;
}

/// Unit eigenvector of a symmetric tridiagonal matrix for the (already
/// computed) eigenvalue `lambda`, by inverse iteration with a slightly
/// perturbed shift. Zero pivots are replaced by eps*||T||.
inline std::vector<double> tridiagonal_eigenvector(const Tridiagonal& t, double lambda,
                                                   std::size_t sweeps = 3) {
  const std::size_t n = t.size();
  if (n == 0) return {};
  if (n == 1) return {1.0};
  double tnorm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = std::abs(t.diag[i]);
    if (i > 0) row += std::abs(t.off[i - 1]);
    if (i + 1 < n) row += std::abs(t.off[i]);
    tnorm = std::max(tnorm, row);
  }
  const double eps = std::numeric_limits<double>::epsilon();
  const double tiny = std::max(eps * tnorm, std::numeric_limits<double>::min());
  const double shift = lambda + 4.0 * eps * std::max(tnorm, 1.0);

  // LU of (T - shift I) with partial pivoting; U has two super-diagonals.
  std::vector<double> dl(t.off.begin(), t.off.end());
  std::vector<double> dd(n), du(t.off.begin(), t.off.end()), du2(n, 0.0);
  std::vector<char> swapped(n, 0);
  for (std::size_t i = 0; i < n; ++i) dd[i] = t.diag[i] - shift;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(dd[i]) >= std::abs(dl[i])) {
      if (dd[i] == 0.0) dd[i] = tiny;
      const double f = dl[i] / dd[i];
      dl[i] = f;
      dd[i + 1] -= f * du[i];
    } else {
      swapped[i] = 1;
      const double f = dd[i] / dl[i];
      dd[i] = dl[i];
      dl[i] = f;
      const double tmp = du[i];
      du[i] = dd[i + 1];
      dd[i + 1] = tmp - f * dd[i + 1];
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -f * du[i + 1];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (dd[i] == 0.0) dd[i] = tiny;

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.01 * std::sin(static_cast<double>(i) + 1.0);
  for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
    // Forward: apply row interchanges and multipliers.
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (swapped[i]) std::swap(x[i], x[i + 1]);
      x[i + 1] -= dl[i] * x[i];
    }
    // Back substitution with the banded U.
    for (std::size_t ii = n; ii-- > 0;) {
      double acc = x[ii];
      if (ii + 1 < n) acc -= du[ii] * x[ii + 1];
      if (ii + 2 < n) acc -= du2[ii] * x[ii + 2];
      x[ii] = acc / dd[ii];
    }
    const double len = norm2(x);
    if (!(len > 0.0) || !std::isfinite(len)) {
      std::fill(x.begin(), x.end(), 0.0);
      x[0] = 1.0;
      continue;
    }
    scale(x, 1.0 / len);
  }
  return x;
}

/// All eigenvalues (ascending) of a real symmetric matrix; eigenvectors when
/// requested. Householder tridiagonalization followed by implicit QL.
inline SymmetricEigenResult symmetric_eig(const RealMatrix& h, bool want_vectors,
                                          SymmetricEigOptions opts = {}) {
  detail::check_symmetric(h, opts.symmetry_tol);
  const std::size_t n = h.rows();
  SymmetricEigenResult result;
  if (n == 0) return result;
  HouseholderTridiagonalization red(h);
  std::vector<double> d = red.tridiagonal().diag;
  std::vector<double> e(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) e[i] = red.tridiagonal().off[i];
  if (!want_vectors) {
    detail::tridiagonal_ql(d, e, nullptr, opts.max_sweeps_per_value);
    std::sort(d.begin(), d.end());
    result.values = std::move(d);
    return result;
  }
  RealMatrix z = red.q_matrix();
  detail::tridiagonal_ql(d, e, &z, opts.max_sweeps_per_value);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return d[a] < d[b]; });
  RealMatrix sorted(n, n);
  result.values.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    result.values[j] = d[order[j]];
    for (std::size_t i = 0; i < n; ++i) sorted(i, j) = z(i, order[j]);
  }
  result.vectors = std::move(sorted);
  return result;
}

/// All eigenvalues plus a unit eigenvector for the smallest one. Cheaper than
/// full vectors: the tridiagonal eigenvector comes from inverse iteration and
/// is mapped back through the stored reflectors.
struct LowestEigenpair {
  std::vector<double> values;
  std::vector<double> vector;
};

inline LowestEigenpair symmetric_lowest_eigenpair(const RealMatrix& h,
                                                  SymmetricEigOptions opts = {}) {
  detail::check_symmetric(h, opts.symmetry_tol);
  LowestEigenpair out;
  if (h.rows() == 0) return out;
  HouseholderTridiagonalization red(h);
  out.values = tridiagonal_eigenvalues(red.tridiagonal(), opts.max_sweeps_per_value);
  out.vector = tridiagonal_eigenvector(red.tridiagonal(), out.values.front());
  red.apply_q(out.vector);
  const double len = norm2(out.vector);
  scale(out.vector, 1.0 / len);
  return out;
}

}  // namespace malnorm
