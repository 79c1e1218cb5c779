#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "malnorm/core/errors.hpp"
#include "malnorm/core/matrix.hpp"

namespace malnorm {

/// Which real vector space of traceless self-adjoint matrices is used.
enum class BasisFlavor { real_symmetric, complex_hermitian };

inline std::string_view to_string(BasisFlavor f) {
  return f == BasisFlavor::real_symmetric ? "real-symmetric" : "complex-hermitian";
}

inline BasisFlavor parse_basis_flavor(std::string_view s) {
  if (s == "real-symmetric" || s == "real") return BasisFlavor::real_symmetric;
  if (s == "complex-hermitian" || s == "complex") return BasisFlavor::complex_hermitian;
  throw InputError("unknown basis flavor '" + std::string(s) + "'");
}

/// d(n): n(n+1)/2 - 1 (real symmetric) or n^2 - 1 (complex Hermitian).
inline std::size_t traceless_dimension(std::size_t n, BasisFlavor flavor) {
  return flavor == BasisFlavor::real_symmetric ? n * (n + 1) / 2 - 1 : n * n - 1;
}

/// One sparse entry of a basis element.
template <MatrixScalar S>
struct SparseEntry {
  std::size_t row;
  std::size_t col;
  S value;
};

/// Orthonormal basis of the traceless self-adjoint n x n matrices under the
/// real Hilbert-Schmidt inner product Re tr(B* A).
///
/// Ordering of coordinates:
///   1. symmetric pairs (E_ij + E_ji)/sqrt2 for i < j, lexicographic;
///   2. complex flavor only: i(E_ij - E_ji)/sqrt2 for i < j, lexicographic;
///   3. diagonal ladder d_k = (E_11 + ... + E_kk - k E_{k+1,k+1})/sqrt(k(k+1)),
///      k = 1..n-1.
///
/// phi/phi_inv are closed form and never materialize the elements; elements()
/// builds them densely when needed.
class TracelessHermitianBasis {
 public:
  TracelessHermitianBasis(std::size_t n, BasisFlavor flavor) : n_(n), flavor_(flavor) {
    if (n < 2) throw InputError("traceless basis: n must be at least 2");
    pairs_ = n * (n - 1) / 2;
    dim_ = traceless_dimension(n, flavor);
    pair_index_.reserve(pairs_);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) pair_index_.push_back({i, j});
    ladder_.resize(n);
    for (std::size_t k = 1; k < n; ++k)
      ladder_[k] = 1.0 / std::sqrt(static_cast<double>(k) * static_cast<double>(k + 1));
  }

  std::size_t n() const noexcept { return n_; }
  BasisFlavor flavor() const noexcept { return flavor_; }
  std::size_t dim() const noexcept { return dim_; }

  enum class Kind { symmetric_pair, antisymmetric_pair, diagonal };
  struct Descriptor {
    Kind kind;
    std::size_t i;  // pair row, or ladder index k for diagonals
    std::size_t j;
  };

  Descriptor describe(std::size_t index) const {
    if (index >= dim_) throw DimensionError("traceless basis: index out of range");
    if (index < pairs_) return {Kind::symmetric_pair, pair_index_[index].first,
                                pair_index_[index].second};
    if (flavor_ == BasisFlavor::complex_hermitian && index < 2 * pairs_) {
      const auto& p = pair_index_[index - pairs_];
      return {Kind::antisymmetric_pair, p.first, p.second};
    }
    const std::size_t k = index - (flavor_ == BasisFlavor::complex_hermitian ? 2 : 1) * pairs_ + 1;
    return {Kind::diagonal, k, k};
  }

  /// Nonzero entries of element `index`. Antisymmetric pairs require complex S.
  template <MatrixScalar S>
  std::vector<SparseEntry<S>> sparse_element(std::size_t index) const {
    const Descriptor d = describe(index);
    const double r = 1.0 / std::sqrt(2.0);
    std::vector<SparseEntry<S>> out;
    switch (d.kind) {
      case Kind::symmetric_pair:
        out.push_back({d.i, d.j, S(r)});
        out.push_back({d.j, d.i, S(r)});
        break;
      case Kind::antisymmetric_pair:
        if constexpr (is_complex_v<S>) {
          out.push_back({d.i, d.j, S(0.0, r)});
          out.push_back({d.j, d.i, S(0.0, -r)});
        } else {
          throw InputError("traceless basis: complex element requested as a real matrix");
        }
        break;
      case Kind::diagonal: {
        const std::size_t k = d.i;
        const double c = ladder_[k];
        for (std::size_t t = 0; t < k; ++t) out.push_back({t, t, S(c)});
        out.push_back({k, k, S(-static_cast<double>(k) * c)});
        break;
      }
    }
    return out;
  }

  template <MatrixScalar S>
  Matrix<S> element(std::size_t index) const {
    Matrix<S> m(n_, n_);
    for (const auto& e : sparse_element<S>(index)) m(e.row, e.col) = e.value;
    return m;
  }

  template <MatrixScalar S>
  std::vector<Matrix<S>> elements() const {
    std::vector<Matrix<S>> out;
    out.reserve(dim_);
    for (std::size_t k = 0; k < dim_; ++k) out.push_back(element<S>(k));
    return out;
  }

  /// phi(b) = sum_k b_k E_k.
  template <MatrixScalar S>
  Matrix<S> phi(std::span<const double> b) const {
    if (b.size() != dim_) throw DimensionError("phi: coordinate vector has wrong length");
    if constexpr (!is_complex_v<S>) {
      if (flavor_ == BasisFlavor::complex_hermitian) {
        throw InputError("phi: complex-hermitian basis needs a complex matrix");
      }
    }
    Matrix<S> m(n_, n_);
    const double r = 1.0 / std::sqrt(2.0);
    for (std::size_t p = 0; p < pairs_; ++p) {
      const auto [i, j] = pair_index_[p];
      m(i, j) = S(b[p] * r);
      m(j, i) = S(b[p] * r);
    }
    if constexpr (is_complex_v<S>) {
      if (flavor_ == BasisFlavor::complex_hermitian) {
        for (std::size_t p = 0; p < pairs_; ++p) {
          const auto [i, j] = pair_index_[p];
          const double v = b[pairs_ + p] * r;
          m(i, j) += S(0.0, v);
          m(j, i) += S(0.0, -v);
        }
      }
    }
    const std::size_t off = diagonal_offset();
    // M_rr = sum_{k > r} c_k b_k - r c_r b_r.
    double suffix = 0.0;
    for (std::size_t rr = n_; rr-- > 0;) {
      double v = suffix;
      if (rr >= 1) v -= static_cast<double>(rr) * ladder_[rr] * b[off + rr - 1];
      m(rr, rr) = S(v);
      if (rr >= 1) suffix += ladder_[rr] * b[off + rr - 1];
    }
    return m;
  }

  /// Coordinates b_k = Re <M, E_k> without any precondition check. For a
  /// general M this is the coordinate vector of its orthogonal projection.
  template <MatrixScalar S>
  std::vector<double> coordinates(const Matrix<S>& m) const {
    if (m.rows() != n_ || m.cols() != n_) throw DimensionError("coordinates: wrong matrix size");
    std::vector<double> b(dim_);
    const double r = 1.0 / std::sqrt(2.0);
    for (std::size_t p = 0; p < pairs_; ++p) {
      const auto [i, j] = pair_index_[p];
      b[p] = (real_part(m(i, j)) + real_part(m(j, i))) * r;
    }
    if (flavor_ == BasisFlavor::complex_hermitian) {
      for (std::size_t p = 0; p < pairs_; ++p) {
        const auto [i, j] = pair_index_[p];
        b[pairs_ + p] = (imag_part(m(i, j)) - imag_part(m(j, i))) * r;
      }
    }
    const std::size_t off = diagonal_offset();
    double prefix = 0.0;
    for (std::size_t k = 1; k < n_; ++k) {
      prefix += real_part(m(k - 1, k - 1));
      b[off + k - 1] = ladder_[k] * (prefix - static_cast<double>(k) * real_part(m(k, k)));
    }
    return b;
  }

  /// phi^{-1}(M); M must be self-adjoint, traceless, and (for the real flavor)
  /// real, each within `tol`.
  template <MatrixScalar S>
  std::vector<double> phi_inv(const Matrix<S>& m, double tol = 1e-8) const {
    if (m.rows() != n_ || m.cols() != n_) throw DimensionError("phi_inv: wrong matrix size");
    if (!is_self_adjoint(m, tol)) throw InputError("phi_inv: matrix is not self-adjoint");
    if (std::abs(trace(m)) > tol) throw InputError("phi_inv: matrix is not traceless");
    if (flavor_ == BasisFlavor::real_symmetric) {
      for (const auto& v : m.entries())
        if (std::abs(imag_part(v)) > tol) {
          throw InputError("phi_inv: real-symmetric basis cannot represent a complex matrix");
        }
    }
    return coordinates(m);
  }

 private:
  std::size_t diagonal_offset() const noexcept {
    return flavor_ == BasisFlavor::complex_hermitian ? 2 * pairs_ : pairs_;
  }

  std::size_t n_;
  BasisFlavor flavor_;
  std::size_t pairs_ = 0;
  std::size_t dim_ = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pair_index_;
  std::vector<double> ladder_;
};

inline TracelessHermitianBasis build_basis(std::size_t n, BasisFlavor flavor) {
  return TracelessHermitianBasis(n, flavor);
}

/// Orthogonal projection onto the traceless self-adjoint matrices of the given
/// flavor: (M + M*)/2 minus its normalized trace, real part only for the real
/// flavor.
template <MatrixScalar S>
Matrix<S> project_traceless_hermitian(const Matrix<S>& m, BasisFlavor flavor) {
  require_square(m, "project_traceless_hermitian");
  const std::size_t n = m.rows();
  Matrix<S> p(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      S v = 0.5 * (m(i, j) + conj_scalar(m(j, i)));
      if constexpr (is_complex_v<S>) {
        if (flavor == BasisFlavor::real_symmetric) v = S(v.real(), 0.0);
      }
      p(i, j) = v;
    }
  const S tau = normalized_trace(p);
  for (std::size_t i = 0; i < n; ++i) p(i, i) -= tau;
  return p;
}

}  // namespace malnorm
