#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "malnorm/core/errors.hpp"
#include "malnorm/core/matrix.hpp"
#include "malnorm/core/matrix_io.hpp"
#include "malnorm/core/polar.hpp"
#include "malnorm/random.hpp"

namespace malnorm {

enum class EnsembleKind {
  haar_orthogonal,
  haar_unitary,
  ginibre_real,
  ginibre_complex,
  j_orthogonal,
  j_unitary
};

inline std::string_view to_string(EnsembleKind k) {
  switch (k) {
    case EnsembleKind::haar_orthogonal: return "haar-orthogonal";
    case EnsembleKind::haar_unitary: return "haar-unitary";
    case EnsembleKind::ginibre_real: return "ginibre-real";
    case EnsembleKind::ginibre_complex: return "ginibre-complex";
    case EnsembleKind::j_orthogonal: return "j-orthogonal";
    case EnsembleKind::j_unitary: return "j-unitary";
  }
  return "?";
}

inline EnsembleKind parse_ensemble_kind(std::string_view s) {
  for (auto k : {EnsembleKind::haar_orthogonal, EnsembleKind::haar_unitary,
                 EnsembleKind::ginibre_real, EnsembleKind::ginibre_complex,
                 EnsembleKind::j_orthogonal, EnsembleKind::j_unitary})
    if (to_string(k) == s) return k;
  throw InputError("unknown ensemble kind '" + std::string(s) + "'");
}

/// Real-flavored ensembles produce real matrices.
inline bool is_real_ensemble(EnsembleKind k) {
  return k == EnsembleKind::haar_orthogonal || k == EnsembleKind::ginibre_real ||
         k == EnsembleKind::j_orthogonal;
}

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::ginibre_real;
  std::size_t n = 2;
  std::uint64_t seed = 0;
};

/// Stream index of sample `index` at dimension n. Distinct (n, index) pairs
/// never share a stream.
inline std::uint64_t sample_stream_index(std::size_t n, std::uint64_t index) {
  return (static_cast<std::uint64_t>(n) << 32) | (index & 0xffffffffu);
}

/// i.i.d. standard normal entries. Complex entries have independent real and
/// imaginary parts of variance 1/2 each, so E|z|^2 = 1.
template <MatrixScalar S>
Matrix<S> gaussian_matrix(std::size_t n, SeededStream& stream) {
  Matrix<S> m(n, n);
  const auto e = m.entries();
  if constexpr (is_complex_v<S>) {
    const double r = std::sqrt(0.5);
    for (auto& v : e) {
      const auto [a, b] = stream.next_normal_pair();
      v = S(r * a, r * b);
    }
  } else {
    for (std::size_t i = 0; i < e.size(); i += 2) {
      const auto [a, b] = stream.next_normal_pair();
      e[i] = a;
      if (i + 1 < e.size()) e[i + 1] = b;
    }
  }
  return m;
}

inline AnyMatrix gaussian_matrix(std::size_t n, ScalarFlavor flavor, SeededStream& stream) {
  if (flavor == ScalarFlavor::real) return gaussian_matrix<double>(n, stream);
  return gaussian_matrix<cplx>(n, stream);
}

namespace detail {

// Polar factor of a Gaussian matrix. A singular draw (probability zero, but
// possible in floating point) is redrawn from the continuing stream, at most
// three times.
template <MatrixScalar S>
Matrix<S> haar_sample(std::size_t n, SeededStream& stream) {
  if (n < 2) throw InputError("haar sample: n must be at least 2");
  for (int attempt = 0;; ++attempt) {
    try {
      return polar_unitary(gaussian_matrix<S>(n, stream));
    } catch (const SingularityError&) {
      if (attempt == 3) throw;
    }
  }
}

}  // namespace detail

inline ComplexMatrix haar_unitary(std::size_t n, SeededStream& stream) {
  return detail::haar_sample<cplx>(n, stream);
}

inline RealMatrix haar_orthogonal(std::size_t n, SeededStream& stream) {
  return detail::haar_sample<double>(n, stream);
}

/// Haar sample by QR of a Gaussian matrix with diag(R) made positive (which
/// Gram-Schmidt does by construction). Equal in distribution to the polar
/// route; kept as a cross-check.
template <MatrixScalar S>
Matrix<S> haar_qr(std::size_t n, SeededStream& stream) {
  Matrix<S> q = gaussian_matrix<S>(n, stream);
  // Modified Gram-Schmidt, two passes per column.
  for (std::size_t j = 0; j < n; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        S c{};
        for (std::size_t i = 0; i < n; ++i) c += conj_scalar(q(i, k)) * q(i, j);
        for (std::size_t i = 0; i < n; ++i) q(i, j) -= c * q(i, k);
      }
    }
    double len = 0.0;
    for (std::size_t i = 0; i < n; ++i) len += abs2(q(i, j));
    len = std::sqrt(len);
    if (len == 0.0) throw SingularityError("haar_qr: rank-deficient Gaussian draw");
    for (std::size_t i = 0; i < n; ++i) q(i, j) /= len;
  }
  return q;
}

/// Real Ginibre: entries of variance 1/n. Complex: E|z|^2 = 1/n.
template <MatrixScalar S>
Matrix<S> ginibre(std::size_t n, SeededStream& stream) {
  if (n < 1) throw InputError("ginibre: n must be at least 1");
  Matrix<S> g = gaussian_matrix<S>(n, stream);
  g /= std::sqrt(static_cast<double>(n));
  return g;
}

/// (U + U* + V - V*)/4 = (Re U + i Im V)/2 for unitary U, V.
template <MatrixScalar S>
Matrix<S> j_map(const Matrix<S>& u, const Matrix<S>& v, double unitarity_tol = 1e-8) {
  require_square(u, "j_map");
  if (u.rows() != v.rows() || u.cols() != v.cols()) {
    throw DimensionError("j_map: U and V differ in size");
  }
  if (unitarity_defect(u) > unitarity_tol || unitarity_defect(v) > unitarity_tol) {
    throw InputError("j_map: inputs must be unitary");
  }
  const std::size_t n = u.rows();
  Matrix<S> j(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      j(r, c) = 0.25 * (u(r, c) + conj_scalar(u(c, r)) + v(r, c) - conj_scalar(v(c, r)));
  return j;
}

/// J_omega = (1/sqrt(2k)) sum_i omega_i U_i.
template <MatrixScalar S>
ComplexMatrix j_omega(std::span<const Matrix<S>> us, std::span<const cplx> omega) {
  if (us.empty()) throw InputError("j_omega: empty tuple");
  if (us.size() != omega.size()) throw DimensionError("j_omega: tuple and weights differ in length");
  const std::size_t n = us.front().rows();
  ComplexMatrix j(n, n);
  for (std::size_t i = 0; i < us.size(); ++i) {
    require_square(us[i], "j_omega");
    if (us[i].rows() != n) throw DimensionError("j_omega: matrices differ in size");
    if (std::abs(std::abs(omega[i]) - 1.0) > 1e-12) throw InputError("j_omega: weights must be unimodular");
    const auto& e = us[i].entries();
    const auto out = j.entries();
    for (std::size_t t = 0; t < e.size(); ++t) out[t] += omega[i] * cplx(e[t]);
  }
  j /= std::sqrt(2.0 * static_cast<double>(us.size()));
  return j;
}

/// One ensemble draw from the sample's own stream.
inline AnyMatrix sample_ensemble(EnsembleKind kind, std::size_t n, SeededStream& stream) {
  switch (kind) {
    case EnsembleKind::haar_orthogonal: return haar_orthogonal(n, stream);
    case EnsembleKind::haar_unitary: return haar_unitary(n, stream);
    case EnsembleKind::ginibre_real: return ginibre<double>(n, stream);
    case EnsembleKind::ginibre_complex: return ginibre<cplx>(n, stream);
    case EnsembleKind::j_orthogonal: {
      const RealMatrix u = haar_orthogonal(n, stream);
      const RealMatrix v = haar_orthogonal(n, stream);
      return j_map(u, v);
    }
    case EnsembleKind::j_unitary: {
      const ComplexMatrix u = haar_unitary(n, stream);
      const ComplexMatrix v = haar_unitary(n, stream);
      return j_map(u, v);
    }
  }
  throw InputError("sample_ensemble: unknown kind");
}

/// Sample `index` of the ensemble: a pure function of (spec, index).
inline AnyMatrix sample_ensemble(const EnsembleSpec& spec, std::uint64_t index) {
  SeededStream stream(spec.seed, sample_stream_index(spec.n, index));
  return sample_ensemble(spec.kind, spec.n, stream);
}

}  // namespace malnorm
