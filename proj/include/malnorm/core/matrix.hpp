#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "malnorm/core/errors.hpp"

namespace malnorm {

using cplx = std::complex<double>;

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};
template <typename T>
inline constexpr bool is_complex_v = is_complex<T>::value;

template <typename Scalar>
concept MatrixScalar = std::is_same_v<Scalar, double> || std::is_same_v<Scalar, cplx>;

enum class ScalarFlavor { real, complex };

inline double real_part(double x) { return x; }
inline double real_part(cplx z) { return z.real(); }
inline double imag_part(double) { return 0.0; }
inline double imag_part(cplx z) { return z.imag(); }
inline double conj_scalar(double x) { return x; }
inline cplx conj_scalar(cplx z) { return std::conj(z); }
inline double abs2(double x) { return x * x; }
inline double abs2(cplx z) { return z.real() * z.real() + z.imag() * z.imag(); }

/// Dense row-major matrix over double or complex<double>.
template <MatrixScalar Scalar>
class Matrix {
 public:
  using scalar_type = Scalar;
  static constexpr ScalarFlavor flavor =
      is_complex_v<Scalar> ? ScalarFlavor::complex : ScalarFlavor::real;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<Scalar> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("matrix entry count does not match rows*cols");
    }
  }
  Matrix(std::initializer_list<std::initializer_list<Scalar>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) throw DimensionError("ragged initializer list");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Scalar(1);
    return m;
  }
  static Matrix diagonal(std::span<const Scalar> diag) {
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
  }
  static Matrix diagonal(std::initializer_list<Scalar> diag) {
    return diagonal(std::span<const Scalar>(diag.begin(), diag.size()));
  }
  static Matrix diagonal(const std::vector<Scalar>& diag) {
    return diagonal(std::span<const Scalar>(diag));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool square() const noexcept { return rows_ == cols_; }

  Scalar& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Scalar& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<Scalar> entries() noexcept { return data_; }
  std::span<const Scalar> entries() const noexcept { return data_; }
  Scalar* data() noexcept { return data_.data(); }
  const Scalar* data() const noexcept { return data_.data(); }
  Scalar* row(std::size_t i) noexcept { return data_.data() + i * cols_; }
  const Scalar* row(std::size_t i) const noexcept { return data_.data() + i * cols_; }

  Matrix& operator+=(const Matrix& other) {
    require_same_shape(other);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& other) {
    require_same_shape(other);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
  }
  Matrix& operator*=(Scalar s) {
    for (auto& x : data_) x *= s;
    return *this;
  }
  Matrix& operator/=(Scalar s) {
    for (auto& x : data_) x /= s;
    return *this;
  }

  bool operator==(const Matrix&) const = default;

  void require_same_shape(const Matrix& other) const {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
      throw DimensionError("matrix shapes differ: " + shape_string() + " vs " +
                           other.shape_string());
    }
  }
  std::string shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Scalar> data_;
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<cplx>;

template <MatrixScalar S>
Matrix<S> operator+(Matrix<S> a, const Matrix<S>& b) {
  a += b;
  return a;
}
template <MatrixScalar S>
Matrix<S> operator-(Matrix<S> a, const Matrix<S>& b) {
  a -= b;
  return a;
}
template <MatrixScalar S>
Matrix<S> operator-(Matrix<S> a) {
  a *= S(-1);
  return a;
}
template <MatrixScalar S>
Matrix<S> operator*(S s, Matrix<S> a) {
  a *= s;
  return a;
}
template <MatrixScalar S>
Matrix<S> operator*(Matrix<S> a, S s) {
  a *= s;
  return a;
}
template <MatrixScalar S>
Matrix<S> operator/(Matrix<S> a, S s) {
  a /= s;
  return a;
}
inline ComplexMatrix operator*(double s, ComplexMatrix a) {
  a *= cplx(s);
  return a;
}
inline ComplexMatrix operator*(ComplexMatrix a, double s) {
  a *= cplx(s);
  return a;
}
inline ComplexMatrix operator/(ComplexMatrix a, double s) {
  a /= cplx(s);
  return a;
}
inline ComplexMatrix operator*(cplx s, const RealMatrix& a) {
  ComplexMatrix out(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.size(); ++k) out.data()[k] = s * a.data()[k];
  return out;
}

inline void require_square(const auto& a, const char* what) {
  if (!a.square()) {
    throw DimensionError(std::string(what) + ": matrix must be square, got " + a.shape_string());
  }
}

namespace detail {

// C += A * B for row-major storage, i-k-j order.
inline void gemm_accumulate(const RealMatrix& a, const RealMatrix& b, RealMatrix& c) {
  const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* ci = c.row(i);
    const double* ai = a.row(i);
    for (std::size_t k = 0; k < m; ++k) {
      const double aik = ai[k];
      if (aik == 0.0) continue;
      const double* bk = b.row(k);
      for (std::size_t j = 0; j < p; ++j) ci[j] += aik * bk[j];
    }
  }
}

// Complex product on the interleaved representation; avoids the NaN-recovery
// path of std::complex multiplication in the inner loop.
inline void gemm_accumulate(const ComplexMatrix& a, const ComplexMatrix& b, ComplexMatrix& c) {
  const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* ci = reinterpret_cast<double*>(c.row(i));
    const cplx* ai = a.row(i);
    for (std::size_t k = 0; k < m; ++k) {
      const double ar = ai[k].real(), aim = ai[k].imag();
      if (ar == 0.0 && aim == 0.0) continue;
      const double* bk = reinterpret_cast<const double*>(b.row(k));
      for (std::size_t j = 0; j < p; ++j) {
        const double br = bk[2 * j], bi = bk[2 * j + 1];
        ci[2 * j] += ar * br - aim * bi;
        ci[2 * j + 1] += ar * bi + aim * br;
      }
    }
  }
}

}  // namespace detail

template <MatrixScalar S>
Matrix<S> matmul(const Matrix<S>& a, const Matrix<S>& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ (" + a.shape_string() + " * " +
                         b.shape_string() + ")");
  }
  Matrix<S> c(a.rows(), b.cols());
  detail::gemm_accumulate(a, b, c);
  return c;
}

template <MatrixScalar S>
Matrix<S> operator*(const Matrix<S>& a, const Matrix<S>& b) {
  return matmul(a, b);
}

/// Conjugate transpose (plain transpose for real matrices).
template <MatrixScalar S>
Matrix<S> adjoint(const Matrix<S>& a) {
  Matrix<S> t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = conj_scalar(a(i, j));
  return t;
}

template <MatrixScalar S>
Matrix<S> transpose(const Matrix<S>& a) {
  Matrix<S> t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline ComplexMatrix to_complex(const RealMatrix& a) {
  ComplexMatrix c(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.size(); ++k) c.data()[k] = a.data()[k];
  return c;
}
inline const ComplexMatrix& to_complex(const ComplexMatrix& a) { return a; }

/// Entrywise real part; throws if any imaginary part exceeds `tol`.
inline RealMatrix to_real(const ComplexMatrix& a, double tol) {
  RealMatrix r(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a.data()[k].imag()) > tol) {
      throw InputError("matrix has non-negligible imaginary part");
    }
    r.data()[k] = a.data()[k].real();
  }
  return r;
}

/// Hermitian real part (X + X*)/2.
template <MatrixScalar S>
Matrix<S> hermitian_real_part(const Matrix<S>& x) {
  require_square(x, "hermitian_real_part");
  Matrix<S> r = x + adjoint(x);
  r *= S(0.5);
  return r;
}

/// Hermitian imaginary part (X - X*)/(2i).
inline ComplexMatrix hermitian_imag_part(const ComplexMatrix& x) {
  require_square(x, "hermitian_imag_part");
  ComplexMatrix r = x - adjoint(x);
  r *= cplx(0.0, -0.5);
  return r;
}

template <MatrixScalar S>
S trace(const Matrix<S>& a) {
  require_square(a, "trace");
  S t{};
  for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
  return t;
}

/// Normalized trace tau(A) = tr(A)/n.
template <MatrixScalar S>
S normalized_trace(const Matrix<S>& a) {
  return trace(a) / static_cast<double>(a.rows());
}

/// Hilbert-Schmidt inner product <A, B> = tr(B* A) = sum A_ij conj(B_ij).
template <MatrixScalar S>
cplx hs_inner(const Matrix<S>& a, const Matrix<S>& b) {
  require_square(a, "hs_inner");
  a.require_same_shape(b);
  cplx acc{};
  for (std::size_t k = 0; k < a.size(); ++k) acc += a.data()[k] * conj_scalar(b.data()[k]);
  return acc;
}

/// Re <A, B>, the inner product that makes self-adjoint matrices a real Euclidean space.
template <MatrixScalar S>
double hs_inner_real(const Matrix<S>& a, const Matrix<S>& b) {
  a.require_same_shape(b);
  const double* x = reinterpret_cast<const double*>(a.data());
  const double* y = reinterpret_cast<const double*>(b.data());
  const std::size_t len = a.size() * (is_complex_v<S> ? 2 : 1);
  double acc = 0.0;
  for (std::size_t k = 0; k < len; ++k) acc += x[k] * y[k];
  return acc;
}

template <MatrixScalar S>
double hs_norm_squared(const Matrix<S>& a) {
  double acc = 0.0;
  for (const auto& v : a.entries()) acc += abs2(v);
  return acc;
}

/// Hilbert-Schmidt (Frobenius) norm.
template <MatrixScalar S>
double hs_norm(const Matrix<S>& a) {
  return std::sqrt(hs_norm_squared(a));
}

template <MatrixScalar S>
double hs_distance(const Matrix<S>& a, const Matrix<S>& b) {
  a.require_same_shape(b);
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += abs2(a.data()[k] - b.data()[k]);
  return std::sqrt(acc);
}

template <MatrixScalar S>
double max_abs_entry(const Matrix<S>& a) {
  double m = 0.0;
  for (const auto& v : a.entries()) m = std::max(m, std::abs(v));
  return m;
}

/// [X, B] = XB - BX.
template <MatrixScalar S>
Matrix<S> commutator(const Matrix<S>& x, const Matrix<S>& b) {
  require_square(x, "commutator");
  x.require_same_shape(b);
  Matrix<S> c = x * b;
  c -= b * x;
  return c;
}

/// B - tau(B) I.
template <MatrixScalar S>
Matrix<S> traceless_part(const Matrix<S>& b) {
  const S tau = normalized_trace(b);
  Matrix<S> r = b;
  for (std::size_t i = 0; i < r.rows(); ++i) r(i, i) -= tau;
  return r;
}

template <MatrixScalar S>
bool is_self_adjoint(const Matrix<S>& a, double tol) {
  if (!a.square()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j)
      if (std::abs(a(i, j) - conj_scalar(a(j, i))) > tol) return false;
  return true;
}

/// ||U*U - I||_2 (Hilbert-Schmidt) as a unitarity defect.
template <MatrixScalar S>
double unitarity_defect(const Matrix<S>& u) {
  require_square(u, "unitarity_defect");
  return hs_distance(adjoint(u) * u, Matrix<S>::identity(u.rows()));
}

template <MatrixScalar S>
std::vector<S> matvec(const Matrix<S>& a, std::span<const S> v) {
  if (v.size() != a.cols()) throw DimensionError("matvec: length mismatch");
  std::vector<S> out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    S acc{};
    const S* ai = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) acc += ai[j] * v[j];
    out[i] = acc;
  }
  return out;
}

template <MatrixScalar S>
std::vector<S> matvec(const Matrix<S>& a, const std::vector<S>& v) {
  return matvec(a, std::span<const S>(v));
}

// ---------------------------------------------------------------------------
// Euclidean helpers on real coordinate vectors.

inline double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}
inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}
inline void scale(std::span<double> x, double s) {
  for (auto& v : x) v *= s;
}

// ---------------------------------------------------------------------------
// Operator norm.

struct OperatorNormOptions {
  double tol = 1e-10;
  std::size_t max_iterations = 100000;
};

/// Largest singular value by power iteration on X*X, starting from the
/// normalized all-ones vector. A stagnating iterate (X*X v = 0) is perturbed
/// deterministically and restarted.
template <MatrixScalar S>
double operator_norm(const Matrix<S>& x, OperatorNormOptions opts = {}) {
  if (!(opts.tol > 0.0)) throw InputError("operator_norm: tol must be positive");
  const std::size_t n = x.cols();
  if (n == 0 || x.rows() == 0) return 0.0;
  if (max_abs_entry(x) == 0.0) return 0.0;
  const Matrix<S> xa = adjoint(x);

  std::vector<S> v(n, S(1.0 / std::sqrt(static_cast<double>(n))));
  auto normalize = [](std::vector<S>& w) {
    double s = 0.0;
    for (const auto& e : w) s += abs2(e);
    s = std::sqrt(s);
    if (s > 0.0)
      for (auto& e : w) e /= s;
    return s;
  };
  double estimate = 0.0;
  std::size_t perturbations = 0;
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    std::vector<S> xv = matvec(x, std::span<const S>(v));
    std::vector<S> w = matvec(xa, std::span<const S>(xv));
    const double len = normalize(w);
    if (len == 0.0) {
      // v lies in the kernel; tilt the start vector and retry.
      ++perturbations;
      for (std::size_t i = 0; i < n; ++i)
        v[i] += S(std::sin(1.0 + static_cast<double>(i * (perturbations + 1))));
      normalize(v);
      continue;
    }
    const double next = std::sqrt(len);  // ||X*X v|| -> sigma_max^2
    v = std::move(w);
    if (std::abs(next - estimate) <= opts.tol * next) return next;
    estimate = next;
  }
  throw ConvergenceError("operator_norm: power iteration did not converge", estimate);
}

// ---------------------------------------------------------------------------
// LU factorization with partial pivoting.

template <MatrixScalar S>
struct LuDecomposition {
  Matrix<S> lu;
  std::vector<std::size_t> pivots;
  int sign = 1;
  bool singular = false;
};

template <MatrixScalar S>
LuDecomposition<S> lu_decompose(Matrix<S> a) {
  require_square(a, "lu_decompose");
  const std::size_t n = a.rows();
  LuDecomposition<S> out;
  out.pivots.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        p = i;
      }
    }
    out.pivots[k] = p;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      out.sign = -out.sign;
    }
    if (best == 0.0) {
      out.singular = true;
      continue;
    }
    const S inv = S(1.0) / a(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const S f = a(i, k) * inv;
      a(i, k) = f;
      if (f == S(0.0)) continue;
      S* ai = a.row(i);
      const S* ak = a.row(k);
      for (std::size_t j = k + 1; j < n; ++j) ai[j] -= f * ak[j];
    }
  }
  out.lu = std::move(a);
  return out;
}

template <MatrixScalar S>
S determinant(const Matrix<S>& a) {
  const auto f = lu_decompose(a);
  S det = S(static_cast<double>(f.sign));
  for (std::size_t i = 0; i < a.rows(); ++i) det *= f.lu(i, i);
  return det;
}

/// Inverse via LU; throws SingularityError on an exactly zero pivot.
template <MatrixScalar S>
Matrix<S> inverse(const Matrix<S>& a) {
  auto f = lu_decompose(a);
  if (f.singular) throw SingularityError("inverse: matrix is singular");
  const std::size_t n = a.rows();
  Matrix<S> inv = Matrix<S>::identity(n);
  // Apply the row permutation to the identity.
  for (std::size_t k = 0; k < n; ++k)
    if (f.pivots[k] != k)
      for (std::size_t j = 0; j < n; ++j) std::swap(inv(k, j), inv(f.pivots[k], j));
  // Forward substitution with unit lower factor, then back substitution.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < i; ++k) {
      const S l = f.lu(i, k);
      if (l == S(0.0)) continue;
      for (std::size_t j = 0; j < n; ++j) inv(i, j) -= l * inv(k, j);
    }
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t k = ii + 1; k < n; ++k) {
      const S u = f.lu(ii, k);
      if (u == S(0.0)) continue;
      for (std::size_t j = 0; j < n; ++j) inv(ii, j) -= u * inv(k, j);
    }
    const S d = S(1.0) / f.lu(ii, ii);
    for (std::size_t j = 0; j < n; ++j) inv(ii, j) *= d;
  }
  return inv;
}

}  // namespace malnorm
