#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "malnorm/core/errors.hpp"
#include "malnorm/core/matrix.hpp"

namespace malnorm {

/// Eigenvalues of a general square matrix, in no particular order. For a real
/// input, complex eigenvalues come in exactly conjugate pairs and real ones have
/// an imaginary part of exactly zero.
struct GeneralEigenResult {
  std::vector<cplx> values;
};

struct GeneralEigOptions {
  std::size_t max_iterations_per_value = 60;
};

namespace detail {

/// Diagonal similarity scaling by powers of two so that row and column norms
/// are comparable (Parlett-Reinsch).
template <MatrixScalar S>
void balance(Matrix<S>& a) {
  constexpr double radix = 2.0;
  constexpr double sqrdx = radix * radix;
  const std::size_t n = a.rows();
  bool done = false;
  while (!done) {
    done = true;
    for (std::size_t i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        g = 1.0 / f;
        for (std::size_t j = 0; j < n; ++j) a(i, j) *= g;
        for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
      }
    }
  }
}

/// Orthogonal (unitary) reduction to upper Hessenberg form by Householder
/// reflectors; entries below the first sub-diagonal are set to zero.
template <MatrixScalar S>
void hessenberg_reduce(Matrix<S>& a) {
  const std::size_t n = a.rows();
  std::vector<S> v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double sigma = 0.0;
    for (std::size_t i = k + 2; i < n; ++i) sigma += abs2(a(i, k));
    if (sigma == 0.0) continue;
    const S x0 = a(k + 1, k);
    const double norm = std::sqrt(abs2(x0) + sigma);
    S phase = S(1.0);
    if (std::abs(x0) != 0.0) phase = x0 / std::abs(x0);
    const S alpha = -phase * norm;
    for (std::size_t i = k + 1; i < n; ++i) v[i] = a(i, k);
    v[k + 1] -= alpha;
    double vv = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vv += abs2(v[i]);
    const double tau = 2.0 / vv;
    // Left: A <- (I - tau v v*) A on rows k+1.., columns k..
    for (std::size_t j = k; j < n; ++j) {
      S s{};
      for (std::size_t i = k + 1; i < n; ++i) s += conj_scalar(v[i]) * a(i, j);
      s *= tau;
      for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= v[i] * s;
    }
    // Right: A <- A (I - tau v v*) on all rows, columns k+1..
    for (std::size_t i = 0; i < n; ++i) {
      S s{};
      for (std::size_t j = k + 1; j < n; ++j) s += a(i, j) * v[j];
      s *= tau;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= s * conj_scalar(v[j]);
    }
    a(k + 1, k) = alpha;
    for (std::size_t i = k + 2; i < n; ++i) a(i, k) = S{};
  }
}

inline double sign_of(double magnitude, double sign_source) {
  return sign_source >= 0.0 ? std::abs(magnitude) : -std::abs(magnitude);
}

/// Francis double-shift QR on a real upper Hessenberg matrix (eigenvalues
/// only). Follows the classic EISPACK hqr structure with exceptional shifts
/// after 10 and 20 stagnant iterations.
inline std::vector<cplx> francis_hqr(RealMatrix& h, std::size_t max_its) {
  const int n = static_cast<int>(h.rows());
  // 1-based accessor keeps the index arithmetic identical to the textbook form.
  auto a = [&h](int i, int j) -> double& { return h(static_cast<std::size_t>(i - 1),
                                                    static_cast<std::size_t>(j - 1)); };
  std::vector<double> wr(static_cast<std::size_t>(n) + 1), wi(static_cast<std::size_t>(n) + 1);
  double anorm = 0.0;
  for (int i = 1; i <= n; ++i)
    for (int j = std::max(i - 1, 1); j <= n; ++j) anorm += std::abs(a(i, j));
  int nn = n;
  double t = 0.0;
  double p = 0.0, q = 0.0, r = 0.0, s = 0.0, w = 0.0, x = 0.0, y = 0.0, z = 0.0;
  while (nn >= 1) {
    std::size_t its = 0;
    int l = 0;
    do {
      for (l = nn; l >= 2; --l) {
        s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) + s == s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      x = a(nn, nn);
      if (l == nn) {
        wr[nn] = x + t;
        wi[nn] = 0.0;
        --nn;
      } else {
        y = a(nn - 1, nn - 1);
        w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + w;
          z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign_of(z, p);
            wr[nn - 1] = wr[nn] = x + z;
            if (z != 0.0) wr[nn] = x - w / z;
            wi[nn - 1] = wi[nn] = 0.0;
          } else {
            wr[nn - 1] = wr[nn] = x + p;
            wi[nn] = z;
            wi[nn - 1] = -z;
          }
          nn -= 2;
        } else {
          if (its >= max_its) {
            throw ConvergenceError("general_eigvals: Francis QR did not converge", x + t);
          }
          if (its > 0 && its % 10 == 0) {
            // Exceptional shift.
            t += x;
            for (int i = 1; i <= nn; ++i) a(i, i) -= x;
            s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int m = nn - 2;
          for (; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            s = y - z;
            p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) +
                                            std::abs(a(m + 1, m + 1)));
            if (u + v == v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != m + 2) a(i, i - 3) = 0.0;
          }
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0.0;
              if (k != nn - 1) r = a(k + 2, k - 1);
              if ((x = std::abs(p) + std::abs(q) + std::abs(r)) != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            if ((s = sign_of(std::sqrt(p * p + q * q + r * r), p)) != 0.0) {
              if (k == m) {
                if (l != m) a(k, k - 1) = -a(k, k - 1);
              } else {
                a(k, k - 1) = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (int j = k; j <= nn; ++j) {
                p = a(k, j) + q * a(k + 1, j);
                if (k != nn - 1) {
                  p += r * a(k + 2, j);
                  a(k + 2, j) -= p * z;
                }
                a(k + 1, j) -= p * y;
                a(k, j) -= p * x;
              }
              const int mmin = nn < k + 3 ? nn : k + 3;
              for (int i = l; i <= mmin; ++i) {
                p = x * a(i, k) + y * a(i, k + 1);
                if (k != nn - 1) {
                  p += z * a(i, k + 2);
                  a(i, k + 2) -= p * r;
                }
                a(i, k + 1) -= p * q;
                a(i, k) -= p;
              }
            }
          }
        }
      }
    } while (l < nn - 1);
  }
  std::vector<cplx> values(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) values[static_cast<std::size_t>(i - 1)] = {wr[i], wi[i]};
  return values;
}

/// Single-shift complex QR with Wilkinson shifts on an upper Hessenberg matrix.
inline std::vector<cplx> complex_hessenberg_qr(ComplexMatrix& h, std::size_t max_its) {
  const std::size_t n = h.rows();
  std::vector<cplx> values(n);
  const double eps = std::numeric_limits<double>::epsilon();
  double hnorm = 0.0;
  for (const auto& v : h.entries()) hnorm = std::max(hnorm, std::abs(v));
  std::vector<double> cs(n);
  std::vector<cplx> sn(n);
  std::size_t hi = n;
  while (hi > 0) {
    const std::size_t top = hi - 1;
    std::size_t its = 0;
    for (;;) {
      std::size_t l = top;
      while (l > 0) {
        double s = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
        if (s == 0.0) s = hnorm;
        if (std::abs(h(l, l - 1)) <= eps * s) {
          h(l, l - 1) = 0.0;
          break;
        }
        --l;
      }
      if (l == top) {
        values[top] = h(top, top);
        --hi;
        break;
      }
      if (its >= max_its) {
        throw ConvergenceError("general_eigvals: complex QR did not converge",
                               std::abs(h(top, top)));
      }
      ++its;
      cplx mu;
      if (its % 10 == 0) {
        mu = h(top, top) + cplx(std::abs(h(top, top - 1)), 0.0);
      } else {
        // Eigenvalue of the trailing 2x2 block nearest to its (2,2) entry.
        const cplx a = h(top - 1, top - 1), b = h(top - 1, top), c = h(top, top - 1),
                   d = h(top, top);
        const cplx half_tr = 0.5 * (a + d);
        const cplx disc = std::sqrt(0.25 * (a - d) * (a - d) + b * c);
        const cplx l1 = half_tr + disc, l2 = half_tr - disc;
        mu = std::abs(l1 - d) < std::abs(l2 - d) ? l1 : l2;
      }
      for (std::size_t k = l; k <= top; ++k) h(k, k) -= mu;
      for (std::size_t k = l; k < top; ++k) {
        const cplx a = h(k, k), b = h(k + 1, k);
        const double r = std::hypot(std::abs(a), std::abs(b));
        double c;
        cplx s;
        if (r == 0.0) {
          c = 1.0;
          s = 0.0;
        } else if (std::abs(a) == 0.0) {
          c = 0.0;
          s = std::conj(b) / std::abs(b);
        } else {
          c = std::abs(a) / r;
          s = (a / std::abs(a)) * std::conj(b) / r;
        }
        cs[k] = c;
        sn[k] = s;
        for (std::size_t j = k; j <= top; ++j) {
          const cplx x = h(k, j), y = h(k + 1, j);
          h(k, j) = c * x + s * y;
          h(k + 1, j) = -std::conj(s) * x + c * y;
        }
      }
      for (std::size_t k = l; k < top; ++k) {
        const double c = cs[k];
        const cplx s = sn[k];
        const std::size_t last = std::min(k + 2, top);
        for (std::size_t i = l; i <= last; ++i) {
          const cplx x = h(i, k), y = h(i, k + 1);
          h(i, k) = x * c + y * std::conj(s);
          h(i, k + 1) = -x * s + y * c;
        }
      }
      for (std::size_t k = l; k <= top; ++k) h(k, k) += mu;
    }
  }
  return values;
}

}  // namespace detail

/// All eigenvalues of a real square matrix: balancing, Householder Hessenberg
/// reduction, Francis double-shift QR.
inline GeneralEigenResult general_eigvals(const RealMatrix& a, GeneralEigOptions opts = {}) {
  require_square(a, "general_eigvals");
  RealMatrix h = a;
  detail::balance(h);
  detail::hessenberg_reduce(h);
  return {detail::francis_hqr(h, opts.max_iterations_per_value)};
}

/// All eigenvalues of a complex square matrix: balancing, Householder
/// Hessenberg reduction, single-shift complex QR.
inline GeneralEigenResult general_eigvals(const ComplexMatrix& a, GeneralEigOptions opts = {}) {
  require_square(a, "general_eigvals");
  ComplexMatrix h = a;
  detail::balance(h);
  detail::hessenberg_reduce(h);
  return {detail::complex_hessenberg_qr(h, opts.max_iterations_per_value)};
}

}  // namespace malnorm
