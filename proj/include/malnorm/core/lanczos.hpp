#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "malnorm/core/errors.hpp"
#include "malnorm/core/matrix.hpp"
#include "malnorm/core/symmetric_eig.hpp"

namespace malnorm {

/// y = A x for a symmetric linear operator on R^dim.
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

enum class SpectrumEnd { lowest, highest, both };

struct LanczosOptions {
  /// Converged when the Ritz residual |beta_m y_m| <= tol * max(1, ||T_m||).
  double tol = 1e-10;
  /// 0 means "dimension of the space".
  std::size_t max_iterations = 0;
  std::size_t check_every = 5;
  /// Start vector seed; the start vector is a fixed deterministic function of it.
  std::uint64_t start_seed = 0x5eed;
};

struct RitzPair {
  double value = 0.0;
  std::vector<double> vector;
  double residual = 0.0;
};

struct LanczosResult {
  RitzPair lowest;
  RitzPair highest;
  std::size_t iterations = 0;
  bool converged = false;
};

namespace detail {

inline double hashed_unit(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (i + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53 - 0.5;
}

// Orthogonalize v against the columns in `basis` twice (classical Gram-Schmidt
// with reorthogonalization); returns the remaining norm.
inline double orthogonalize(std::span<double> v, const std::vector<std::vector<double>>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& q : basis) {
      const double c = dot(q, v);
      axpy(-c, q, v);
    }
  }
  return norm2(v);
}

}  // namespace detail

/// Extreme eigenpairs of a symmetric operator by Lanczos with full
/// reorthogonalization. If a breakdown leaves the requested end unconverged,
/// the iteration continues from a fresh vector orthogonal to the basis.
inline LanczosResult lanczos_extremes(const LinearOperator& op, std::size_t dim, SpectrumEnd which,
                                      LanczosOptions opts = {}) {
  if (dim == 0) throw DimensionError("lanczos: empty space");
  if (!(opts.tol > 0.0)) throw InputError("lanczos: tol must be positive");
  const std::size_t max_it =
      opts.max_iterations == 0 ? dim : std::min(opts.max_iterations, dim);
  const std::size_t check_every = std::max<std::size_t>(1, opts.check_every);

  std::vector<std::vector<double>> basis;
  basis.reserve(std::min<std::size_t>(max_it, 512));
  Tridiagonal t;
  std::vector<double> w(dim);
  std::uint64_t restarts = 0;

  auto fresh_vector = [&]() {
    std::vector<double> v(dim);
    for (std::size_t attempt = 0; attempt < 8; ++attempt) {
      for (std::size_t i = 0; i < dim; ++i)
        v[i] = detail::hashed_unit(opts.start_seed + 7919 * restarts, i);
      ++restarts;
      const double len = detail::orthogonalize(v, basis);
      if (len > 1e-8 * std::sqrt(static_cast<double>(dim))) {
        scale(v, 1.0 / len);
        return v;
      }
    }
    throw Error("lanczos: could not generate a new orthogonal start vector");
  };

  LanczosResult result;
  struct Candidate {
    double value;
    std::vector<double> y;
    double residual;
  };
  auto candidate = [&](const std::vector<double>& values, bool lowest, double beta_last) {
    Candidate c;
    c.value = lowest ? values.front() : values.back();
    c.y = tridiagonal_eigenvector(t, c.value);
    c.residual = std::abs(beta_last * c.y.back());
    return c;
  };
  auto to_ritz_pair = [&](const Candidate& c) {
    RitzPair pair;
    pair.value = c.value;
    pair.residual = c.residual;
    pair.vector.assign(dim, 0.0);
    for (std::size_t k = 0; k < basis.size(); ++k) axpy(c.y[k], basis[k], pair.vector);
    const double len = norm2(pair.vector);
    if (len > 0.0) scale(pair.vector, 1.0 / len);
    return pair;
  };

  std::vector<double> q = fresh_vector();
  double beta = 0.0;
  for (std::size_t m = 0; m < max_it; ++m) {
    basis.push_back(q);
    op(basis.back(), w);
    const double alpha = dot(basis.back(), w);
    t.diag.push_back(alpha);
    // w <- w - alpha q_m - beta q_{m-1}, then full reorthogonalization.
    axpy(-alpha, basis.back(), w);
    if (basis.size() >= 2) axpy(-beta, basis[basis.size() - 2], w);
    beta = detail::orthogonalize(w, basis);

    const std::size_t steps = basis.size();
    const bool last = steps == max_it;
    const bool breakdown = beta <= 1e-12 * std::max(1.0, std::abs(alpha));
    if (last || breakdown || steps % check_every == 0) {
      // With breakdown the Ritz values of the current block are exact.
      const double beta_eff = breakdown ? 0.0 : beta;
      const auto values = tridiagonal_eigenvalues(t);
      const double tscale = std::max({1.0, std::abs(values.front()), std::abs(values.back())});
      Candidate lo, hi;
      bool done = true;
      if (which != SpectrumEnd::highest) {
        lo = candidate(values, true, beta_eff);
        done = done && lo.residual <= opts.tol * tscale;
      }
      if (which != SpectrumEnd::lowest) {
        hi = candidate(values, false, beta_eff);
        done = done && hi.residual <= opts.tol * tscale;
      }
      result.iterations = steps;
      // A generic start vector has a component in every eigenspace, so an
      // invariant Krylov subspace already carries both ends of the spectrum.
      const bool exhausted = last && steps == dim;
      if (done || exhausted) {
        if (which != SpectrumEnd::highest) result.lowest = to_ritz_pair(lo);
        if (which != SpectrumEnd::lowest) result.highest = to_ritz_pair(hi);
        result.converged = true;
        return result;
      }
      if (last) {
        const Candidate& c = which == SpectrumEnd::highest ? hi : lo;
        throw ConvergenceError("lanczos: iteration cap reached before convergence", c.value,
                               to_ritz_pair(c).vector);
      }
    }
    if (breakdown) {
      q = fresh_vector();
      beta = 0.0;
      t.off.push_back(0.0);
    } else {
      q.assign(w.begin(), w.end());
      scale(q, 1.0 / beta);
      t.off.push_back(beta);
    }
  }
  return result;  // unreachable: the loop always returns or throws on its last step
}

}  // namespace malnorm
