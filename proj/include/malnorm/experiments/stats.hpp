#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "malnorm/core/errors.hpp"
#include "malnorm/core/matrix.hpp"

namespace malnorm {

struct SummaryStats {
  std::size_t n = 0;
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double variance = 0.0;  // divisor count - 1
  double min = 0.0;
  double max = 0.0;
};

/// Mean, median (midpoint of the two central values for even counts) and the
/// unbiased variance, by two passes.
inline SummaryStats summarize_values(std::span<const double> values, std::size_t n = 0) {
  if (values.size() < 2) throw InputError("summarize: need at least 2 values");
  SummaryStats s;
  s.n = n;
  s.count = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.count);
  double ss = 0.0, comp = 0.0;
  for (double v : values) {
    ss += (v - s.mean) * (v - s.mean);
    comp += v - s.mean;
  }
  s.variance = std::max(0.0, (ss - comp * comp / static_cast<double>(s.count)) /
                                 static_cast<double>(s.count - 1));
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t h = s.count / 2;
  s.median = s.count % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
  s.min = sorted.front();
  s.max = sorted.back();
  return s;
}

// ---------------------------------------------------------------------------
// kernel density

struct KdeCurve {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
};

inline double silverman_bandwidth(std::span<const double> values) {
  if (values.size() < 2) throw InputError("kde: need at least 2 values");
  const auto s = summarize_values(values);
  const double sd = std::sqrt(s.variance);
  if (!(sd > 0.0)) {
    throw InputError("kde: all values are equal; pass an explicit bandwidth");
  }
  return 1.06 * sd * std::pow(static_cast<double>(values.size()), -0.2);
}

/// Gaussian-kernel density estimate at x.
inline double kde_evaluate(std::span<const double> values, double h, double x) {
  const double c = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  double acc = 0.0;
  for (double v : values) {
    const double z = (x - v) / h;
    acc += std::exp(-0.5 * z * z);
  }
  return c * acc;
}

inline KdeCurve kde(std::span<const double> values, std::optional<double> bandwidth = {},
                    std::size_t grid_points = 512) {
  if (values.size() < 2) throw InputError("kde: need at least 2 values");
  if (grid_points < 2) throw InputError("kde: grid needs at least 2 points");
  const double h = bandwidth ? *bandwidth : silverman_bandwidth(values);
  if (!(h > 0.0) || !std::isfinite(h)) throw InputError("kde: bandwidth must be positive");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it - 5.0 * h, hi = *hi_it + 5.0 * h;
  KdeCurve k;
  k.bandwidth = h;
  k.grid.resize(grid_points);
  k.density.resize(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    k.grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    k.density[i] = kde_evaluate(values, h, k.grid[i]);
  }
  return k;
}

inline double trapezoid(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return acc;
}

// ---------------------------------------------------------------------------
// power regression y = alpha n^beta + gamma

struct PowerFit {
  double alpha = 0.0, beta = 0.0, gamma = 0.0;
  std::array<std::array<double, 2>, 3> ci95{};  // [lo, hi] for alpha, beta, gamma
  double rss = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<double> rss_history;  // rss after each accepted step, from the chosen start
};

struct PowerFitOptions {
  std::size_t max_iterations = 2000;
  double step_tol = 1e-12;   // relative parameter change
  double rss_tol = 1e-30;    // absolute: a zero-residual fit stops here
};

namespace detail {

using Params = std::array<double, 3>;

inline double power_model(const Params& p, double x) { return p[0] * std::pow(x, p[1]) + p[2]; }

inline double power_rss(const Params& p, std::span<const double> xs, std::span<const double> ys) {
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = power_model(p, xs[i]) - ys[i];
    acc += r * r;
  }
  return acc;
}

// Central differences, one column per parameter.
inline std::vector<Params> power_jacobian(const Params& p, std::span<const double> xs) {
  std::vector<Params> jac(xs.size());
  for (std::size_t k = 0; k < 3; ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(p[k]));
    Params up = p, dn = p;
    up[k] += h;
    dn[k] -= h;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      jac[i][k] = (power_model(up, xs[i]) - power_model(dn, xs[i])) / (2.0 * h);
    }
  }
  return jac;
}

inline std::optional<Params> solve3(std::array<std::array<double, 3>, 3> a, Params b) {
  for (std::size_t c = 0; c < 3; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < 3; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (!(std::abs(a[piv][c]) > 0.0) || !std::isfinite(a[piv][c])) return std::nullopt;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < 3; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < 3; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  Params x{};
  for (std::size_t c = 3; c-- > 0;) {
    double s = b[c];
    for (std::size_t k = c + 1; k < 3; ++k) s -= a[c][k] * x[k];
    x[c] = s / a[c][c];
  }
  return x;
}

inline std::array<std::array<double, 3>, 3> normal_matrix(const std::vector<Params>& jac) {
  std::array<std::array<double, 3>, 3> jtj{};
  for (const auto& row : jac)
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) jtj[a][b] += row[a] * row[b];
  return jtj;
}

// Start from gamma0: beta0 from the log-log slope of |y - gamma0|, then alpha0
// by least squares with beta0 and gamma0 fixed.
inline std::optional<Params> power_start(double gamma0, std::span<const double> xs,
                                         std::span<const double> ys) {
  const std::size_t m = xs.size();
  double sign = 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double d = ys[i] - gamma0;
    if (d == 0.0) return std::nullopt;
    const double s = d > 0 ? 1.0 : -1.0;
    if (sign == 0.0) sign = s;
    if (s != sign) return std::nullopt;
    const double lx = std::log(xs[i]), ly = std::log(std::abs(d));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double md = static_cast<double>(m);
  const double den = sxx - sx * sx / md;
  if (!(den > 0.0)) return std::nullopt;
  const double beta0 = (sxy - sx * sy / md) / den;
  double num = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double p = std::pow(xs[i], beta0);
    num += p * (ys[i] - gamma0);
    nn += p * p;
  }
  if (!(nn > 0.0)) return std::nullopt;
  return Params{num / nn, beta0, gamma0};
}

struct LmRun {
  Params p{};
  double rss = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<double> history;
};

inline LmRun levenberg(Params p, std::span<const double> xs, std::span<const double> ys,
                       const PowerFitOptions& opts) {
  LmRun run;
  double rss = power_rss(p, xs, ys);
  run.history.push_back(rss);
  double mu = 1e-3;
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    run.iterations = it + 1;
    if (rss <= opts.rss_tol) {
      run.converged = true;
      break;
    }
    const auto jac = power_jacobian(p, xs);
    const auto jtj = normal_matrix(jac);
    Params g{};
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = power_model(p, xs[i]) - ys[i];
      for (std::size_t k = 0; k < 3; ++k) g[k] -= jac[i][k] * r;
    }
    bool accepted = false;
    bool tiny_step = false;
    while (mu < 1e16) {
      auto a = jtj;
      for (std::size_t k = 0; k < 3; ++k) a[k][k] += mu * std::max(jtj[k][k], 1e-300);
      const auto step = solve3(a, g);
      if (step) {
        Params trial = p;
        double rel = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
          trial[k] += (*step)[k];
          rel = std::max(rel, std::abs((*step)[k]) / std::max(1e-12, std::abs(p[k])));
        }
        const double trss = power_rss(trial, xs, ys);
        if (std::isfinite(trss) && trss <= rss) {
          tiny_step = rel < opts.step_tol || rss - trss <= 1e-15 * rss;
          p = trial;
          rss = trss;
          run.history.push_back(rss);
          mu = std::max(mu / 3.0, 1e-12);
          accepted = true;
          break;
        }
      }
      mu *= 4.0;
    }
    if (!accepted || tiny_step) {
      run.converged = true;  // no further decrease is available
      break;
    }
  }
  run.p = p;
  run.rss = rss;
  return run;
}

}  // namespace detail

/// Least-squares fit of alpha n^beta + gamma by Levenberg-damped Gauss-Newton
/// with a numeric Jacobian. Several gamma starts are tried (below the data,
/// above it, zero); the lowest residual wins.
inline PowerFit fit_power(std::span<const double> xs, std::span<const double> ys,
                          PowerFitOptions opts = {}) {
  const std::size_t m = xs.size();
  if (m != ys.size()) throw DimensionError("fit_power: xs and ys differ in length");
  if (m < 4) throw InputError("fit_power: need at least 4 points");
  for (std::size_t i = 0; i < m; ++i) {
    if (!(xs[i] > 0.0)) throw InputError("fit_power: xs must be positive");
    for (std::size_t j = 0; j < i; ++j)
      if (xs[i] == xs[j]) throw InputError("fit_power: xs must be distinct");
    if (!std::isfinite(ys[i])) throw InputError("fit_power: ys must be finite");
  }
  const auto [lo_it, hi_it] = std::minmax_element(ys.begin(), ys.end());
  const double lo = *lo_it, hi = *hi_it;
  const double span_y = std::max(hi - lo, 1e-12 * std::max(1.0, std::abs(hi)));

  std::vector<double> gammas{0.0};
  for (double f : {1e-3, 1e-2, 0.1, 0.5}) {
    gammas.push_back(lo - f * span_y);
    gammas.push_back(hi + f * span_y);
  }

  std::optional<detail::LmRun> best;
  for (double g0 : gammas) {
    const auto start = detail::power_start(g0, xs, ys);
    if (!start) continue;
    auto run = detail::levenberg(*start, xs, ys, opts);
    if (!best || run.rss < best->rss) best = std::move(run);
  }
  if (!best) throw InputError("fit_power: no admissible starting point");

  PowerFit fit;
  fit.alpha = best->p[0];
  fit.beta = best->p[1];
  fit.gamma = best->p[2];
  fit.rss = best->rss;
  fit.converged = best->converged;
  fit.iterations = best->iterations;
  fit.rss_history = std::move(best->history);

  // Linearized covariance rss/(m-3) (J^T J)^{-1}, normal quantile.
  const auto jtj = detail::normal_matrix(detail::power_jacobian(best->p, xs));
  const double s2 = fit.rss / static_cast<double>(m - 3);
  for (std::size_t k = 0; k < 3; ++k) {
    detail::Params e{};
    e[k] = 1.0;
    const auto col = detail::solve3(jtj, e);
    const double var = col ? std::max(0.0, (*col)[k] * s2) : std::numeric_limits<double>::infinity();
    const double half = 1.96 * std::sqrt(var);
    fit.ci95[k] = {best->p[k] - half, best->p[k] + half};
  }
  return fit;
}

}  // namespace malnorm
