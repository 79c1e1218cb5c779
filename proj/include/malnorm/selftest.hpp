#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "malnorm/construction.hpp"
#include "malnorm/ensembles.hpp"
#include "malnorm/expanders.hpp"
#include "malnorm/malnormality.hpp"
#include "malnorm/random.hpp"

namespace malnorm {

struct CheckResult {
  std::string name;
  double worst = 0.0;      // largest residual seen
  double tolerance = 0.0;
  std::size_t instances = 0;
  bool pass = false;
};

namespace detail {

inline ComplexMatrix selftest_gaussian(std::size_t n, SeededStream& s) {
  return gaussian_matrix<cplx>(n, s);
}

inline ComplexMatrix selftest_hermitian(std::size_t n, SeededStream& s) {
  return hermitian_real_part(gaussian_matrix<cplx>(n, s));
}

inline CheckResult finish(std::string name, double worst, double tol, std::size_t count) {
  return {std::move(name), worst, tol, count, worst <= tol};
}

}  // namespace detail

/// The algebraic identities the expander and malnormality arguments rest on,
/// each checked on `instances` random cases with 2 <= n <= max_n.
inline std::vector<CheckResult> identity_suite(std::uint64_t seed, std::size_t instances = 100,
                                               std::size_t max_n = 12) {
  using detail::selftest_gaussian;
  using detail::selftest_hermitian;
  if (max_n < 2) throw InputError("identity_suite: max_n must be at least 2");
  const std::size_t span_n = max_n - 1;
  double commute = 0, split = 0, dual = 0, eh = 0, invariance = 0, torus = 0;
  for (std::size_t t = 0; t < instances; ++t) {
    SeededStream s(seed, t);
    const std::size_t n = 2 + t % span_n;
    const std::size_t k = 1 + t % 3;
    std::vector<ComplexMatrix> us;
    for (std::size_t i = 0; i < k; ++i) us.push_back(haar_unitary(n, s));

    const auto b = selftest_hermitian(n, s);
    commute = std::max(commute, commute_identity_residual<cplx>(us, b));

    const auto x = selftest_gaussian(n, s);
    const double whole = hs_norm_squared(commutator(x, b));
    const double parts = hs_norm_squared(commutator(hermitian_real_part(x), b)) +
                         hs_norm_squared(commutator(hermitian_imag_part(x), b));
    split = std::max(split, std::abs(whole - parts));

    const auto y = selftest_gaussian(n, s);
    dual = std::max(dual, std::abs(trace(apply_E<cplx>(us, x) * y) -
                                   trace(apply_E_dagger<cplx>(us, y) * x)));

    const cplx te = trace(apply_E<cplx>(us, b) * b);
    eh = std::max({eh, std::abs(te - trace(apply_E_h<cplx>(us, b) * b)),
                   std::abs(te - trace(apply_E_dagger<cplx>(us, b) * b))});

    invariance = std::max(invariance, std::abs(hs_norm(us[0] * x * us.back()) - hs_norm(x)));

    const cplx roots[4] = {1.0, cplx(0, 1), -1.0, cplx(0, -1)};
    std::size_t points = 1;
    for (std::size_t i = 0; i < k; ++i) points *= 4;
    double avg = 0.0;
    std::vector<cplx> w(k);
    for (std::size_t code = 0; code < points; ++code) {
      std::size_t c = code;
      for (std::size_t i = 0; i < k; ++i, c /= 4) w[i] = roots[c % 4];
      avg += hs_norm_squared(commutator(j_omega<cplx>(us, w), b));
    }
    avg /= static_cast<double>(points);
    double target = 0.0;
    for (const auto& u : us) target += hs_norm_squared(commutator(u, b));
    target /= 2.0 * static_cast<double>(k);
    torus = std::max(torus, std::abs(avg - target));
  }
  return {detail::finish("commute-identity", commute, 1e-9, instances),
          detail::finish("split-j", split, 1e-9, instances),
          detail::finish("adjoint-duality", dual, 1e-10, instances),
          detail::finish("eh-equality", eh, 1e-10, instances),
          detail::finish("unitary-invariance", invariance, 1e-10, instances),
          detail::finish("torus-average", torus, 1e-9, instances)};
}

/// Closed-form values the solvers must reproduce.
inline std::vector<CheckResult> oracle_suite() {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, double err, double tol) {
    out.push_back(detail::finish(std::move(name), err, tol, 1));
  };
  // mal(I) = 0 and the 2x2 shift has H = diag(2, 4), so mal = 1.
  add("mal-identity", mal_exact(RealMatrix::identity(4)).value, 1e-12);
  add("mal-shift-2", std::abs(mal_exact(shift_matrix(2)).value - 1.0), 1e-12);
  add("mal-shift-2-lanczos", std::abs(mal_iterative(shift_matrix(2)).value - 1.0), 1e-9);
  add("mal-shift-2-localopt", std::abs(mal_localopt(shift_matrix(2), {}, 1).value - 1.0), 1e-9);

  const auto zero = philox4x32({0, 0, 0, 0}, {0, 0});
  add("philox-known-answer",
      (zero[0] == 0x6627e8d5u && zero[1] == 0xe169c58du && zero[2] == 0xbc57ac4cu &&
       zero[3] == 0x9b00dbd8u)
          ? 0.0
          : 1.0,
      0.0);

  const auto i3 = RealMatrix::identity(3);
  add("j-map-identity", hs_distance(j_map(i3, i3), RealMatrix(0.5 * i3)), 1e-15);

  const std::vector<ComplexMatrix> id{ComplexMatrix::identity(3)};
  add("edge-constant-identity", std::abs(edge_constant<cplx>(id) - 1.0), 1e-10);
  add("hastings-threshold-2", std::abs(hastings_threshold(2) - std::sqrt(3.0) / 2.0), 1e-15);

  const auto cert = certify(ComplexMatrix::identity(2), ComplexMatrix::identity(2));
  add("certify-identity-fails", cert.status == CertificateStatus::fail ? 0.0 : 1.0, 0.0);

  SeededStream s(0x5e1f, 0);
  double worst = 0.0;
  for (std::size_t t = 0; t < 10; ++t) {
    const auto x = gaussian_matrix<cplx>(2 + t % 5, s);
    const double e = mal_exact(x).value;
    worst = std::max({worst, std::abs(mal_iterative(x).value - e) / std::max(e, 1e-300),
                      std::abs(mal_localopt(x, {}, t).value - e) / std::max(e, 1e-300)});
  }
  add("solver-agreement", worst, 1e-6);
  return out;
}

}  // namespace malnorm
