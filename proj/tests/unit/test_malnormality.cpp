#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "malnorm/malnormality.hpp"
#include "test_support.hpp"

namespace malnorm {
namespace {

using testing::random_complex;
using testing::random_real;
using testing::random_unitary;

std::vector<double> random_coords(std::size_t d, SeededStream& s) {
  std::vector<double> b(d);
  for (auto& v : b) v = s.next_normal_pair().first;
  return b;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

TEST(Hessian, IdentityGivesZero) {
  const auto op = build_hessian(RealMatrix::identity(3), build_basis(3, BasisFlavor::real_symmetric));
  EXPECT_EQ(max_abs_entry(op.dense()), 0.0);
}

TEST(Hessian, TwoByTwoShift) {
  // Canonical ordering puts the off-diagonal pair first: [S, E_1] has
  // squared norm 1, [S, E_2] has squared norm 2, and the two are orthogonal.
  const auto op = build_hessian(shift_matrix(2), build_basis(2, BasisFlavor::real_symmetric));
  const RealMatrix expected{{2.0, 0.0}, {0.0, 4.0}};
  EXPECT_LT(hs_distance(op.dense(), expected), 1e-14);
}

TEST(Hessian, QuadraticFormIsCommutatorNorm) {
  SeededStream s(40, 0);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + t % 6;
    if (t % 2) {
      const auto x = random_real(n, s);
      const auto basis = build_basis(n, BasisFlavor::real_symmetric);
      const auto op = build_hessian(x, basis);
      const auto b = random_coords(basis.dim(), s);
      const double direct = hs_norm_squared(commutator(x, basis.phi<double>(b)));
      EXPECT_NEAR(0.5 * dot(b, matvec(op.dense(), b)), direct, 1e-10 * std::max(1.0, direct));
    } else {
      const auto x = random_complex(n, s);
      const auto basis = build_basis(n, BasisFlavor::complex_hermitian);
      const auto op = build_hessian(x, basis);
      const auto b = random_coords(basis.dim(), s);
      const double direct = hs_norm_squared(commutator(x, basis.phi<cplx>(b)));
      EXPECT_NEAR(0.5 * dot(b, matvec(op.dense(), b)), direct, 1e-10 * std::max(1.0, direct));
    }
  }
}

TEST(Hessian, MatrixFreeMatchesDense) {
  SeededStream s(41, 0);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + t % 11;
    const auto x = random_complex(n, s);
    const auto flavor = t % 3 ? BasisFlavor::complex_hermitian : BasisFlavor::real_symmetric;
    HessianOperator<cplx> op(x, build_basis(n, flavor));
    const auto b = random_coords(op.dim(), s);
    const auto free = apply_hessian(op, b);
    op.materialize();
    const auto dense = matvec(op.dense(), b);
    double diff = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) diff = std::max(diff, std::abs(free[i] - dense[i]));
    EXPECT_LE(diff, 1e-9 * std::max(1.0, norm2(dense)));
    EXPECT_GE(dot(b, free), -1e-10);
  }
  HessianOperator<double> op(RealMatrix::identity(3), build_basis(3, BasisFlavor::real_symmetric));
  for (double v : apply_hessian(op, std::vector<double>(5, 0.0))) EXPECT_EQ(v, 0.0);
}

TEST(Hessian, PsdAndBoundedBy8NormSquared) {
  SeededStream s(42, 0);
  for (int t = 0; t < 10; ++t) {
    const auto x = random_complex(6, s);
    const auto op = build_hessian(x, build_basis(6, BasisFlavor::complex_hermitian));
    const auto ev = symmetric_eig(op.dense(), false).values;
    const double hn = std::max(std::abs(ev.front()), std::abs(ev.back()));
    EXPECT_GE(ev.front(), -1e-9 * hn);
    const double xn = operator_norm(x);
    EXPECT_LE(ev.back(), 8.0 * xn * xn + 1e-6);
  }
}

TEST(Hessian, FlavorScalarMismatch) {
  EXPECT_THROW(HessianOperator<double>(RealMatrix::identity(3),
                                       build_basis(3, BasisFlavor::complex_hermitian)),
               InputError);
  EXPECT_THROW(build_hessian(RealMatrix::identity(3), build_basis(4, BasisFlavor::real_symmetric)),
               InputError);
}

TEST(MalExact, Examples) {
  EXPECT_EQ(mal_exact(RealMatrix::identity(4)).value, 0.0);
  EXPECT_NEAR(mal_exact(RealMatrix::diagonal({1.0, 2.0})).value, 0.0, 1e-12);
  const auto s2 = mal_exact(shift_matrix(2), BasisFlavor::real_symmetric);
  EXPECT_NEAR(s2.value, 1.0, 1e-14);
  EXPECT_NEAR(s2.lambda1, 2.0, 1e-14);
  EXPECT_EQ(s2.solver, MalSolver::dense);
  EXPECT_THROW(mal_exact(RealMatrix(1, 1)), InputError);
}

TEST(MalExact, ResultInvariants) {
  SeededStream s(43, 0);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + t % 7;
    const auto x = random_complex(n, s);
    const auto r = mal_exact(x);
    EXPECT_EQ(r.flavor, BasisFlavor::complex_hermitian);
    EXPECT_NEAR(r.value, std::sqrt(std::max(r.lambda1, 0.0) / 2.0), 1e-12);
    EXPECT_NEAR(norm2(r.minimizer), 1.0, 1e-10);
    const auto b = build_basis(n, r.flavor).phi<cplx>(r.minimizer);
    EXPECT_LT(rel(hs_norm_squared(commutator(x, b)), r.lambda1 / 2.0), 1e-8);
    EXPECT_LT(r.residual, 1e-9 * std::max(1.0, r.lambda1));
  }
}

TEST(MalExact, DefaultFlavorFollowsScalarType) {
  SeededStream s(44, 0);
  const auto x = random_real(4, s);
  EXPECT_EQ(mal_exact(x).flavor, BasisFlavor::real_symmetric);
  const auto cx = mal_exact(x, BasisFlavor::complex_hermitian);
  EXPECT_EQ(cx.flavor, BasisFlavor::complex_hermitian);
  // The complex feasible set contains the real one.
  EXPECT_LE(cx.value, mal_exact(x).value + 1e-12);
}

TEST(MalExact, TranslationScalingAdjoint) {
  SeededStream s(45, 0);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + t % 6;
    const auto x = random_complex(n, s);
    const double m = mal_exact(x).value;
    const cplx c(s.next_normal_pair().first, s.next_normal_pair().second);
    ComplexMatrix shifted = x;
    for (std::size_t i = 0; i < n; ++i) shifted(i, i) += c;
    EXPECT_NEAR(mal_exact(shifted).value, m, 1e-9);
    EXPECT_NEAR(mal_exact(c * x).value, std::abs(c) * m, 1e-9 * std::max(1.0, std::abs(c)));
    EXPECT_NEAR(mal_exact(adjoint(x)).value, m, 1e-9);
    const auto w = random_unitary(n, s);
    EXPECT_NEAR(mal_exact(adjoint(w) * x * w).value, m, 1e-8);
    EXPECT_GE(m, 0.0);
    EXPECT_LE(m, 2.0 * operator_norm(x) + 1e-9);
  }
}

TEST(MalIterative, MatchesExact) {
  SeededStream s(46, 0);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + t % 14;
    const bool real = t % 2;
    const auto xc = random_complex(n, s);
    const auto xr = random_real(n, s);
    const auto exact = real ? mal_exact(xr) : mal_exact(xc);
    const auto it = real ? mal_iterative(xr) : mal_iterative(xc);
    EXPECT_EQ(it.solver, MalSolver::lanczos);
    EXPECT_TRUE(it.converged);
    EXPECT_LT(rel(it.value, exact.value), 1e-7) << "t=" << t << " n=" << n;
  }
}

TEST(MalIterative, Identity) {
  EXPECT_NEAR(mal_iterative(RealMatrix::identity(5)).value, 0.0, 1e-12);
  EXPECT_THROW(mal_iterative(RealMatrix::identity(3), {}, {0.0, 0}), InputError);
}

TEST(MalIterative, LargeComplexRunsMatrixFree) {
  SeededStream s(47, 0);
  auto x = random_complex(30, s);
  x /= std::sqrt(30.0);
  const auto r = mal_iterative(x, BasisFlavor::complex_hermitian, {1e-8, 0});
  EXPECT_EQ(r.minimizer.size(), 899u);
  EXPECT_TRUE(r.converged);
  EXPECT_GT(r.value, 0.0);
}

TEST(MalLocalOpt, MatchesExact) {
  SeededStream s(48, 0);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + t % 9;
    const auto x = random_real(n, s);
    const auto exact = mal_exact(x);
    const auto loc = mal_localopt(x, {}, 1000 + t);
    EXPECT_LT(rel(loc.value, exact.value), 1e-6) << "t=" << t << " n=" << n;
    const auto op = build_hessian(x, build_basis(n, loc.flavor));
    const auto hb = matvec(op.dense(), loc.minimizer);
    const double rho = dot(loc.minimizer, hb);
    double res = 0.0;
    for (std::size_t i = 0; i < hb.size(); ++i) {
      const double d = hb[i] - rho * loc.minimizer[i];
      res += d * d;
    }
    EXPECT_LE(std::sqrt(res), 1e-8);
  }
}

TEST(MalLocalOpt, IdentityFromAnyStart) {
  for (std::uint64_t seed : {0u, 1u, 99u}) {
    EXPECT_NEAR(mal_localopt(RealMatrix::identity(4), {}, seed).value, 0.0, 1e-12);
  }
}

TEST(MalLocalOpt, SeedFixesStart) {
  SeededStream s(49, 0);
  const auto x = random_complex(4, s);
  const auto a = mal_localopt(x, {}, 5);
  const auto b = mal_localopt(x, {}, 5);
  EXPECT_EQ(a.minimizer, b.minimizer);
  EXPECT_EQ(a.value, b.value);
}

TEST(MalLocalOpt, CapThrows) {
  SeededStream s(50, 0);
  const auto x = random_real(6, s);
  LocalOptOptions opts;
  opts.max_iterations = 1;
  opts.stationarity_tol = 1e-14;
  EXPECT_THROW(mal_localopt(x, {}, 0, opts), ConvergenceError);
}

TEST(Solvers, PairwiseTriangle) {
  SeededStream s(51, 0);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 3 + t % 10;
    const auto x = random_complex(n, s);
    const double d = compute_mal(x, MalSolver::dense, {}).value;
    const double l = compute_mal(x, MalSolver::lanczos, {}).value;
    const double o = compute_mal(x, MalSolver::local_opt, {}, 1e-10, 7).value;
    EXPECT_LT(rel(l, d), 1e-6);
    EXPECT_LT(rel(o, d), 1e-6);
    EXPECT_LT(rel(o, l), 1e-6);
  }
}

TEST(Solvers, FiniteDifferenceGradient) {
  SeededStream s(52, 0);
  const auto x = random_complex(5, s);
  const auto basis = build_basis(5, BasisFlavor::complex_hermitian);
  HessianOperator<cplx> op(x, basis);
  for (int t = 0; t < 20; ++t) {
    const auto b = random_coords(op.dim(), s);
    const auto hb = op.apply_matrix_free(b);
    const double h = 1e-6;
    for (std::size_t i = 0; i < op.dim(); i += 7) {
      auto bp = b, bm = b;
      bp[i] += h;
      bm[i] -= h;
      const double fd = (op.quadratic_form(bp) - op.quadratic_form(bm)) / (2 * h);
      EXPECT_NEAR(fd, hb[i], 1e-5 * std::max(1.0, std::abs(hb[i])));
    }
  }
}

TEST(Shift, MatrixAndScan) {
  const auto s3 = shift_matrix(3);
  int nonzero = 0;
  for (double v : s3.entries())
    if (v != 0.0) {
      ++nonzero;
      EXPECT_EQ(v, 1.0);
    }
  EXPECT_EQ(nonzero, 2);
  const std::vector<std::size_t> ns{2, 8};
  const auto rows = shift_scan(ns);
  EXPECT_NEAR(rows[0].mal, 1.0, 1e-14);
  EXPECT_NEAR(rows[1].mal_sqrt_n, rows[1].mal * std::sqrt(8.0), 1e-15);
}

TEST(Shift, DecaysLikeOneOverN) {
  // B = diag(b) gives ||[S, B]||^2 = sum (b_{i+1} - b_i)^2, the path Laplacian
  // form, whose smallest nonzero eigenvalue is 4 sin^2(pi / 2n). So mal(S_n) is
  // at most 2 sin(pi / 2n), and mal(S_n) sqrt(n) tends to zero.
  const std::vector<std::size_t> ns{4, 8, 16, 24};
  const auto rows = shift_scan(ns);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double n = static_cast<double>(rows[i].n);
    EXPECT_LE(rows[i].mal, 2.0 * std::sin(std::numbers::pi / (2.0 * n)) + 1e-12);
    EXPECT_GT(rows[i].mal * n, 2.0);
    if (i) EXPECT_LT(rows[i].mal_sqrt_n, rows[i - 1].mal_sqrt_n);
  }
}

}  // namespace
}  // namespace malnorm
