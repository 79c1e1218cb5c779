#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "malnorm/core/general_eig.hpp"
#include "malnorm/core/matrix.hpp"
#include "malnorm/core/matrix_io.hpp"
#include "malnorm/core/polar.hpp"
#include "malnorm/core/symmetric_eig.hpp"
#include "test_support.hpp"

namespace malnorm {
namespace {

using testing::random_complex;
using testing::random_hermitian;
using testing::random_real;
using testing::random_unitary;

TEST(HsInner, IdentityGivesDimension) {
  for (std::size_t n : {1u, 3u, 7u}) {
    const auto i = ComplexMatrix::identity(n);
    EXPECT_NEAR(hs_inner(i, i).real(), static_cast<double>(n), 1e-15);
    EXPECT_EQ(hs_inner(i, i).imag(), 0.0);
  }
}

TEST(HsInner, IsConjugateLinearInSecondArgument) {
  SeededStream s(1, 0);
  const auto a = random_complex(4, s);
  const auto b = random_complex(4, s);
  const cplx z(0.3, -1.7);
  const cplx lhs = hs_inner(a, z * b);
  const cplx rhs = std::conj(z) * hs_inner(a, b);
  EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-12);
}

TEST(HsInner, ShapeMismatchThrows) {
  EXPECT_THROW(hs_inner(RealMatrix(2, 2), RealMatrix(3, 3)), DimensionError);
  EXPECT_THROW(hs_inner(RealMatrix(2, 3), RealMatrix(2, 3)), DimensionError);
}

TEST(HsNorm, AdjointInvariant) {
  SeededStream s(2, 0);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_complex(1 + t % 9, s);
    EXPECT_NEAR(hs_norm(a), hs_norm(adjoint(a)), 1e-12);
  }
}

TEST(HsNorm, UnitaryInvariance) {
  SeededStream s(3, 0);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + t % 8;
    const auto a = random_complex(n, s);
    const auto u = random_unitary(n, s);
    const auto v = random_unitary(n, s);
    EXPECT_NEAR(hs_norm(u * a * v), hs_norm(a), 1e-10 * hs_norm(a));
  }
}

TEST(HsNorm, SubmultiplicativeAgainstOperatorNorm) {
  SeededStream s(4, 0);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + t % 7;
    const auto a = random_complex(n, s);
    const auto b = random_complex(n, s);
    EXPECT_LE(hs_norm(a * b), operator_norm(a) * hs_norm(b) + 1e-9);
  }
}

TEST(Commutator, IdentityCommutes) {
  SeededStream s(5, 0);
  const auto x = random_complex(5, s);
  EXPECT_EQ(max_abs_entry(commutator(x, ComplexMatrix::identity(5))), 0.0);
}

TEST(Commutator, Antisymmetric) {
  SeededStream s(6, 0);
  const auto x = random_complex(4, s);
  const auto b = random_complex(4, s);
  EXPECT_LT(hs_norm(commutator(x, b) + commutator(b, x)), 1e-13);
}

TEST(Commutator, DimensionMismatchThrows) {
  EXPECT_THROW(commutator(RealMatrix(2, 2), RealMatrix(3, 3)), DimensionError);
}

TEST(Commutator, SplitsOverHermitianRealAndImaginaryParts) {
  // ||[X,B]||^2 = ||[Re X, B]||^2 + ||[Im X, B]||^2 for Hermitian B.
  SeededStream s(7, 0);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + t % 9;
    const auto x = random_complex(n, s);
    const auto b = random_hermitian(n, s);
    const double lhs = hs_norm_squared(commutator(x, b));
    const double rhs = hs_norm_squared(commutator(hermitian_real_part(x), b)) +
                       hs_norm_squared(commutator(hermitian_imag_part(x), b));
    EXPECT_NEAR(lhs, rhs, 1e-9 * std::max(1.0, lhs));
  }
}

TEST(TracelessPart, Examples) {
  EXPECT_EQ(max_abs_entry(traceless_part(RealMatrix::identity(4))), 0.0);
  const RealMatrix d{{2.0, 0.0}, {0.0, 0.0}};
  const RealMatrix expected{{1.0, 0.0}, {0.0, -1.0}};
  EXPECT_EQ(traceless_part(d), expected);
}

TEST(TracelessPart, IsTheClosestTracelessShift) {
  SeededStream s(8, 0);
  const auto b = random_hermitian(5, s);
  const double best = hs_norm(traceless_part(b));
  EXPECT_LT(std::abs(trace(traceless_part(b))), 1e-12);
  // Scan c over a grid around tau(B); the minimum of ||B - cI|| is at tau(B).
  const double tau = normalized_trace(b).real();
  double scanned = std::numeric_limits<double>::infinity();
  for (int k = -200; k <= 200; ++k) {
    const double c = tau + 0.01 * k;
    ComplexMatrix m = b;
    for (std::size_t i = 0; i < 5; ++i) m(i, i) -= c;
    scanned = std::min(scanned, hs_norm(m));
    EXPECT_GE(hs_norm(m), best - 1e-12);
  }
  EXPECT_NEAR(scanned, best, 1e-12);
}

TEST(OperatorNorm, Examples) {
  const RealMatrix d{{3.0, 0.0}, {0.0, 1.0}};
  EXPECT_NEAR(operator_norm(d), 3.0, 1e-9);
  EXPECT_EQ(operator_norm(RealMatrix(3, 3)), 0.0);
  SeededStream s(9, 0);
  const auto u = random_unitary(12, s);
  EXPECT_NEAR(operator_norm(u), 1.0, 1e-9);
}

TEST(OperatorNorm, StartVectorInKernelIsPerturbed) {
  // All-ones start is annihilated by this matrix.
  const RealMatrix k{{1.0, -1.0}, {1.0, -1.0}};
  EXPECT_NEAR(operator_norm(k), 2.0, 1e-8);
}

TEST(OperatorNorm, RejectsNonPositiveTolerance) {
  EXPECT_THROW(operator_norm(RealMatrix::identity(2), {0.0, 10}), InputError);
}

TEST(OperatorNorm, CapReachedThrowsConvergenceError) {
  SeededStream s(10, 0);
  const auto a = random_real(6, s);
  try {
    operator_norm(a, {1e-15, 2});
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.estimate(), 0.0);
  }
}

TEST(Polar, UnitaryInputIsFixed) {
  SeededStream s(11, 0);
  const auto u = random_unitary(6, s);
  EXPECT_LT(hs_distance(polar_unitary(u), u), 1e-10);
}

TEST(Polar, ScalarMultipleOfIdentity) {
  const RealMatrix y = 2.0 * RealMatrix::identity(4);
  EXPECT_LT(hs_distance(polar_unitary(y), RealMatrix::identity(4)), 1e-12);
}

TEST(Polar, RemainingFactorIsPositiveSemidefinite) {
  SeededStream s(12, 0);
  for (int t = 0; t < 10; ++t) {
    const auto y = random_real(8, s);
    const auto u = polar_unitary(y);
    EXPECT_LT(unitarity_defect(u), 1e-10);
    const RealMatrix p = adjoint(u) * y;
    EXPECT_TRUE(is_self_adjoint(p, 1e-8));
    const auto eig = symmetric_eig(hermitian_real_part(p), false);
    EXPECT_GE(eig.values.front(), -1e-8);
  }
}

TEST(Polar, ComplexInput) {
  SeededStream s(13, 0);
  const auto y = random_complex(7, s);
  const auto u = polar_unitary(y);
  EXPECT_LT(unitarity_defect(u), 1e-10);
  EXPECT_TRUE(is_self_adjoint(adjoint(u) * y, 1e-8));
}

TEST(Polar, RankDeficientThrows) {
  RealMatrix y{{1.0, 2.0}, {2.0, 4.0}};
  EXPECT_THROW(polar_unitary(y), SingularityError);
  EXPECT_THROW(polar_unitary(RealMatrix(3, 3)), SingularityError);
}

TEST(Lu, DeterminantAndInverse) {
  const RealMatrix a{{4.0, 3.0}, {6.0, 3.0}};
  EXPECT_NEAR(determinant(a), -6.0, 1e-12);
  const RealMatrix inv = inverse(a);
  EXPECT_LT(hs_distance(a * inv, RealMatrix::identity(2)), 1e-14);
}

TEST(MatrixText, ParsesBothFlavors) {
  const auto real = read_matrix_string("2 2 real\n1 2.5\n-3 4e-3\n");
  ASSERT_TRUE(std::holds_alternative<RealMatrix>(real));
  EXPECT_EQ(std::get<RealMatrix>(real), (RealMatrix{{1.0, 2.5}, {-3.0, 4e-3}}));

  const auto cx = read_matrix_string("2 2 complex\n1+2i -0.5-1e-3i\n3i -4\n");
  ASSERT_TRUE(std::holds_alternative<ComplexMatrix>(cx));
  const auto& m = std::get<ComplexMatrix>(cx);
  EXPECT_EQ(m(0, 0), cplx(1.0, 2.0));
  EXPECT_EQ(m(0, 1), cplx(-0.5, -1e-3));
  EXPECT_EQ(m(1, 0), cplx(0.0, 3.0));
  EXPECT_EQ(m(1, 1), cplx(-4.0, 0.0));
}

TEST(MatrixText, ExponentSignsAreNotSplitPoints) {
  const auto cx = read_matrix_string("1 1 complex\n1e-05+2.5E+3i\n");
  EXPECT_EQ(std::get<ComplexMatrix>(cx)(0, 0), cplx(1e-05, 2.5e3));
}

TEST(MatrixText, RoundTripIsBitExact) {
  SeededStream s(14, 0);
  const auto a = random_complex(5, s);
  const auto back = read_matrix_string(matrix_to_string(a));
  EXPECT_EQ(std::get<ComplexMatrix>(back), a);
  const auto r = random_real(3, 4, s);
  EXPECT_EQ(std::get<RealMatrix>(read_matrix_string(matrix_to_string(r))), r);
}

TEST(MatrixText, DecimalStringsSurviveRoundTrip) {
  const std::string text = "2 2 real\n0.1 -2.2250738585072014e-308\n123456789.12345678 1e+300\n";
  const auto m = read_matrix_string(text);
  const auto again = read_matrix_string(matrix_to_string(m));
  EXPECT_EQ(std::get<RealMatrix>(again), std::get<RealMatrix>(m));
  EXPECT_EQ(matrix_to_string(m).substr(0, 13), "2 2 real\n0.1 ");
}

TEST(MatrixText, Errors) {
  EXPECT_THROW(read_matrix_string("2 2 quaternion\n"), InputError);
  EXPECT_THROW(read_matrix_string("2 2 real\n1 2 3\n"), InputError);
  EXPECT_THROW(read_matrix_string("1 1 real\nabc\n"), InputError);
  EXPECT_THROW(read_matrix_string(""), InputError);
}

}  // namespace
}  // namespace malnorm
