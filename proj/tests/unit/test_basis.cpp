#include <gtest/gtest.h>

#include <cmath>

#include "malnorm/basis.hpp"
#include "test_support.hpp"

namespace malnorm {
namespace {

using testing::random_complex;
using testing::random_hermitian;

std::vector<double> random_coords(std::size_t d, SeededStream& s) {
  std::vector<double> b(d);
  for (auto& v : b) v = s.next_normal_pair().first;
  return b;
}

TEST(Basis, Dimensions) {
  EXPECT_EQ(build_basis(10, BasisFlavor::real_symmetric).dim(), 54u);
  EXPECT_EQ(build_basis(10, BasisFlavor::complex_hermitian).dim(), 99u);
  for (std::size_t n = 2; n <= 50; ++n) {
    const auto real = build_basis(n, BasisFlavor::real_symmetric);
    const auto cx = build_basis(n, BasisFlavor::complex_hermitian);
    EXPECT_EQ(real.dim(), n * (n + 1) / 2 - 1);
    EXPECT_EQ(cx.dim(), n * n - 1);
    if (n <= 8) {
      EXPECT_EQ(real.elements<double>().size(), real.dim());
      EXPECT_EQ(cx.elements<cplx>().size(), cx.dim());
    }
  }
  EXPECT_THROW(build_basis(1, BasisFlavor::real_symmetric), InputError);
}

TEST(Basis, TwoByTwoRealElements) {
  const auto basis = build_basis(2, BasisFlavor::real_symmetric);
  const auto e = basis.elements<double>();
  ASSERT_EQ(e.size(), 2u);
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_EQ(e[0], (RealMatrix{{0.0, r}, {r, 0.0}}));
  EXPECT_EQ(e[1], (RealMatrix{{r, 0.0}, {0.0, -r}}));
}

TEST(Basis, OrderingOfComplexFlavor) {
  const auto basis = build_basis(3, BasisFlavor::complex_hermitian);
  using K = TracelessHermitianBasis::Kind;
  const K expected[] = {K::symmetric_pair, K::symmetric_pair, K::symmetric_pair,
                        K::antisymmetric_pair, K::antisymmetric_pair, K::antisymmetric_pair,
                        K::diagonal, K::diagonal};
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(basis.describe(i).kind, expected[i]);
  EXPECT_EQ(basis.describe(1).i, 0u);
  EXPECT_EQ(basis.describe(1).j, 2u);
  EXPECT_EQ(basis.describe(2).i, 1u);
  const auto e3 = basis.element<cplx>(3);
  EXPECT_NEAR(e3(0, 1).imag(), 1.0 / std::sqrt(2.0), 1e-16);
  EXPECT_NEAR(e3(1, 0).imag(), -1.0 / std::sqrt(2.0), 1e-16);
}

TEST(Basis, ElementsAreSelfAdjointTracelessOrthonormal) {
  for (std::size_t n : {2u, 3u, 7u, 20u}) {
    for (auto flavor : {BasisFlavor::real_symmetric, BasisFlavor::complex_hermitian}) {
      const auto e = build_basis(n, flavor).elements<cplx>();
      for (std::size_t i = 0; i < e.size(); ++i) {
        EXPECT_TRUE(is_self_adjoint(e[i], 1e-14));
        EXPECT_LT(std::abs(trace(e[i])), 1e-14);
        for (std::size_t j = i; j < e.size(); ++j) {
          const cplx g = hs_inner(e[i], e[j]);
          EXPECT_NEAR(std::abs(g - cplx(i == j ? 1.0 : 0.0)), 0.0, 1e-12) << i << "," << j;
        }
      }
    }
  }
}

TEST(Basis, RealFlavorRefusesComplexElementsAsRealMatrices) {
  const auto basis = build_basis(3, BasisFlavor::complex_hermitian);
  EXPECT_THROW(basis.element<double>(3), InputError);
  EXPECT_THROW(basis.phi<double>(std::vector<double>(8, 0.0)), InputError);
}

TEST(Phi, ZeroAndUnitVectors) {
  const auto basis = build_basis(4, BasisFlavor::complex_hermitian);
  const std::vector<double> zero(basis.dim(), 0.0);
  EXPECT_EQ(max_abs_entry(basis.phi<cplx>(zero)), 0.0);
  for (std::size_t k = 0; k < basis.dim(); ++k) {
    std::vector<double> e(basis.dim(), 0.0);
    e[k] = 1.0;
    EXPECT_LT(hs_distance(basis.phi<cplx>(e), basis.element<cplx>(k)), 1e-15);
  }
  EXPECT_THROW(basis.phi<cplx>(std::vector<double>(3)), DimensionError);
}

TEST(Phi, IsAnIsometry) {
  SeededStream s(30, 0);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + t % 11;
    const auto flavor = t % 2 ? BasisFlavor::real_symmetric : BasisFlavor::complex_hermitian;
    const auto basis = build_basis(n, flavor);
    const auto b = random_coords(basis.dim(), s);
    EXPECT_NEAR(hs_norm(basis.phi<cplx>(b)), norm2(b), 1e-12 * norm2(b));
    if (flavor == BasisFlavor::real_symmetric) {
      EXPECT_NEAR(hs_norm(basis.phi<double>(b)), norm2(b), 1e-12 * norm2(b));
    }
  }
}

TEST(PhiInv, RoundTrips) {
  SeededStream s(31, 0);
  for (std::size_t n : {2u, 5u, 9u}) {
    for (auto flavor : {BasisFlavor::real_symmetric, BasisFlavor::complex_hermitian}) {
      const auto basis = build_basis(n, flavor);
      const auto b = random_coords(basis.dim(), s);
      const auto back = basis.phi_inv(basis.phi<cplx>(b));
      for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(back[i], b[i], 1e-12);
    }
    const auto basis = build_basis(n, BasisFlavor::complex_hermitian);
    const ComplexMatrix m = traceless_part(random_hermitian(n, s));
    EXPECT_LT(hs_distance(basis.phi<cplx>(basis.phi_inv(m)), m), 1e-10);
    for (double v : basis.phi_inv(ComplexMatrix(n, n))) EXPECT_EQ(v, 0.0);
  }
}

TEST(PhiInv, Preconditions) {
  const auto real = build_basis(2, BasisFlavor::real_symmetric);
  ComplexMatrix anti(2, 2);
  anti(0, 1) = cplx(0.0, 1.0);
  anti(1, 0) = cplx(0.0, -1.0);
  EXPECT_THROW(real.phi_inv(anti), InputError);
  EXPECT_NO_THROW(build_basis(2, BasisFlavor::complex_hermitian).phi_inv(anti));
  EXPECT_THROW(real.phi_inv(RealMatrix::identity(2)), InputError);
  EXPECT_THROW(real.phi_inv(RealMatrix{{0.0, 1.0}, {0.0, 0.0}}), InputError);
  EXPECT_THROW(real.phi_inv(RealMatrix(3, 3)), DimensionError);
}

TEST(Projection, Examples) {
  EXPECT_EQ(max_abs_entry(project_traceless_hermitian(RealMatrix::identity(3),
                                                      BasisFlavor::real_symmetric)),
            0.0);
  SeededStream s(32, 0);
  const auto h = random_hermitian(5, s);
  EXPECT_LT(hs_distance(project_traceless_hermitian(h, BasisFlavor::complex_hermitian),
                        traceless_part(h)),
            1e-15);
}

TEST(Projection, IdempotentWithOrthogonalResidual) {
  SeededStream s(33, 0);
  for (auto flavor : {BasisFlavor::real_symmetric, BasisFlavor::complex_hermitian}) {
    for (std::size_t n : {2u, 4u, 8u}) {
      const auto m = random_complex(n, s);
      const auto p = project_traceless_hermitian(m, flavor);
      EXPECT_LT(hs_distance(project_traceless_hermitian(p, flavor), p), 1e-14);
      const ComplexMatrix residual = m - p;
      for (const auto& e : build_basis(n, flavor).elements<cplx>()) {
        EXPECT_NEAR(hs_inner(residual, e).real(), 0.0, 1e-10);
      }
    }
  }
}

TEST(Coordinates, MatchInnerProductsWithElements) {
  SeededStream s(34, 0);
  const auto basis = build_basis(6, BasisFlavor::complex_hermitian);
  const auto m = random_complex(6, s);
  const auto c = basis.coordinates(m);
  const auto e = basis.elements<cplx>();
  for (std::size_t k = 0; k < e.size(); ++k) EXPECT_NEAR(c[k], hs_inner(m, e[k]).real(), 1e-12);
}

}  // namespace
}  // namespace malnorm
