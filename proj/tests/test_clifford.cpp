#include <gtest/gtest.h>

#include <random>

#include "gaugelab/clifford.hpp"

using namespace gaugelab;

namespace {

Vec random_spinor(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = cd(g(rng), g(rng));
  return v;
}

Vec random_majorana(const GammaSet& gs, std::mt19937_64& rng) {
  const Vec v = random_spinor(gs.spinor_dim(), rng);
  return 0.5 * (v + majorana_conjugate(v, gs));
}

}  // namespace

TEST(Clifford, TwoDimensionalRelations) {
  const GammaSet g = build_gamma(2);
  ASSERT_EQ(g.spinor_dim(), 2);
  const Mat id = Mat::Identity(2, 2);
  EXPECT_LE(max_abs(g[0] * g[1] + g[1] * g[0]), 1e-12);
  EXPECT_LE(max_abs(g[0] * g[0] + id), 1e-12);
  EXPECT_LE(max_abs(g[1] * g[1] - id), 1e-12);
}

TEST(Clifford, FourDimensionalAnticommutatorsBruteForce) {
  const GammaSet g = build_gamma(4);
  ASSERT_EQ(g.spinor_dim(), 4);
  const double eta_diag[4] = {-1.0, 1.0, 1.0, 1.0};
  int checked = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b, ++checked) {
      const Mat lhs = g[a] * g[b] + g[b] * g[a];
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          const cd expect = (a == b && i == j) ? 2.0 * eta_diag[a] : 0.0;
          EXPECT_LE(std::abs(lhs(i, j) - expect), 1e-12);
        }
    }
  EXPECT_EQ(checked, 16);
}

TEST(Clifford, ThreeDimensionalChargeConjugationAntisymmetric) {
  const GammaSet g = build_gamma(3);
  EXPECT_EQ(g.spinor_dim(), 2);
  EXPECT_LE(max_abs(g.conj_C.transpose() + g.conj_C), 1e-12);
  EXPECT_GT(max_abs(g.conj_C), 0.5);
}

TEST(Clifford, ConventionIdentitiesInEverySupportedDimension) {
  for (int D : {2, 3, 4, 10, 11, 12}) {
    const GammaSet g = build_gamma(D);
    const int n = g.spinor_dim();
    EXPECT_EQ(n, 1 << (D / 2));
    const Mat id = Mat::Identity(n, n);
    for (int a = 0; a < D; ++a) {
      EXPECT_LE(max_abs(g[a].adjoint() - (a == 0 ? -1.0 : 1.0) * g[a]), 1e-12);
      EXPECT_LE(max_abs(g[a].transpose() + g.conj_C * g[a] * g.conj_C.adjoint()), 1e-10);
    }
    EXPECT_LE(max_abs(g.conj_C.adjoint() * g.conj_C - id), 1e-10);
    EXPECT_LE(max_abs(g.beta - I_unit * g[0]), 1e-12);
    EXPECT_LE(max_abs(g.beta.adjoint() - g.beta), 1e-12);
    EXPECT_TRUE(gamma_audit(g).passed()) << "D=" << D;
  }
}

TEST(Clifford, UnsupportedDimensionsRejected) {
  for (int D : {1, 5, 6, 7, 8, 9, 13}) EXPECT_THROW(build_gamma(D), DimensionNotSupported) << D;
}

TEST(Clifford, ConjugationOfZeroIsZero) {
  const GammaSet g = build_gamma(4);
  EXPECT_EQ(majorana_conjugate(Vec::Zero(4), g).norm(), 0.0);
}

TEST(Clifford, ConjugationIsAnInvolution) {
  std::mt19937_64 rng(1);
  for (int D : {2, 3, 4}) {
    const GammaSet g = build_gamma(D);
    for (int t = 0; t < 20; ++t) {
      const Vec chi = random_spinor(g.spinor_dim(), rng);
      EXPECT_LE((majorana_conjugate(majorana_conjugate(chi, g), g) - chi).norm(), 1e-12 * chi.norm());
    }
  }
}

TEST(Clifford, ProjectedSpinorIsFixedPoint) {
  std::mt19937_64 rng(2);
  const GammaSet g = build_gamma(4);
  const Vec chi = random_majorana(g, rng);
  EXPECT_LE((majorana_conjugate(chi, g) - chi).norm(), 1e-12 * chi.norm());
}

TEST(Clifford, ShapeMismatchRejected) {
  const GammaSet g = build_gamma(4);
  EXPECT_THROW(majorana_conjugate(Vec::Zero(3), g), ShapeMismatch);
}

TEST(Clifford, MajoranaBasisHasFullRealRank) {
  for (int D : {2, 4}) {
    const GammaSet g = build_gamma(D);
    const auto basis = majorana_basis(g);
    const int n = g.spinor_dim();
    ASSERT_EQ(static_cast<int>(basis.size()), n);
    RMat stacked(2 * n, n);
    for (int j = 0; j < n; ++j) {
      stacked.col(j) << basis[j].real(), basis[j].imag();
      EXPECT_LE((majorana_conjugate(basis[j], g) - basis[j]).norm(), 1e-12);
    }
    Eigen::FullPivLU<RMat> lu(stacked);
    lu.setThreshold(1e-10);
    EXPECT_EQ(lu.rank(), n) << "D=" << D;
  }
}

TEST(Clifford, PairingVanishesOnDiagonalAndIsAntisymmetric) {
  std::mt19937_64 rng(3);
  for (int D : {2, 3, 4}) {
    const GammaSet g = build_gamma(D);
    for (int t = 0; t < 10; ++t) {
      const Vec chi = random_majorana(g, rng), lam = random_majorana(g, rng);
      EXPECT_LE(std::abs(majorana_pairing(chi, chi, g)), 1e-12 * chi.squaredNorm());
      EXPECT_LE(std::abs(majorana_pairing(chi, lam, g) + majorana_pairing(lam, chi, g)), 1e-12 * chi.norm() * lam.norm());
    }
  }
}

TEST(Clifford, PairingMatchesNaiveLoopAndIsReal) {
  const GammaSet g = build_gamma(4);
  const auto basis = majorana_basis(g);
  const int n = g.spinor_dim();
  RMat pair(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      cd naive = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) naive += basis[a](i) * g.conj_C(i, j) * basis[b](j);
      naive *= I_unit;
      EXPECT_LE(std::abs(naive.imag()), 1e-12);
      EXPECT_LE(std::abs(majorana_pairing(basis[a], basis[b], g) - naive.real()), 1e-12);
      pair(a, b) = naive.real();
    }
  EXPECT_GT(Eigen::JacobiSVD<RMat>(pair).singularValues()(n - 1), 1e-10);
}

TEST(Clifford, NonMajoranaInputRejected) {
  const GammaSet g = build_gamma(4);
  Vec chi = Vec::Zero(4);
  chi(0) = 1.0;
  chi(1) = I_unit;
  ASSERT_GT((majorana_conjugate(chi, g) - chi).norm(), 1e-6);
  EXPECT_THROW(majorana_pairing(chi, majorana_basis(g)[0], g), NonMajoranaInput);
}
