#include <gtest/gtest.h>

#include <random>

#include "relspin/dirac_algebra.hpp"
#include "relspin/errors.hpp"

using namespace relspin;

namespace {

Matrix4d random_hermitian(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix4d a;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a(i, j) = cdouble(n(rng), n(rng));
  return 0.5 * (a + a.adjoint());
}

double max_abs(const Matrix4d& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(DiracMatrices, AlphaSquaredIsIdentity) {
  const auto& d = dirac_matrices();
  EXPECT_EQ(max_abs(d.alpha[0] * d.alpha[0] - d.identity), 0.0);
}

TEST(DiracMatrices, AlphaAnticommutesWithBeta) {
  const auto& d = dirac_matrices();
  EXPECT_EQ(max_abs(d.alpha[0] * d.beta + d.beta * d.alpha[0]), 0.0);
}

TEST(DiracMatrices, SigmaFromAlphaProduct) {
  const auto& d = dirac_matrices();
  const Matrix4d s = cdouble(0, -1) * d.alpha[0] * d.alpha[1];
  EXPECT_EQ(max_abs(s - d.sigma[2]), 0.0);
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    EXPECT_EQ(max_abs(cdouble(0, -1) * d.alpha[j] * d.alpha[k] - d.sigma[i]), 0.0);
  }
}

TEST(DiracMatrices, CliffordRelationsAndHermiticity) {
  const auto& d = dirac_matrices();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Matrix4d expect = (i == j ? 2.0 : 0.0) * d.identity;
      EXPECT_LE(max_abs(anticommutator(d.alpha[i], d.alpha[j]) - expect), 1e-15);
    }
    EXPECT_LE(max_abs(anticommutator(d.alpha[i], d.beta)), 1e-15);
    EXPECT_TRUE(is_hermitian(d.alpha[i]));
    EXPECT_TRUE(is_unitary(d.alpha[i]));
    EXPECT_TRUE(is_hermitian(d.sigma[i]));
    EXPECT_TRUE(is_unitary(d.sigma[i]));
  }
  EXPECT_LE(max_abs(d.beta * d.beta - d.identity), 1e-15);
  EXPECT_TRUE(is_hermitian(d.beta));
}

TEST(DiracMatrices, SigmaIsBlockPauli) {
  const auto& d = dirac_matrices();
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(max_abs(block_off_diagonal_part(d.sigma[i])), 0.0);
    EXPECT_EQ(max_abs(block_diagonal_part(d.alpha[i])), 0.0);
  }
}

TEST(Commutators, SigmaAlgebra) {
  const auto& d = dirac_matrices();
  EXPECT_LE(max_abs(commutator(d.sigma[0], d.sigma[1]) - cdouble(0, 2) * d.sigma[2]), 1e-15);
  EXPECT_LE(max_abs(anticommutator(d.sigma[0], d.sigma[0]) - 2.0 * d.identity), 1e-15);
}

TEST(Commutators, IdentityCommutes) {
  std::mt19937_64 rng(7);
  const Matrix4d m = random_hermitian(rng) + cdouble(0, 1) * random_hermitian(rng);
  EXPECT_EQ(max_abs(commutator(Matrix4d::Identity(), m)), 0.0);
}

TEST(HermEigs, DiagonalAndDiracMatrices) {
  const auto& d = dirac_matrices();
  auto eb = herm_eigs(d.beta);
  EXPECT_NEAR(eb.values(0), -1, 1e-15);
  EXPECT_NEAR(eb.values(1), -1, 1e-15);
  EXPECT_NEAR(eb.values(2), 1, 1e-15);
  EXPECT_NEAR(eb.values(3), 1, 1e-15);

  auto es = herm_eigs(Matrix4d(0.5 * d.sigma[2]));
  EXPECT_NEAR(es.values(0), -0.5, 1e-15);
  EXPECT_NEAR(es.values(3), 0.5, 1e-15);

  auto ea = herm_eigs(d.alpha[0]);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(ea.values(k), k < 2 ? -1.0 : 1.0, 1e-14);
  EXPECT_TRUE(is_unitary(ea.vectors, 1e-12));
}

TEST(HermEigs, RejectsNonHermitian) {
  Matrix4d m = Matrix4d::Zero();
  m(0, 1) = 1.0;
  EXPECT_THROW(herm_eigs(m), PreconditionError);
}

TEST(HermEigs, RandomReconstruction) {
  std::mt19937_64 rng(2024);
  double worst_rec = 0, worst_pair = 0, worst_unit = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Matrix4d a = random_hermitian(rng, trial % 3 == 0 ? 10.0 : 1.0);
    const auto e = herm_eigs(a);
    const double scale = a.norm();
    for (int k = 0; k + 1 < 4; ++k) ASSERT_LE(e.values(k), e.values(k + 1));
    Matrix4d dlam = Matrix4d::Zero();
    for (int k = 0; k < 4; ++k) {
      dlam(k, k) = e.values(k);
      worst_pair = std::max(
          worst_pair, (a * e.vectors.col(k) - e.values(k) * e.vectors.col(k)).norm() / scale);
    }
    worst_rec = std::max(worst_rec, (e.vectors * dlam * e.vectors.adjoint() - a).norm() / scale);
    worst_unit = std::max(
        worst_unit, (e.vectors.adjoint() * e.vectors - Matrix4d::Identity()).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst_rec, 1e-12);
  EXPECT_LE(worst_pair, 1e-12);
  EXPECT_LE(worst_unit, 1e-12);
}

TEST(HermEigs, PhaseConvention) {
  std::mt19937_64 rng(5);
  const auto e = herm_eigs(random_hermitian(rng));
  for (int k = 0; k < 4; ++k) {
    int first = 0;
    while (std::abs(e.vectors(first, k)) <= 1e-8) ++first;
    EXPECT_NEAR(e.vectors(first, k).imag(), 0.0, 1e-14);
    EXPECT_GT(e.vectors(first, k).real(), 0.0);
  }
}

TEST(ExpMinusIHt, ZeroTimeIsIdentity) {
  std::mt19937_64 rng(1);
  EXPECT_LE(max_abs(exp_minus_iHt(random_hermitian(rng), 0.0) - Matrix4d::Identity()), 1e-14);
}

TEST(ExpMinusIHt, DiagonalMass) {
  const auto& d = dirac_matrices();
  const double t = 0.73, mc2 = 2.5;
  const Matrix4d u = exp_minus_iHt(Matrix4d(d.beta * mc2), t);
  const cdouble lo = std::polar(1.0, -mc2 * t), hi = std::polar(1.0, mc2 * t);
  EXPECT_LE(std::abs(u(0, 0) - lo), 1e-14);
  EXPECT_LE(std::abs(u(1, 1) - lo), 1e-14);
  EXPECT_LE(std::abs(u(2, 2) - hi), 1e-14);
  EXPECT_LE(std::abs(u(3, 3) - hi), 1e-14);
}

TEST(ExpMinusIHt, GroupPropertyAndNormPreservation) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix4d h = random_hermitian(rng, 3.0);
    const double t = n(rng);
    const Matrix4d u = exp_minus_iHt(h, t);
    EXPECT_TRUE(is_unitary(u, 1e-12));
    EXPECT_LE(max_abs(u * exp_minus_iHt(h, -t) - Matrix4d::Identity()), 1e-12);
    Spinor4d v;
    for (int k = 0; k < 4; ++k) v(k) = cdouble(n(rng), n(rng));
    EXPECT_NEAR((u * v).norm(), v.norm(), 1e-12 * v.norm());
  }
}
