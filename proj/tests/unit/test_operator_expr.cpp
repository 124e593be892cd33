#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "relspin/errors.hpp"
#include "relspin/expr_library.hpp"
#include "relspin/operator_expr.hpp"

using namespace relspin;

namespace {

double rel_diff(const SpinorField& a, const SpinorField& b) {
  return norm(a - b) / std::max(norm(b), 1e-300);
}

SpinorField packet_1d(int n, double length, double width, double k0) {
  PacketSpec spec;
  spec.width = width;
  spec.momentum = Vector3d(k0, 0, 0);
  spec.polarization << 1.0, cdouble(0.3, 0.1), -0.2, cdouble(0, 0.5);
  return gaussian_packet(GridSpec::cube(1, n, length), spec);
}

Expr random_matrix_leaf(std::uint64_t seed, bool momentum) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Matrix4d a, b;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      a(i, j) = cdouble(nd(rng), nd(rng));
      b(i, j) = cdouble(nd(rng), nd(rng));
    }
  if (momentum)
    return momentum_diag([a, b](const Vector3d& k) -> Matrix4d { return a + std::sin(k.x()) * b; });
  return position_diag([a, b](const Vector3d& r, double t) -> Matrix4d {
    return a * std::cos(r.x() + t) + b * std::exp(-0.01 * r.squaredNorm());
  }, true);
}

}  // namespace

TEST(Apply, MomentumIdentityIsIdentity) {
  const auto f = packet_1d(64, 40, 3, 1.0);
  const auto g = apply(momentum_diag([](const Vector3d&) -> Matrix4d { return Matrix4d::Identity(); }), f);
  EXPECT_LE(rel_diff(g, f), 1e-14);
}

TEST(Apply, CanonicalCommutator) {
  // 8 points per sigma and a wide margin so the periodic image of x is negligible.
  const auto f = packet_1d(512, 256, 8, 0.7);
  const auto x = ops::position()[0];
  const auto k = ops::momentum()[0];
  const auto g = apply(commutator(x, k), f);
  EXPECT_LE(rel_diff(g, cdouble(0, 1) * f), 1e-8);
}

TEST(Apply, CanonicalCommutatorRefinement) {
  // Fixed resolution, growing box: the residual falls quickly to roundoff.
  const auto x = ops::position()[0];
  const auto k = ops::momentum()[0];
  std::vector<double> res;
  for (int n : {32, 64, 128}) {
    const double length = n * 0.5;
    PacketSpec spec;
    spec.width = 2.0;
    const auto grid = GridSpec::cube(1, n, length);
    spec.momentum = Vector3d(0.5, 0, 0);
    const auto f = gaussian_packet(grid, spec);
    res.push_back(rel_diff(apply(commutator(x, k), f), cdouble(0, 1) * f));
  }
  EXPECT_GE(res[0] / std::max(res[1], 1e-16), 10.0);
  EXPECT_LE(res[2], 1e-11);
}

TEST(Apply, LinearityAndComposition) {
  const auto grid = GridSpec::cube(3, 8, 6.0);
  const auto a = random_field(grid, 1), b = random_field(grid, 2);
  const Expr e = random_matrix_leaf(3, false) * random_matrix_leaf(4, true) +
                 commutator(random_matrix_leaf(5, true), random_matrix_leaf(6, false));
  const cdouble ca(0.3, -1.2), cb(2.0, 0.5);
  const auto lhs = apply(e, ca * a + cb * b, 0.4);
  const auto rhs = ca * apply(e, a, 0.4) + cb * apply(e, b, 0.4);
  EXPECT_LE(norm(lhs - rhs) / norm(rhs), 1e-12);

  const Expr e1 = random_matrix_leaf(7, true), e2 = random_matrix_leaf(8, false);
  const auto comp = apply(e1 * e2, a, 0.1);
  const auto seq = apply(e1, apply(e2, a, 0.1), 0.1);
  EXPECT_LE(norm(comp - seq), 1e-14 * norm(seq));
}

TEST(Apply, AdjointDefiningProperty) {
  const auto grid = GridSpec::cube(1, 32, 6.0);
  const Expr e = random_matrix_leaf(11, false) * random_matrix_leaf(12, true) * random_matrix_leaf(13, false) +
                 cdouble(0.2, 0.7) * commutator(random_matrix_leaf(14, true), random_matrix_leaf(15, false));
  const Expr ad = adjoint(e);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto phi = random_field(grid, 100 + s), psi = random_field(grid, 200 + s);
    const cdouble lhs = inner(apply(ad, phi, 0.3), psi);
    const cdouble rhs = inner(phi, apply(e, psi, 0.3));
    EXPECT_LE(std::abs(lhs - rhs), 1e-10);
  }
  EXPECT_EQ(adjoint(ad).ptr(), e.ptr());
}

TEST(Apply, CommutatorAntisymmetry) {
  const auto grid = GridSpec::cube(1, 32, 6.0);
  const Expr a = random_matrix_leaf(21, true), b = random_matrix_leaf(22, false);
  const auto f = random_field(grid, 5);
  const auto ab = apply(commutator(a, b), f);
  const auto ba = apply(commutator(b, a), f);
  EXPECT_LE(norm(ab + ba), 1e-13);
}

TEST(Apply, FusionKeepsLeafCount) {
  const Expr a = random_matrix_leaf(1, true), b = random_matrix_leaf(2, true);
  const Expr c = random_matrix_leaf(3, false), d = random_matrix_leaf(4, false);
  EXPECT_EQ((a * b).leaf_count(), 1u);
  EXPECT_EQ((a + b).leaf_count(), 1u);
  EXPECT_EQ((c * ops::beta() * d).leaf_count(), 1u);
  EXPECT_EQ((a * c).leaf_count(), 2u);
  EXPECT_EQ((a * c + b * d).leaf_count(), 4u);
  EXPECT_TRUE((Expr() * a).is_zero());
}

TEST(Apply, FusedMatchesUnfused) {
  const auto grid = GridSpec::cube(3, 8, 5.0);
  const auto f = random_field(grid, 77);
  const Expr a = random_matrix_leaf(1, true), b = random_matrix_leaf(2, true);
  const auto fused = apply(a * b, f);
  const auto seq = apply(a, apply(b, f));
  EXPECT_LE(norm(fused - seq), 1e-13 * norm(seq));
}

TEST(Apply, SingularGuard) {
  const auto grid = GridSpec::cube(1, 64, 40.0);
  PacketSpec spec;
  spec.width = 3.0;
  const auto f = gaussian_packet(grid, spec);  // k0 = 0
  const Expr inv = ops::inv_p2();
  EXPECT_TRUE(inv.singular_at_zero());
  EXPECT_THROW(apply(inv, f), SingularMomentumError);
  EXPECT_THROW(apply(ops::beta() * inv + ops::position()[0], f), SingularMomentumError);
  spec.momentum = Vector3d(2.5, 0, 0);
  EXPECT_NO_THROW(apply(inv, gaussian_packet(grid, spec)));
}

TEST(Apply, DetectsNonFinite) {
  const auto grid = GridSpec::cube(1, 16, 4.0);
  const Expr bad = position_scalar([](const Vector3d& r, double) { return r.x() == 0 ? NAN : 1.0; });
  EXPECT_THROW(apply(bad, random_field(grid, 1)), NumericalError);
}

TEST(Expectation, IdentityAndMomentum) {
  const auto grid = GridSpec::cube(3, 32, 40.0);
  PacketSpec spec;
  spec.width = 5.0;
  spec.momentum = Vector3d(0, 0, 1.1);
  const auto f = gaussian_packet(grid, spec);
  EXPECT_NEAR(expectation(ops::one(), f).real(), 1.0, 1e-12);
  const cdouble kz = expectation(ops::momentum()[2], f);
  EXPECT_NEAR(kz.real(), 1.1, 1e-6);
  EXPECT_LE(std::abs(kz.imag()), 1e-10);
  EXPECT_GE(inner(f, f).real(), 0.0);
}

TEST(Hermiticity, BuiltinsAreHermitian) {
  const auto grid = GridSpec::cube(1, 64, 40.0);
  std::vector<SpinorField> states;
  for (double k0 : {0.8, -1.1, 1.4}) states.push_back(packet_1d(64, 40, 3, k0));
  const Expr x = ops::position()[0], k = ops::momentum()[0];
  EXPECT_LE(hermiticity_residual(x * k + k * x, states), 1e-10);
  EXPECT_LE(hermiticity_residual(ops::beta() * x * x, states), 1e-10);
  EXPECT_GT(hermiticity_residual(x * k, states), 0.1);
  EXPECT_LE(hermiticity_residual(hermitian_part(x * k), states), 1e-10);
}

TEST(LeafCache, SmallGridTablesMatchDirectEvaluation) {
  const auto grid = GridSpec::cube(3, 8, 5.0);
  const auto f = random_field(grid, 3);
  const Expr e = random_matrix_leaf(31, true) *
                 position_scalar([](const Vector3d& r, double) { return std::cos(r.y()); });
  ApplyOptions nocache;
  nocache.cache_point_limit = 0;
  const auto a = apply(e, f, 0.0);
  const auto b = apply(e, f, 0.0, nocache);
  const auto c = apply(e, f, 0.0);
  EXPECT_LE(norm(a - b), 1e-14);
  EXPECT_EQ(norm(a - c), 0.0);
}
