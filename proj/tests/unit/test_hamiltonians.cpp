#include <gtest/gtest.h>

#include <cmath>

#include "relspin/errors.hpp"
#include "relspin/expr_library.hpp"
#include "relspin/hamiltonians.hpp"

using namespace relspin;

namespace {

SpinorField centered_packet(const GridSpec& g, const Vector3d& k0, double width,
                            EnergyProjection proj = EnergyProjection::None,
                            Spinor4d pol = Spinor4d::UnitX()) {
  PacketSpec spec;
  spec.width = width;
  spec.momentum = k0;
  spec.polarization = pol;
  spec.projection = proj;
  return gaussian_packet(g, spec);
}

double sum_residual(const NamedHamiltonian& h, const SpinorField& f, double t = 0.0) {
  SpinorField acc(f.grid(), Space::Position);
  for (const auto& [name, e] : h.terms) acc += apply(e, f, t);
  const auto tot = apply(h.total, f, t);
  return norm(tot - acc) / std::max(norm(tot), 1e-300);
}

const GridSpec& grid3() {
  static const GridSpec g = GridSpec::cube(3, 32, 16.0);
  return g;
}

}  // namespace

TEST(FreeDirac, ExpectationMatchesMomentumQuadrature) {
  const auto g = GridSpec::cube(1, 256, 120.0);
  PhysParamsd params;
  const auto f = centered_packet(g, Vector3d(0.9, 0, 0), 6.0, EnergyProjection::Positive);
  const auto h = build_free_dirac(params);
  const auto fk = transform(f, Space::Momentum);
  double mean_e = 0;
  for (std::size_t i = 0; i < g.points(); ++i)
    mean_e += fk.spinor(i).squaredNorm() * energy_ep(g.momentum(i), params) * g.cell_volume();
  EXPECT_NEAR(expectation(h.total, f).real(), mean_e, 1e-6);
}

TEST(FreeDirac, HermitianAndZeroModeIsMass) {
  const auto g = GridSpec::cube(1, 64, 40.0);
  PhysParamsd params;
  params.m0 = 1.3;
  const auto h = build_free_dirac(params);
  std::vector<SpinorField> states{random_field(g, 1), random_field(g, 2), random_field(g, 3)};
  EXPECT_LE(hermiticity_residual(h.total, states), 1e-10);
  // A field supported on k = 0 only.
  SpinorField f(g, Space::Momentum);
  f.spinor(g.zero_mode_index()) << 1.0, 0.5, cdouble(0, 1), 2.0;
  const auto out = apply(h.total, f);
  const Spinor4d expect = dirac_matrices().beta * params.rest_energy() * f.spinor(g.zero_mode_index());
  EXPECT_LE((transform(out, Space::Momentum).spinor(g.zero_mode_index()) - expect).norm(), 1e-12);
}

TEST(DiracEM, ZeroModelEqualsFree) {
  PhysParamsd params;
  const auto f = random_field(grid3(), 4);
  const auto a = apply(build_dirac_em(ZeroField{}, params).total, f);
  const auto b = apply(build_free_dirac(params).total, f);
  EXPECT_LE(norm(a - b) / norm(b), 1e-12);
}

TEST(DiracEM, GaugeTermPointValue) {
  PhysParamsd params;
  const UniformB model{Vector3d(0, 0, 1), Envelope::constant()};
  const auto h = build_dirac_em(model, params);
  const auto g = GridSpec::cube(3, 8, 8.0);
  // r = (1, 0, 0) sits at ix = 5, iy = iz = 4.
  const std::size_t idx = (5 * 8 + 4) * 8 + 4;
  ASSERT_LE((g.position(idx) - Vector3d(1, 0, 0)).norm(), 1e-15);
  SpinorField f(g, Space::Position);
  f.spinor(idx) << 1.0, 2.0, 3.0, 4.0;
  const auto out = apply(h.term("gauge-coupling"), f);
  const Matrix4d m = -params.e * params.c * 0.5 * dirac_matrices().alpha[1];
  EXPECT_LE((out.spinor(idx) - m * f.spinor(idx)).norm(), 1e-14);
}

TEST(DiracEM, HermitianUniformB) {
  PhysParamsd params;
  const UniformB model{Vector3d(0.1, 0.2, 0.3), Envelope::constant()};
  std::vector<SpinorField> states;
  for (int s = 0; s < 3; ++s)
    states.push_back(centered_packet(grid3(), Vector3d(0.5 * s, 0.4, 0.3), 2.0));
  const auto h = build_dirac_em(model, params);
  EXPECT_LE(hermiticity_residual(h.total, states), 1e-10);
  EXPECT_LE(sum_residual(h, random_field(grid3(), 9)), 1e-12);
}

TEST(FWFull, KineticOnlyExpectation) {
  PhysParamsd params;
  const auto g = GridSpec::cube(3, 32, 16.0);
  const auto f = centered_packet(g, Vector3d(0.3, 0.2, 0.5), 2.0);
  const auto h = build_fw_full(ZeroField{}, params, {"kinetic"});
  ASSERT_EQ(h.terms.size(), 1u);
  // beta = +1 on the upper-polarized packet.
  const auto p = ops::momentum();
  const cdouble p2 = expectation(dot(p, p), f);
  EXPECT_NEAR(expectation(h.total, f).real(), p2.real() / (2 * params.m0), 1e-8);
}

TEST(FWFull, ZeemanOnUpperState) {
  PhysParamsd params;
  const double b0 = 0.7;
  const UniformB model{Vector3d(0, 0, b0), Envelope::constant()};
  Spinor4d pol;
  pol << 0.6, 0.8, 0.0, 0.0;
  const auto f = centered_packet(grid3(), Vector3d::Zero(), 2.0, EnergyProjection::None, pol);
  const auto h = build_fw_full(model, params, {"zeeman"});
  const double sz = expectation(ops::sigma()[2], f).real();
  EXPECT_NEAR(expectation(h.total, f).real(), -(params.e / (2 * params.m0)) * b0 * sz, 1e-12);
}

TEST(FWFull, DefaultMaskAndSums) {
  PhysParamsd params;
  const UniformB model{Vector3d(0.1, -0.2, 0.3), Envelope::sinusoid(0.5, 0.1)};
  const auto h = build_fw_full(model, params);
  EXPECT_FALSE(h.has_term("rest-mass"));
  EXPECT_TRUE(h.has_term("darwin"));
  EXPECT_LE(sum_residual(h, random_field(GridSpec::cube(3, 8, 8.0), 3), 0.3), 1e-12);
  EXPECT_THROW(build_fw_full(model, params, {"bogus"}), PreconditionError);
}

TEST(FWFull, RelativisticTermsScaleWithC) {
  const UniformB model{Vector3d(0.2, 0.1, 0.4), Envelope::constant()};
  const auto f = centered_packet(grid3(), Vector3d(0.4, 0.3, 0.2), 2.0);
  std::vector<double> vals;
  for (double c : {1.0, 2.0, 4.0}) {
    PhysParamsd params;
    params.c = c;
    const auto h = build_fw_full(model, params, {"mass-correction", "kinetic-zeeman-cross", "B2-const"});
    vals.push_back(norm(apply(h.total, f)));
  }
  const double p1 = std::log2(vals[0] / vals[1]);
  const double p2 = std::log2(vals[1] / vals[2]);
  EXPECT_NEAR(p1, 2.0, 0.1);
  EXPECT_NEAR(p2, 2.0, 0.1);
}

TEST(FWDirect, StaticFieldHermitian) {
  PhysParamsd params;
  const UniformB model{Vector3d(0.1, 0.2, 0.3), Envelope::constant()};
  std::vector<SpinorField> states;
  for (int s = 0; s < 3; ++s) states.push_back(centered_packet(grid3(), Vector3d(0.2 * s, 0.4, 0.3), 2.0));
  const auto h = build_fw_direct(model, params);
  EXPECT_LE(hermiticity_residual(h.total, states), 1e-10);
}

TEST(FWDirect, SocTermWithTimeDependentField) {
  // The E x Pi product and the -i dB/dt piece combine into a Hermitian operator:
  // (E x Pi)^dagger - E x Pi = i curl E = -i dB/dt.
  PhysParamsd params;
  const UniformB model{Vector3d(0.2, -0.1, 0.5), Envelope::sinusoid(0.8, 0.3)};
  std::vector<SpinorField> states;
  for (int s = 0; s < 3; ++s) states.push_back(centered_packet(grid3(), Vector3d(0.3, 0.2 * s, 0.1), 2.0));
  const double t = 0.9;
  const auto h = build_fw_direct(model, params, false, {"soc"});

  // Each piece alone is not Hermitian; the anti-Hermitian parts cancel up to
  // the periodic-image error of the 4-sigma margin.
  const auto ef = ops::field(model, ops::FieldQuantity::E);
  const auto db = ops::field(model, ops::FieldQuantity::dBdt);
  const auto pi = ops::kinetic_momentum(model, params);
  const double pref = -params.e / (8 * params.m0 * params.m0 * params.c * params.c);
  const Expr cross_part = pref * dot(ops::sigma(), 2.0 * cross(ef, pi));
  const Expr dbdt_part = pref * dot(ops::sigma(), cdouble(0, -1) * db);
  const double a1 = hermiticity_residual(cross_part, states, t);
  const double a2 = hermiticity_residual(dbdt_part, states, t);
  EXPECT_GT(a1, 1e-2);
  EXPECT_NEAR(a1, a2, 1e-6 * a1);
  EXPECT_LE(hermiticity_residual(h.total, states, t), 1e-6 * a1);

  const auto hh = build_fw_direct(model, params, true, {"soc"});
  EXPECT_LE(hermiticity_residual(hh.total - h.total, states, t), 1e-6 * a1);
}

TEST(FWDirect, ZeroModelIsKineticOnly) {
  PhysParamsd params;
  const auto h = build_fw_direct(ZeroField{}, params);
  const auto f = random_field(GridSpec::cube(3, 8, 8.0), 12);
  const auto p = ops::momentum();
  const Expr expect = (1.0 / (2 * params.m0)) * (ops::beta() * dot(p, p));
  EXPECT_LE(norm(apply(h.total, f) - apply(expect, f)), 1e-12);
  for (const auto& name : {"zeeman", "soc", "nutation"}) EXPECT_TRUE(h.term(name).is_zero()) << name;
}

TEST(FWDirect, GaugeKineticIdentity) {
  PhysParamsd params;
  const UniformB model{Vector3d(0.1, 0.3, -0.2), Envelope::constant()};
  const auto f = centered_packet(grid3(), Vector3d(0.3, 0.2, 0.4), 2.0);
  const auto pi = ops::kinetic_momentum(model, params);
  const auto p = ops::momentum();
  const auto a = ops::field(model, ops::FieldQuantity::A);
  const double e = params.e;
  const Expr expanded = dot(p, p) - e * (dot(p, a) + dot(a, p)) + (e * e) * dot(a, a);
  EXPECT_LE(norm(apply(dot(pi, pi), f) - apply(expanded, f)), 1e-10);
  EXPECT_LE(norm(apply(dot(p, a), f) - apply(dot(a, p), f)), 1e-10);
}

TEST(HamiltonianId, Strings) {
  for (auto id : {HamiltonianId::Free, HamiltonianId::DiracEM, HamiltonianId::FWFull, HamiltonianId::FWDirect})
    EXPECT_EQ(hamiltonian_id_from_string(to_string(id)), id);
  EXPECT_THROW(hamiltonian_id_from_string("pauli"), PreconditionError);
}
