#include <gtest/gtest.h>

#include "relspin/errors.hpp"
#include "relspin/field_models.hpp"

using namespace relspin;

TEST(FieldSample, ZeroModel) {
  const auto s = sample(ZeroField{}, Vector3d(1, 2, 3), 4.0);
  EXPECT_EQ(s.A.norm() + s.E.norm() + s.B.norm() + s.dBdt.norm() + s.d2Bdt2.norm(), 0.0);
  EXPECT_EQ(s.phi, 0.0);
}

TEST(FieldSample, UniformBConstant) {
  UniformB m{Vector3d(0, 0, 1), Envelope::constant()};
  const auto s = sample(m, Vector3d(1, 0, 0), 0.0);
  EXPECT_EQ((s.A - Vector3d(0, 0.5, 0)).norm(), 0.0);
  EXPECT_EQ((s.B - Vector3d(0, 0, 1)).norm(), 0.0);
  EXPECT_EQ(s.E.norm(), 0.0);
  EXPECT_EQ(s.dBdt.norm(), 0.0);
}

TEST(FieldSample, UniformBQuadraticEnvelope) {
  UniformB m{Vector3d(0, 0, 1), Envelope::polynomial(0, 0, 0.5)};
  const auto s = sample(m, Vector3d(1, 0, 0), 0.0);
  EXPECT_EQ(s.B.norm(), 0.0);
  EXPECT_EQ(s.dBdt.norm(), 0.0);
  EXPECT_EQ((s.d2Bdt2 - Vector3d(0, 0, 1)).norm(), 0.0);
  EXPECT_EQ(s.E.norm(), 0.0);
}

TEST(FieldSample, InducedElectricField) {
  const Vector3d b0(0.3, -0.2, 0.7), r(0.5, 1.5, -2.0);
  UniformB m{b0, Envelope::sinusoid(1.3, 0.2)};
  for (double t : {0.0, 0.4, 2.0}) {
    const auto s = sample(m, r, t);
    EXPECT_LE((s.E + 0.5 * b0.cross(r) * m.envelope.d1(t)).norm(), 1e-15);
  }
}

TEST(Envelope, DerivativesMatchFiniteDifferences) {
  for (const Envelope& g : {Envelope::polynomial(1, -2, 3), Envelope::gaussian(0.5, 1.3),
                            Envelope::sinusoid(2.0, 0.3)}) {
    const double h = 1e-5;
    for (double t : {-0.7, 0.1, 1.9}) {
      EXPECT_NEAR(g.d1(t), (g.value(t + h) - g.value(t - h)) / (2 * h), 1e-8);
      EXPECT_NEAR(g.d2(t), (g.d1(t + h) - g.d1(t - h)) / (2 * h), 1e-8);
    }
  }
}

TEST(MaxwellProbe, UniformBStencilExact) {
  UniformB m{Vector3d(0.2, 0.5, 1.0), Envelope::constant()};
  const auto r = maxwell_probe(m, Vector3d(1.2, -0.3, 0.8), 0.0, 1e-3);
  EXPECT_LE(r.curl, 1e-8);
  EXPECT_LE(r.divergence, 1e-10);
  EXPECT_LE(r.efield, 1e-10);
}

TEST(MaxwellProbe, UniformBTimeDependent) {
  UniformB m{Vector3d(0.2, 0.5, 1.0), Envelope::gaussian(1.0, 0.7)};
  const auto r = maxwell_probe(m, Vector3d(1.2, -0.3, 0.8), 0.4, 1e-4);
  EXPECT_LE(r.curl, 1e-8);
  EXPECT_LE(r.efield, 1e-7);
  EXPECT_LE(r.dbdt, 1e-7);
}

TEST(MaxwellProbe, PlaneWaveSecondOrder) {
  PlaneWavePulse m{Vector3d(0.3, 0, 0), Vector3d(0, 0, 1.1), 1.1, 2.0, 1.5};
  const Vector3d r(0.3, 0.1, 0.7);
  const auto r1 = maxwell_probe(m, r, 1.7, 1e-2);
  const auto r2 = maxwell_probe(m, r, 1.7, 5e-3);
  EXPECT_GT(r1.curl, 0.0);
  EXPECT_NEAR(r1.curl / r2.curl, 4.0, 0.05);
  EXPECT_NEAR(r1.efield / r2.efield, 4.0, 0.05);
}

TEST(MaxwellProbe, ZeroModel) {
  const auto r = maxwell_probe(ZeroField{}, Vector3d(1, 1, 1), 0.0, 1e-3);
  EXPECT_EQ(r.curl + r.efield + r.divergence + r.dbdt, 0.0);
}

TEST(MaxwellProbe, RejectsBadStep) {
  EXPECT_THROW(maxwell_probe(ZeroField{}, Vector3d::Zero(), 0.0, 0.0), PreconditionError);
}

TEST(FieldModel, Validation) {
  PlaneWavePulse bad{Vector3d(0, 0, 1), Vector3d(0, 0, 1), 1.0, 0.0, 1.0};
  EXPECT_THROW(validate(bad), PreconditionError);
  PlaneWavePulse good{Vector3d(1, 0, 0), Vector3d(0, 0, 1), 1.0, 0.0, 1.0};
  EXPECT_NO_THROW(validate(good));
}

TEST(FieldModel, ScalingAndPredicates) {
  UniformB m{Vector3d(0, 0, 2), Envelope::constant()};
  EXPECT_TRUE(is_static(m));
  EXPECT_TRUE(is_uniform_b(m));
  EXPECT_TRUE(is_zero(scaled(m, 0.0)));
  const auto s = sample(scaled(m, -0.5), Vector3d(1, 0, 0), 0.0);
  EXPECT_EQ((s.B - Vector3d(0, 0, -1)).norm(), 0.0);
  EXPECT_FALSE(is_static(UniformB{Vector3d(0, 0, 1), Envelope::sinusoid(1, 0)}));
}
