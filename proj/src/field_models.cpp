#include "relspin/field_models.hpp"

#include <cmath>
#include <sstream>

#include "relspin/errors.hpp"

namespace relspin {

Envelope Envelope::polynomial(double a0, double a1, double a2) {
  Envelope g;
  g.kind = Kind::Polynomial;
  g.c0 = a0;
  g.c1 = a1;
  g.c2 = a2;
  return g;
}

Envelope Envelope::gaussian(double center, double w) {
  Envelope g;
  g.kind = Kind::Gaussian;
  g.t0 = center;
  g.width = w;
  return g;
}

Envelope Envelope::sinusoid(double w, double ph) {
  Envelope g;
  g.kind = Kind::Sinusoid;
  g.omega = w;
  g.phase = ph;
  return g;
}

double Envelope::value(double t) const {
  switch (kind) {
    case Kind::Constant:
      return 1.0;
    case Kind::Polynomial:
      return c0 + t * (c1 + t * c2);
    case Kind::Gaussian: {
      const double u = (t - t0) / width;
      return std::exp(-0.5 * u * u);
    }
    case Kind::Sinusoid:
      return std::sin(omega * t + phase);
  }
  return 0.0;
}

double Envelope::d1(double t) const {
  switch (kind) {
    case Kind::Constant:
      return 0.0;
    case Kind::Polynomial:
      return c1 + 2.0 * c2 * t;
    case Kind::Gaussian:
      return -(t - t0) / (width * width) * value(t);
    case Kind::Sinusoid:
      return omega * std::cos(omega * t + phase);
  }
  return 0.0;
}

double Envelope::d2(double t) const {
  switch (kind) {
    case Kind::Constant:
      return 0.0;
    case Kind::Polynomial:
      return 2.0 * c2;
    case Kind::Gaussian: {
      const double w2 = width * width;
      const double u = (t - t0);
      return (u * u / (w2 * w2) - 1.0 / w2) * value(t);
    }
    case Kind::Sinusoid:
      return -omega * omega * std::sin(omega * t + phase);
  }
  return 0.0;
}

bool Envelope::is_constant() const {
  return kind == Kind::Constant || (kind == Kind::Polynomial && c1 == 0.0 && c2 == 0.0);
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

FieldSample sample(const FieldModel& model, const Vector3d& r, double t) {
  FieldSample s;
  std::visit(overloaded{
                 [](const ZeroField&) {},
                 [&](const UniformB& m) {
                   const double g = m.envelope.value(t);
                   const double g1 = m.envelope.d1(t);
                   const double g2 = m.envelope.d2(t);
                   const Vector3d b0xr = m.b0.cross(r);
                   s.B = m.b0 * g;
                   s.A = 0.5 * b0xr * g;
                   s.E = -0.5 * b0xr * g1;
                   s.dEdt = -0.5 * b0xr * g2;
                   s.dBdt = m.b0 * g1;
                   s.d2Bdt2 = m.b0 * g2;
                 },
                 [&](const UniformE& m) {
                   const double g = m.envelope.value(t);
                   s.E = m.e0 * g;
                   s.dEdt = m.e0 * m.envelope.d1(t);
                   s.phi = -m.e0.dot(r) * g;
                 },
                 [&](const PlaneWavePulse& m) {
                   const Envelope f = Envelope::gaussian(m.t0, m.width);
                   const double env = f.value(t), env1 = f.d1(t), env2 = f.d2(t);
                   const double theta = m.wavevector.dot(r) - m.omega * t;
                   const double sn = std::sin(theta), cs = std::cos(theta);
                   const Vector3d a = m.e_amplitude / m.omega;
                   const Vector3d kxa = m.wavevector.cross(a);
                   const double w = m.omega;
                   s.A = a * env * sn;
                   s.E = a * (w * env * cs - env1 * sn);
                   s.dEdt = a * (2.0 * w * env1 * cs + (w * w * env - env2) * sn);
                   s.B = kxa * env * cs;
                   s.dBdt = kxa * (env1 * cs + w * env * sn);
                   s.d2Bdt2 = kxa * (env2 * cs + 2.0 * w * env1 * sn - w * w * env * cs);
                   s.divE = m.wavevector.dot(a) * (-w * env * sn - env1 * cs);
                 },
             },
             model);
  return s;
}

void validate(const FieldModel& model) {
  std::visit(overloaded{
                 [](const ZeroField&) {},
                 [](const UniformB& m) {
                   if (!m.b0.allFinite()) throw PreconditionError("uniform-b: b0 not finite");
                   if (m.envelope.kind == Envelope::Kind::Gaussian && !(m.envelope.width > 0))
                     throw PreconditionError("uniform-b: envelope width must be > 0");
                 },
                 [](const UniformE& m) {
                   if (!m.e0.allFinite()) throw PreconditionError("uniform-e: e0 not finite");
                   if (m.envelope.kind == Envelope::Kind::Gaussian && !(m.envelope.width > 0))
                     throw PreconditionError("uniform-e: envelope width must be > 0");
                 },
                 [](const PlaneWavePulse& m) {
                   if (!(m.omega > 0)) throw PreconditionError("plane-wave: omega must be > 0");
                   if (!(m.width > 0)) throw PreconditionError("plane-wave: width must be > 0");
                   const double scale = m.wavevector.norm() * m.e_amplitude.norm();
                   if (std::abs(m.wavevector.dot(m.e_amplitude)) > 1e-12 * (1.0 + scale))
                     throw PreconditionError("plane-wave: amplitude must be transverse to k");
                 },
             },
             model);
}

FieldModel scaled(const FieldModel& model, double lambda) {
  return std::visit(overloaded{
                        [](const ZeroField& m) -> FieldModel { return m; },
                        [&](UniformB m) -> FieldModel {
                          m.b0 *= lambda;
                          return m;
                        },
                        [&](UniformE m) -> FieldModel {
                          m.e0 *= lambda;
                          return m;
                        },
                        [&](PlaneWavePulse m) -> FieldModel {
                          m.e_amplitude *= lambda;
                          return m;
                        },
                    },
                    model);
}

bool is_zero(const FieldModel& model) {
  return std::visit(overloaded{
                        [](const ZeroField&) { return true; },
                        [](const UniformB& m) { return m.b0.isZero(0.0); },
                        [](const UniformE& m) { return m.e0.isZero(0.0); },
                        [](const PlaneWavePulse& m) { return m.e_amplitude.isZero(0.0); },
                    },
                    model);
}

bool is_uniform_b(const FieldModel& model) {
  return std::holds_alternative<UniformB>(model) || std::holds_alternative<ZeroField>(model);
}

bool is_static(const FieldModel& model) {
  return std::visit(overloaded{
                        [](const ZeroField&) { return true; },
                        [](const UniformB& m) { return m.envelope.is_constant(); },
                        [](const UniformE& m) { return m.envelope.is_constant(); },
                        [](const PlaneWavePulse&) { return false; },
                    },
                    model);
}

std::string describe(const FieldModel& model) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const ZeroField&) { os << "zero"; },
                 [&](const UniformB& m) {
                   os << "uniform-b b0=(" << m.b0.x() << "," << m.b0.y() << "," << m.b0.z()
                      << ")";
                 },
                 [&](const UniformE& m) {
                   os << "uniform-e e0=(" << m.e0.x() << "," << m.e0.y() << "," << m.e0.z()
                      << ")";
                 },
                 [&](const PlaneWavePulse& m) {
                   os << "plane-wave omega=" << m.omega << " |E|=" << m.e_amplitude.norm();
                 },
             },
             model);
  return os.str();
}

MaxwellResidual maxwell_probe(const FieldModel& model, const Vector3d& r, double t, double h) {
  if (!(h > 0)) throw PreconditionError("maxwell_probe: h must be > 0");
  MaxwellResidual res;
  const FieldSample s0 = sample(model, r, t);

  // dA_j/dx_i and dphi/dx_i by central differences.
  Eigen::Matrix3d grad_a;
  Vector3d grad_phi;
  for (int i = 0; i < 3; ++i) {
    Vector3d dr = Vector3d::Zero();
    dr(i) = h;
    const FieldSample sp = sample(model, r + dr, t);
    const FieldSample sm = sample(model, r - dr, t);
    grad_a.row(i) = ((sp.A - sm.A) / (2.0 * h)).transpose();
    grad_phi(i) = (sp.phi - sm.phi) / (2.0 * h);
  }
  Vector3d curl;
  curl << grad_a(1, 2) - grad_a(2, 1), grad_a(2, 0) - grad_a(0, 2), grad_a(0, 1) - grad_a(1, 0);
  res.curl = (curl - s0.B).norm();
  res.divergence = std::abs(grad_a.trace());

  const FieldSample tp = sample(model, r, t + h);
  const FieldSample tm = sample(model, r, t - h);
  const Vector3d dadt = (tp.A - tm.A) / (2.0 * h);
  res.efield = (-dadt - grad_phi - s0.E).norm();
  res.dbdt = ((tp.B - tm.B) / (2.0 * h) - s0.dBdt).norm();
  return res;
}

}  // namespace relspin
