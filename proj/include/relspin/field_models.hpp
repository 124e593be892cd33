#pragma once

// Closed-form electromagnetic field configurations. Every model supplies the
// potentials (A, phi), the fields (E, B) and the analytic time derivatives that
// the Hamiltonians need. Uniform magnetic fields use the gauge A = (B x r)/2,
// phi = 0; a time-dependent envelope then induces E = -(dB/dt x r)/2.

#include <string>
#include <variant>

#include "relspin/dirac_algebra.hpp"

namespace relspin {

/// Scalar time profile g(t) with closed-form g' and g''.
struct Envelope {
  enum class Kind { Constant, Polynomial, Gaussian, Sinusoid };
  Kind kind = Kind::Constant;
  // Polynomial: c0 + c1 t + c2 t^2.
  double c0 = 1.0, c1 = 0.0, c2 = 0.0;
  // Gaussian: exp(-(t - t0)^2 / (2 w^2)).
  double t0 = 0.0, width = 1.0;
  // Sinusoid: sin(omega t + phase).
  double omega = 0.0, phase = 0.0;

  static Envelope constant() { return {}; }
  static Envelope polynomial(double a0, double a1, double a2);
  static Envelope gaussian(double center, double w);
  static Envelope sinusoid(double w, double ph);

  double value(double t) const;
  double d1(double t) const;
  double d2(double t) const;
  bool is_constant() const;
};

struct ZeroField {};

struct UniformB {
  Vector3d b0 = Vector3d::Zero();
  Envelope envelope;
};

/// Uniform electric field E(t) = e0 g(t) in the length gauge: phi = -E.r, A = 0.
struct UniformE {
  Vector3d e0 = Vector3d::Zero();
  Envelope envelope;
};

/// A(r,t) = (E_amp / omega) f(t) sin(k.r - omega t), phi = 0, with a Gaussian
/// envelope f. Requires k . E_amp = 0 and omega > 0.
struct PlaneWavePulse {
  Vector3d e_amplitude = Vector3d::Zero();
  Vector3d wavevector = Vector3d::Zero();
  double omega = 1.0;
  double t0 = 0.0;
  double width = 1.0;
};

using FieldModel = std::variant<ZeroField, UniformB, UniformE, PlaneWavePulse>;

struct FieldSample {
  Vector3d A = Vector3d::Zero();
  double phi = 0.0;
  Vector3d E = Vector3d::Zero();
  Vector3d B = Vector3d::Zero();
  Vector3d dBdt = Vector3d::Zero();
  Vector3d d2Bdt2 = Vector3d::Zero();
  Vector3d dEdt = Vector3d::Zero();
  double divE = 0.0;
};

FieldSample sample(const FieldModel& model, const Vector3d& r, double t);

/// Throws PreconditionError on an inconsistent parameter set.
void validate(const FieldModel& model);

/// Multiplies every field amplitude by `lambda` (potentials and fields are
/// linear in the amplitudes).
FieldModel scaled(const FieldModel& model, double lambda);

bool is_zero(const FieldModel& model);
bool is_uniform_b(const FieldModel& model);
/// True when no field quantity depends on time.
bool is_static(const FieldModel& model);
std::string describe(const FieldModel& model);

/// Finite-difference cross-check of a model's closed forms.
struct MaxwellResidual {
  double curl = 0.0;        // |curl A - B|, central differences
  double efield = 0.0;      // |(-dA/dt - grad phi) - E|
  double divergence = 0.0;  // |div A|
  double dbdt = 0.0;        // |(B(t+h) - B(t-h))/2h - dB/dt|
};

MaxwellResidual maxwell_probe(const FieldModel& model, const Vector3d& r, double t, double h);

}  // namespace relspin
