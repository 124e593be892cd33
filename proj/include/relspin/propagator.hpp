#pragma once

// Time evolution of spinor fields and observable trajectories.
//
// Two steppers: an exact-factor Strang split for the Dirac Hamiltonian
// (position factor exp(-i(-e c alpha.A + e phi) dt/2), momentum factor
// exp(-i(c alpha.k + beta m0 c^2) dt), both closed-form per point), and an
// Arnoldi-Krylov exponential for any operator expression, used for the FW
// Hamiltonians that mix r and p.

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "relspin/field_models.hpp"
#include "relspin/grid.hpp"
#include "relspin/hamiltonians.hpp"
#include "relspin/operator_expr.hpp"
#include "relspin/spin_operators.hpp"

namespace relspin {

class StrangPropagator {
 public:
  /// dt may be negative (backward propagation).
  StrangPropagator(GridSpec grid, FieldModel model, PhysParamsd params, double dt);
  /// One step from t to t + dt.
  SpinorField step(const SpinorField& f, double t) const;
  double dt() const { return dt_; }

 private:
  void apply_position_half(SpinorField& f, double t_mid) const;
  GridSpec grid_;
  FieldModel model_;
  PhysParamsd params_;
  double dt_;
  std::vector<Matrix4d> kinetic_;              // per mode
  std::vector<Matrix4d> potential_;            // per point, static fields only
};

SpinorField strang_step_dirac(const SpinorField& field, const FieldModel& model,
                              const PhysParamsd& params, double t, double dt);

/// exp(-i tau V) for V = -e c alpha.A + e phi at a single point, closed form.
Matrix4d potential_exponential(const Vector3d& A, double phi, const PhysParamsd& params, double tau);
/// exp(-i tau (c alpha.k + beta m0 c^2)), closed form.
Matrix4d kinetic_exponential(const Vector3d& k, const PhysParamsd& params, double tau);

struct KrylovOptions {
  int max_dim = 40;     // Arnoldi subspace limit (>= 8)
  double tol = 1e-12;   // bound on the error estimate, relative to |psi|
  ApplyOptions apply;
};

struct KrylovInfo {
  int dimension = 0;
  double error_estimate = 0;
};

/// exp(-i H(t + dt/2) dt) psi by Arnoldi. Throws StepSizeError carrying a
/// suggested dt when the estimate does not drop below tol within max_dim.
SpinorField krylov_step(const Expr& H, const SpinorField& field, double t, double dt,
                        const KrylovOptions& opts = {}, KrylovInfo* info = nullptr);

enum class Method { Auto, Strang, Krylov };

struct InitialComponent {
  PacketSpec packet;
  cdouble amplitude = 1.0;
};

struct RunSpec {
  PhysParamsd params;
  GridSpec grid;
  FieldModel model = ZeroField{};
  HamiltonianId hamiltonian = HamiltonianId::DiracEM;
  std::vector<std::string> term_mask;
  bool hermitize = false;
  std::vector<InitialComponent> initial;  // superposed, then normalized
  double dt = 0.01;
  int steps = 100;
  int stride = 1;
  Method method = Method::Auto;  // Strang for free/dirac-em, Krylov otherwise
  KrylovOptions krylov;
  double flux_threshold = 1e-6;
  double flux_shell = 0.0;  // 0: a tenth of the shortest active length
};

struct Sample {
  double t = 0;
  double norm = 0;
  double energy = 0;
  std::array<Vector3d, 3> spin;  // dirac, fw, pryce; normalized expectations
  Vector3d r = Vector3d::Zero();
  Vector3d p = Vector3d::Zero();
  double flux = 0;
};

struct Trajectory {
  std::vector<Sample> samples;
  /// Header: t,norm,energy,Sx_dirac,Sy_dirac,Sz_dirac,Sx_fw,...,Sz_pryce,rx,ry,rz,px,py,pz,flux
  void write_csv(std::ostream& os) const;
  static std::string csv_header();
};

SpinorField initial_state(const RunSpec& spec);
Method resolved_method(const RunSpec& spec);
NamedHamiltonian run_hamiltonian(const RunSpec& spec);

/// Stepper selected by the spec: psi(t) -> psi(t + dt).
std::function<SpinorField(const SpinorField&, double)> make_stepper(const RunSpec& spec, double dt);

/// Propagates and samples every `stride` steps (and at the last step).
/// Throws BoundaryFluxError when the boundary-shell weight exceeds the threshold.
Trajectory run(const RunSpec& spec);
Sample measure(const SpinorField& f, double t, const NamedHamiltonian& h, const PhysParamsd& params,
               double flux_shell);

struct EhrenfestSeries {
  std::vector<double> t;
  std::vector<Vector3d> residual;  // |d<S>/dt - <(1/i)[S, H_H]> + i<{S, H_A}>| per component
  double max() const;
};

/// Centered differences of <S_kind> along the run against the Heisenberg
/// right-hand side, at every stride-th interior step.
EhrenfestSeries ehrenfest_residual(const RunSpec& spec, SpinKind kind);

}  // namespace relspin
