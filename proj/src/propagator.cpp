#include "relspin/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "relspin/dynamics.hpp"
#include "relspin/errors.hpp"
#include "relspin/expr_library.hpp"

namespace relspin {

namespace {

const cdouble I(0.0, 1.0);

void apply_pointwise(SpinorField& f, const std::vector<Matrix4d>& table) {
  for (std::size_t i = 0; i < f.points(); ++i) {
    const Spinor4d v = table[i] * f.spinor(i);
    f.spinor(i) = v;
  }
}

void check_finite(const SpinorField& f, const char* where) {
  if (!f.all_finite()) throw NumericalError(std::string(where) + ": non-finite amplitudes");
}

}  // namespace

Matrix4d potential_exponential(const Vector3d& A, double phi, const PhysParamsd& params, double tau) {
  const auto& d = dirac_matrices<double>();
  const cdouble phase = std::exp(-I * params.e * phi * tau);
  const double a = A.norm();
  if (a == 0.0) return phase * d.identity;
  // (alpha.n)^2 = 1
  const double theta = tau * params.e * params.c * a;
  Matrix4d an = Matrix4d::Zero();
  for (int i = 0; i < 3; ++i) an += (A(i) / a) * d.alpha[i];
  return phase * (std::cos(theta) * d.identity + I * std::sin(theta) * an);
}

Matrix4d kinetic_exponential(const Vector3d& k, const PhysParamsd& params, double tau) {
  const Matrix4d h = free_dirac_matrix<double>(k, params);
  const double e = energy_ep<double>(k, params);
  return std::cos(e * tau) * dirac_matrices<double>().identity - I * (std::sin(e * tau) / e) * h;
}

StrangPropagator::StrangPropagator(GridSpec grid, FieldModel model, PhysParamsd params, double dt)
    : grid_(std::move(grid)), model_(std::move(model)), params_(params), dt_(dt) {
  validate(model_);
  kinetic_.resize(grid_.points());
  for (std::size_t j = 0; j < grid_.points(); ++j)
    kinetic_[j] = kinetic_exponential(grid_.momentum(j), params_, dt_);
  if (is_static(model_) && !is_zero(model_)) {
    potential_.resize(grid_.points());
    for (std::size_t i = 0; i < grid_.points(); ++i) {
      const FieldSample s = sample(model_, grid_.position(i), 0.0);
      potential_[i] = potential_exponential(s.A, s.phi, params_, 0.5 * dt_);
    }
  }
}

void StrangPropagator::apply_position_half(SpinorField& f, double t_mid) const {
  if (is_zero(model_)) return;
  if (!potential_.empty()) {
    apply_pointwise(f, potential_);
    return;
  }
  for (std::size_t i = 0; i < f.points(); ++i) {
    const FieldSample s = sample(model_, grid_.position(i), t_mid);
    const Spinor4d v = potential_exponential(s.A, s.phi, params_, 0.5 * dt_) * f.spinor(i);
    f.spinor(i) = v;
  }
}

SpinorField StrangPropagator::step(const SpinorField& f, double t) const {
  if (!(f.grid() == grid_)) throw PreconditionError("strang step: field grid does not match");
  const Space original = f.space();
  // Midpoint field values for both half steps keep the scheme second order
  // and make the step with -dt the exact inverse.
  const double t_mid = t + 0.5 * dt_;
  SpinorField g = transform(f, Space::Position);
  apply_position_half(g, t_mid);
  transform_in_place(g, Space::Momentum);
  apply_pointwise(g, kinetic_);
  transform_in_place(g, Space::Position);
  apply_position_half(g, t_mid);
  check_finite(g, "strang step");
  transform_in_place(g, original);
  return g;
}

SpinorField strang_step_dirac(const SpinorField& field, const FieldModel& model,
                              const PhysParamsd& params, double t, double dt) {
  return StrangPropagator(field.grid(), model, params, dt).step(field, t);
}

SpinorField krylov_step(const Expr& H, const SpinorField& field, double t, double dt,
                        const KrylovOptions& opts, KrylovInfo* info) {
  if (opts.max_dim < 8) throw PreconditionError("krylov step: max_dim must be at least 8");
  if (!(opts.tol > 0)) throw PreconditionError("krylov step: tol must be positive");
  const double beta0 = norm(field);
  if (dt == 0.0 || beta0 == 0.0) {
    if (info) *info = {0, 0.0};
    return field;
  }
  const double t_mid = t + 0.5 * dt;
  const int m = opts.max_dim;
  std::vector<SpinorField> V;
  V.reserve(m + 1);
  V.push_back((1.0 / beta0) * field);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m + 1, m);

  ApplyOptions ao = opts.apply;
  Eigen::VectorXcd y;
  double err = std::numeric_limits<double>::infinity();
  int dim = 0;
  for (int j = 0; j < m; ++j) {
    SpinorField w = transform(apply(H, V[j], t_mid, ao), field.space());
    // the guard is a property of the start vector
    ao.zero_mode_guard = std::numeric_limits<double>::infinity();
    // modified Gram-Schmidt, twice
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i <= j; ++i) {
        const cdouble c = inner(V[i], w);
        h(i, j) += c;
        w -= c * V[i];
      }
    const double hn = norm(w);
    h(j + 1, j) = hn;
    dim = j + 1;

    // exp of the augmented matrix: column 0 holds the coefficients, the
    // extra row gives the a-posteriori error estimate.
    Eigen::MatrixXcd aug = Eigen::MatrixXcd::Zero(dim + 1, dim + 1);
    aug.topLeftCorner(dim + 1, dim) = h.topLeftCorner(dim + 1, dim);
    const Eigen::MatrixXcd ex = (cdouble(0.0, -dt) * aug).exp();
    y = beta0 * ex.col(0).head(dim);
    err = beta0 * std::abs(ex(dim, 0));

    const bool breakdown = hn <= 1e-14 * beta0;
    if (breakdown) err = 0.0;
    if (err <= opts.tol * beta0) break;
    if (j + 1 == m) {
      const double shrink = std::clamp(0.8 * std::pow(opts.tol * beta0 / err, 1.0 / m), 0.1, 0.9);
      std::ostringstream os;
      os << "krylov step: error estimate " << err / beta0 << " above tolerance " << opts.tol
         << " with subspace " << m << " at dt = " << dt;
      throw StepSizeError(os.str(), dt * shrink);
    }
    V.push_back((1.0 / hn) * w);
  }

  SpinorField out(field.grid(), field.space());
  for (int i = 0; i < dim; ++i) out += y(i) * V[i];
  check_finite(out, "krylov step");
  if (info) *info = {dim, err / beta0};
  return out;
}

SpinorField initial_state(const RunSpec& spec) {
  if (spec.initial.empty()) throw PreconditionError("run: no initial packet");
  SpinorField psi(spec.grid, Space::Position);
  for (const auto& c : spec.initial)
    psi += c.amplitude * transform(gaussian_packet(spec.grid, c.packet, spec.params), Space::Position);
  const double n = norm(psi);
  if (!(n > 0)) throw PreconditionError("run: initial components cancel");
  psi *= cdouble(1.0 / n);
  return psi;
}

Method resolved_method(const RunSpec& spec) {
  if (spec.method != Method::Auto) return spec.method;
  return spec.hamiltonian == HamiltonianId::Free || spec.hamiltonian == HamiltonianId::DiracEM
             ? Method::Strang
             : Method::Krylov;
}

NamedHamiltonian run_hamiltonian(const RunSpec& spec) {
  return build_hamiltonian(spec.hamiltonian, spec.model, spec.params, spec.hermitize, spec.term_mask);
}

std::function<SpinorField(const SpinorField&, double)> make_stepper(const RunSpec& spec, double dt) {
  if (resolved_method(spec) == Method::Strang) {
    if (spec.hamiltonian != HamiltonianId::Free && spec.hamiltonian != HamiltonianId::DiracEM)
      throw PreconditionError("run: the split-step method needs the free or dirac-em Hamiltonian");
    const FieldModel model = spec.hamiltonian == HamiltonianId::Free ? FieldModel{ZeroField{}} : spec.model;
    auto prop = std::make_shared<StrangPropagator>(spec.grid, model, spec.params, dt);
    return [prop](const SpinorField& f, double t) { return prop->step(f, t); };
  }
  auto H = std::make_shared<Expr>(run_hamiltonian(spec).total);
  const KrylovOptions ko = spec.krylov;
  return [H, ko, dt](const SpinorField& f, double t) { return krylov_step(*H, f, t, dt, ko); };
}

namespace {

double default_shell(const GridSpec& g) {
  double l = g.length(0);
  for (int a = 1; a < g.dim(); ++a) l = std::min(l, g.length(a));
  return 0.1 * l;
}

struct Observables {
  std::array<VecExpr, 3> spin;
  VecExpr r, p;
};

Observables observables(const PhysParamsd& params) {
  Observables o;
  for (int k = 0; k < 3; ++k) o.spin[k] = spin_expr(kAllSpinKinds[k], params);
  o.r = ops::position();
  o.p = ops::momentum();
  return o;
}

Sample measure_with(const Observables& o, const SpinorField& f, double t, const NamedHamiltonian& h,
                    double shell) {
  Sample s;
  s.t = t;
  s.norm = norm(f);
  const double n2 = s.norm * s.norm;
  s.energy = expectation(h.total, f, t).real() / n2;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i) s.spin[k](i) = expectation(o.spin[k][i], f, t).real() / n2;
  for (int i = 0; i < 3; ++i) {
    s.r(i) = expectation(o.r[i], f, t).real() / n2;
    s.p(i) = expectation(o.p[i], f, t).real() / n2;
  }
  s.flux = boundary_flux(f, shell);
  return s;
}

}  // namespace

Sample measure(const SpinorField& f, double t, const NamedHamiltonian& h, const PhysParamsd& params,
               double flux_shell) {
  return measure_with(observables(params), f, t, h, flux_shell > 0 ? flux_shell : default_shell(f.grid()));
}

std::string Trajectory::csv_header() {
  std::string s = "t,norm,energy";
  for (const char* kind : {"dirac", "fw", "pryce"})
    for (const char* c : {"x", "y", "z"}) s += std::string(",S") + c + "_" + kind;
  s += ",rx,ry,rz,px,py,pz,flux";
  return s;
}

void Trajectory::write_csv(std::ostream& os) const {
  os << csv_header() << '\n';
  os << std::setprecision(15);
  for (const auto& s : samples) {
    os << s.t << ',' << s.norm << ',' << s.energy;
    for (const auto& v : s.spin) os << ',' << v(0) << ',' << v(1) << ',' << v(2);
    os << ',' << s.r(0) << ',' << s.r(1) << ',' << s.r(2);
    os << ',' << s.p(0) << ',' << s.p(1) << ',' << s.p(2) << ',' << s.flux << '\n';
  }
}

Trajectory run(const RunSpec& spec) {
  if (spec.steps < 0 || spec.stride < 1) throw PreconditionError("run: steps >= 0 and stride >= 1 required");
  if (!(spec.dt > 0)) throw PreconditionError("run: dt must be positive");
  const NamedHamiltonian h = run_hamiltonian(spec);
  const Observables obs = observables(spec.params);
  const double shell = spec.flux_shell > 0 ? spec.flux_shell : default_shell(spec.grid);
  const auto stepper = make_stepper(spec, spec.dt);

  Trajectory traj;
  SpinorField psi = initial_state(spec);
  auto record = [&](double t) {
    Sample s = measure_with(obs, psi, t, h, shell);
    if (s.flux > spec.flux_threshold) {
      std::ostringstream os;
      os << "boundary flux " << s.flux << " exceeds " << spec.flux_threshold << " at t = " << t;
      throw BoundaryFluxError(os.str());
    }
    traj.samples.push_back(s);
  };
  record(0.0);
  for (int n = 1; n <= spec.steps; ++n) {
    psi = stepper(psi, (n - 1) * spec.dt);
    if (n % spec.stride == 0 || n == spec.steps) record(n * spec.dt);
  }
  return traj;
}

double EhrenfestSeries::max() const {
  double m = 0;
  for (const auto& r : residual) m = std::max(m, r.maxCoeff());
  return m;
}

EhrenfestSeries ehrenfest_residual(const RunSpec& spec, SpinKind kind) {
  if (spec.steps < 2 || spec.stride < 1) throw PreconditionError("ehrenfest: need at least two steps");
  if (!(spec.dt > 0)) throw PreconditionError("ehrenfest: dt must be positive");
  const NamedHamiltonian h = run_hamiltonian(spec);
  const VecExpr S = spin_expr(kind, spec.params);
  const auto stepper = make_stepper(spec, spec.dt);

  // d<S>/dt = <(1/i)[S, H_H]> + <(1/i){S, H_A}> = -2 Im <H psi | S psi>
  // for Hermitian S, evaluated with one H application per sample.
  std::vector<Vector3d> value(spec.steps + 1);
  std::vector<std::pair<int, Vector3d>> predicted;
  SpinorField psi = initial_state(spec);
  for (int n = 0; n <= spec.steps; ++n) {
    const double t = n * spec.dt;
    std::array<SpinorField, 3> Spsi;
    for (int i = 0; i < 3; ++i) {
      Spsi[i] = apply(S[i], psi, t);
      value[n](i) = inner(psi, Spsi[i]).real();
    }
    if (n > 0 && n < spec.steps && n % spec.stride == 0) {
      const SpinorField Hpsi = apply(h.total, psi, t);
      Vector3d d;
      for (int i = 0; i < 3; ++i) d(i) = -2.0 * inner(Hpsi, Spsi[i]).imag();
      predicted.emplace_back(n, d);
    }
    if (n < spec.steps) psi = stepper(psi, t);
  }
  EhrenfestSeries out;
  for (const auto& [n, d] : predicted) {
    const Vector3d fd = (value[n + 1] - value[n - 1]) / (2.0 * spec.dt);
    out.t.push_back(n * spec.dt);
    out.residual.push_back((fd - d).cwiseAbs());
  }
  return out;
}

}  // namespace relspin
