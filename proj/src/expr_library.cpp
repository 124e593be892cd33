#include "relspin/expr_library.hpp"

#include <variant>

namespace relspin::ops {

namespace {

const DiracMatrices<double>& dm() { return dirac_matrices<double>(); }

bool vanishes(const FieldModel& model, FieldQuantity q, int i) {
  if (is_zero(model)) return true;
  if (const auto* b = std::get_if<UniformB>(&model)) {
    const bool static_env = b->envelope.is_constant();
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    const bool cross_zero = b->b0(j) == 0.0 && b->b0(k) == 0.0;
    switch (q) {
      case FieldQuantity::A:
        return cross_zero;
      case FieldQuantity::B:
        return b->b0(i) == 0.0;
      case FieldQuantity::E:
      case FieldQuantity::dEdt:
        return static_env || cross_zero;
      case FieldQuantity::dBdt:
      case FieldQuantity::d2Bdt2:
        return static_env || b->b0(i) == 0.0;
    }
  }
  if (const auto* e = std::get_if<UniformE>(&model)) {
    switch (q) {
      case FieldQuantity::E:
        return e->e0(i) == 0.0;
      case FieldQuantity::dEdt:
        return e->envelope.is_constant() || e->e0(i) == 0.0;
      default:
        return true;
    }
  }
  return false;
}

const Vector3d& pick(const FieldSample& s, FieldQuantity q) {
  switch (q) {
    case FieldQuantity::A:
      return s.A;
    case FieldQuantity::E:
      return s.E;
    case FieldQuantity::B:
      return s.B;
    case FieldQuantity::dBdt:
      return s.dBdt;
    case FieldQuantity::d2Bdt2:
      return s.d2Bdt2;
    case FieldQuantity::dEdt:
      return s.dEdt;
  }
  return s.A;
}

}  // namespace

Expr one() { return identity_op(); }
Expr beta() { return constant(dm().beta); }
VecExpr alpha() { return constant_vec(dm().alpha); }
VecExpr sigma() { return constant_vec(dm().sigma); }

VecExpr momentum() {
  VecExpr out;
  for (int i = 0; i < 3; ++i) out[i] = momentum_scalar([i](const Vector3d& k) { return k(i); });
  return out;
}

VecExpr position() {
  VecExpr out;
  for (int i = 0; i < 3; ++i) out[i] = position_scalar([i](const Vector3d& r, double) { return r(i); });
  return out;
}

VecExpr field(const FieldModel& model, FieldQuantity q) {
  VecExpr out;
  const bool td = !is_static(model);
  for (int i = 0; i < 3; ++i) {
    if (vanishes(model, q, i)) continue;
    out[i] = position_scalar(
        [model, q, i](const Vector3d& r, double t) { return pick(sample(model, r, t), q)(i); }, td);
  }
  return out;
}

Expr scalar_potential(const FieldModel& model) {
  if (!std::holds_alternative<UniformE>(model) || is_zero(model)) return Expr();
  return position_scalar([model](const Vector3d& r, double t) { return sample(model, r, t).phi; },
                         !is_static(model));
}

Expr div_e(const FieldModel& model) {
  if (!std::holds_alternative<PlaneWavePulse>(model) || is_zero(model)) return Expr();
  return position_scalar([model](const Vector3d& r, double t) { return sample(model, r, t).divE; },
                         true);
}

VecExpr kinetic_momentum(const FieldModel& model, const PhysParamsd& params) {
  return momentum() - params.e * field(model, FieldQuantity::A);
}

Expr energy(const PhysParamsd& params) {
  return momentum_scalar([params](const Vector3d& k) { return energy_ep(k, params); });
}

Expr inv_energy(const PhysParamsd& params) {
  return momentum_scalar([params](const Vector3d& k) { return 1.0 / energy_ep(k, params); });
}

Expr inv_energy_sum(const PhysParamsd& params) {
  return momentum_scalar([params](const Vector3d& k) {
    const double e = energy_ep(k, params);
    return 1.0 / (e * (e + params.rest_energy()));
  });
}

Expr inv_p2() {
  return momentum_scalar([](const Vector3d& k) { return 1.0 / k.squaredNorm(); }, true);
}

VecExpr spin(SpinKind kind, const PhysParamsd& params) {
  if (kind == SpinKind::Dirac) return 0.5 * sigma();
  VecExpr out;
  if (kind == SpinKind::FW) {
    for (int i = 0; i < 3; ++i)
      out[i] = momentum_diag(
          [params, i](const Vector3d& k) { return spin_operator(SpinKind::FW, k, params, 0.0)[i]; });
    return out;
  }
  // Pryce: the regular part beta Sigma / 2 stays a constant so that only the
  // projector part is dropped at k = 0.
  for (int i = 0; i < 3; ++i) {
    const Matrix4d regular = 0.5 * dm().beta * dm().sigma[i];
    out[i] = constant(regular) +
             momentum_diag(
                 [params, i, regular](const Vector3d& k) {
                   return Matrix4d(spin_operator(SpinKind::Pryce, k, params, 0.0)[i] - regular);
                 },
                 true);
  }
  return out;
}

VecExpr position_correction(SpinKind kind, const PhysParamsd& params, bool negated_fw_lead) {
  VecExpr out;
  if (kind == SpinKind::Dirac) return out;
  for (int i = 0; i < 3; ++i) {
    out[i] = momentum_diag(
        [kind, params, i, negated_fw_lead](const Vector3d& k) {
          return relspin::position_correction(kind, k, params, 0.0, negated_fw_lead)[i];
        },
        true);
  }
  return out;
}

bool is_momentum_only(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Zero:
    case Expr::Kind::Constant:
    case Expr::Kind::MomentumDiag:
      return true;
    case Expr::Kind::PositionDiag:
      return false;
    case Expr::Kind::Adjoint:
      return is_momentum_only(e.node().resolved_adjoint);
    default:
      for (const auto& c : e.node().children)
        if (!is_momentum_only(c)) return false;
      return true;
  }
}

}  // namespace relspin::ops
