#pragma once

// Building blocks for grid operators: Dirac matrices as constant leaves,
// p and r as diagonal leaves, field components, and the momentum-scalar
// prefactors (1/E_p, 1/(E_p (E_p + m0 c^2)), 1/p^2) used by the dynamics terms.

#include "relspin/field_models.hpp"
#include "relspin/operator_expr.hpp"
#include "relspin/spin_operators.hpp"

namespace relspin::ops {

Expr one();
Expr beta();
VecExpr alpha();
VecExpr sigma();

/// k_i times the identity.
VecExpr momentum();
/// r_i times the identity.
VecExpr position();

enum class FieldQuantity { A, E, B, dBdt, d2Bdt2, dEdt };

/// Components of a field quantity as position leaves. Components that vanish
/// identically for the model are returned as zero expressions.
VecExpr field(const FieldModel& model, FieldQuantity q);
Expr scalar_potential(const FieldModel& model);
Expr div_e(const FieldModel& model);

/// p - e A
VecExpr kinetic_momentum(const FieldModel& model, const PhysParamsd& params);

Expr energy(const PhysParamsd& params);
Expr inv_energy(const PhysParamsd& params);
/// 1 / (E_p (E_p + m0 c^2))
Expr inv_energy_sum(const PhysParamsd& params);
/// 1 / p^2, zero at k = 0 and flagged singular.
Expr inv_p2();

VecExpr spin(SpinKind kind, const PhysParamsd& params);
/// Delta(p) in r_kind = r + Delta(p).
VecExpr position_correction(SpinKind kind, const PhysParamsd& params, bool negated_fw_lead = false);

/// True if `e` has no position leaves.
bool is_momentum_only(const Expr& e);

}  // namespace relspin::ops
