#pragma once

// Candidate spin equations of motion as operator expressions, and the
// commutator-based verifier that measures them on test states.
//
// Equation ids: dirac-free, fw-free, pryce-free, fw-em, pryce-em, fw-direct,
// pryce-direct. The id is "<kind>-<hamiltonian family>".

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "relspin/field_models.hpp"
#include "relspin/grid.hpp"
#include "relspin/hamiltonians.hpp"
#include "relspin/operator_expr.hpp"
#include "relspin/spin_operators.hpp"

namespace relspin {

struct CandidateTerm {
  std::string name;
  std::string source;  // Hamiltonian term it stems from, or "all"
  VecExpr expr;
};

struct CandidateEquation {
  std::string id;
  SpinKind kind = SpinKind::Dirac;
  HamiltonianId hamiltonian = HamiltonianId::Free;
  std::vector<CandidateTerm> terms;

  VecExpr total() const;
  VecExpr group(const std::string& source) const;
  std::vector<std::string> sources() const;
};

/// Spin operator of the given kind as three momentum leaves.
VecExpr spin_expr(SpinKind kind, const PhysParamsd& params);

bool has_candidate_equation(SpinKind kind, HamiltonianId ham);
std::string equation_id(SpinKind kind, HamiltonianId ham);

/// Throws PreconditionError when no candidate equation exists for the pair or
/// the field model is not uniform B (or zero) for the EM and direct families.
CandidateEquation rhs(SpinKind kind, HamiltonianId ham, const FieldModel& model,
                    const PhysParamsd& params);

enum class Classification { Holds, Converging, NonConverging };
std::string_view to_string(Classification c);

struct ClassificationThresholds {
  double holds = 1e-8;
  double converging_single = 1e-4;
  double converging_final = 1e-3;
  double converging_ratio = 0.5;
  double roundoff_floor = 1e-12;
};

Classification classify(const std::vector<double>& ladder, const ClassificationThresholds& th = {});

struct StateInfo {
  std::string id;
  PacketSpec spec;
};

/// Six packets: two polarizations (spin-up upper component and a seeded
/// random spinor) times three mean momenta, one with |k0| = 1.047 (close to
/// m0 c in natural units). Momenta are multiples of 2 pi / 48, so grids with
/// length a multiple of 48 keep the packets periodic. For dim = 1 the momenta
/// lie along x. Recommended width 6 (zero-mode weight ~ exp(-(k0 sigma)^2)).
std::vector<StateInfo> standard_battery(int dim, double width, std::uint64_t seed);

struct RefinementRow {
  int n = 0;
  double length = 0;
  double residual = 0;
};

struct GroupResult {
  std::string source;
  std::array<double, 3> residual{};  // linearized LHS vs linearized RHS, relative
  std::array<double, 3> lhs_norm{};
  double order0 = 0;  // field-independent parts, relative
  double order1 = 0;  // parts linear in the field, relative
  std::vector<RefinementRow> refinement;
  Classification classification = Classification::Holds;
  double max_residual() const;
};

struct TermResult {
  std::string name;
  std::string source;
  std::array<double, 3> contribution{};  // norm of the linearized term on the worst state
  Classification classification = Classification::Holds;
};

struct ResidualReport {
  std::string equation;
  SpinKind kind = SpinKind::Dirac;
  HamiltonianId hamiltonian = HamiltonianId::Free;
  std::string field;
  PhysParamsd params;
  double t = 0;
  GridSpec grid;
  std::vector<StateInfo> states;
  std::vector<GroupResult> groups;
  std::vector<TermResult> terms;
  double full_field_residual = 0;   // at the actual field strength, all orders
  double zero_field_lhs = 0;        // |LHS(zero field) - LHS(reference H)|, relative
  double zero_field_rhs = 0;        // |RHS(zero field) - LHS(zero field)|, relative
  Classification verdict = Classification::Holds;
  // Per term: min(|D + T|, |D + 2T|) / |D| on the worst cell, D = LHS - RHS.
  // The offending term is the one that best accounts for the mismatch.
  std::vector<double> mismatch_explanation;
  std::string offending_term;
};

struct VerifyOptions {
  double t = 0;
  std::vector<std::string> term_mask;  // H_direct terms to include; empty = all
  ApplyOptions apply;
  ClassificationThresholds thresholds;
  double eps_rel = 1e-14;
};

/// Runs the comparison on one grid. States must share a grid.
ResidualReport verify(SpinKind kind, HamiltonianId ham, const FieldModel& model,
                      const PhysParamsd& params, const std::vector<StateInfo>& states,
                      const GridSpec& grid, const VerifyOptions& opts = {});

/// verify() over a ladder of grids; group residuals per level go into the
/// refinement tables and classification uses the whole ladder. The report
/// body is the one from the finest level.
///
/// Groups: one per Hamiltonian term for the H_direct family plus "total";
/// a single "all" group otherwise. The verdict is the classification of
/// "total"/"all"; per-source groups are diagnostics.
ResidualReport verify_refined(SpinKind kind, HamiltonianId ham, const FieldModel& model,
                              const PhysParamsd& params, const std::vector<StateInfo>& states,
                              const std::vector<GridSpec>& ladder, const VerifyOptions& opts = {});

/// max over states and components of |(r_kind x p + S_kind) psi - (r x p + Sigma/2) psi| / |psi|.
double total_j_identity(SpinKind kind, const std::vector<SpinorField>& states,
                        const PhysParamsd& params, const ApplyOptions& opts = {});

/// Canonical commutator [x, k_x] - i on a packet, relative.
double canonical_commutator_residual(const SpinorField& state);

/// Generic refinement driver: evaluates `check(grid)` over the ladder.
template <typename Check>
std::vector<RefinementRow> refinement_study(Check&& check, const std::vector<GridSpec>& ladder) {
  std::vector<RefinementRow> rows;
  for (const auto& g : ladder) rows.push_back({g.n(), g.length(0), check(g)});
  return rows;
}

enum class Parity { Zero, Even, Odd, Mixed };
std::string_view to_string(Parity p);

struct ParityResult {
  Parity parity = Parity::Zero;
  double impurity = 0;  // worst relative weight of the wrong block over all leaves
};

/// Block parity of an expression in the beta basis, from leaf-level block
/// projections at sampled positions, times and momenta.
ParityResult block_parity(const Expr& e, int samples = 6, std::uint64_t seed = 1);

struct ZeemanFixedMomentum {
  double fw_leading = 0;       // (1/i)[Sigma/2, H_z] vs (e beta / 2m) Sigma x B
  double pryce_leading = 0;    // (1/2i)[beta Sigma, H_z] vs (e / 2m) Sigma x B
  double pryce_full = 0;       // (1/i)[S_Py, H_z] vs the two candidate Zeeman terms
};

ZeemanFixedMomentum zeeman_fixed_momentum(const Vector3d& p, const Vector3d& b,
                                          const PhysParamsd& params);

/// Grid form of the Zeeman sub-identity: max over states and components of
/// |(1/i)[Sigma_i/2, H_zeeman] psi - (e beta / 2m)(Sigma x B)_i psi| / |psi|.
double zeeman_leading_residual(const FieldModel& model, const PhysParamsd& params,
                               const std::vector<SpinorField>& states, double t = 0.0);

std::string report_to_json(const ResidualReport& r, int indent = 2);
std::string report_table(const ResidualReport& r);

}  // namespace relspin
