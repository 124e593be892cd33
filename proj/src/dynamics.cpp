#include "relspin/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "relspin/errors.hpp"
#include "relspin/expr_library.hpp"

namespace relspin {

namespace {

using ops::FieldQuantity;
const cdouble I(0.0, 1.0);

// Scalar operator on the left / right of every component, in the order given.
VecExpr left(const Expr& s, const VecExpr& v) { return s * v; }
VecExpr right(const VecExpr& v, const Expr& s) { return v * s; }

struct Blocks {
  Expr one, beta;
  VecExpr alpha, sigma, P, R;
};

Blocks blocks() {
  return {ops::one(), ops::beta(), ops::alpha(), ops::sigma(), ops::momentum(), ops::position()};
}

void add(CandidateEquation& eq, std::string name, std::string source, VecExpr v) {
  eq.terms.push_back({std::move(name), std::move(source), std::move(v)});
}

// (e c / 2) [(a.R)(B.P)P_i - (a.B)(R.P)P_i] without the prefactor; order kept.
VecExpr r_b_p_fw(const Blocks& b, const VecExpr& B) {
  const Expr aR = dot(b.alpha, b.R), BP = dot(B, b.P), aB = dot(b.alpha, B), RP = dot(b.R, b.P);
  return left(aR * BP, b.P) - left(aB * RP, b.P);
}

VecExpr r_b_p_pryce(const Blocks& b, const VecExpr& B) {
  const Expr aR = dot(b.alpha, b.R), BP = dot(B, b.P), aB = dot(b.alpha, B), RP = dot(b.R, b.P);
  return left(aR * BP, b.P) - left(RP * aB, b.P);
}

CandidateEquation fw_em(const FieldModel& model, const PhysParamsd& p) {
  const Blocks b = blocks();
  const double c = p.c, e = p.e;
  const VecExpr B = ops::field(model, FieldQuantity::B);
  const VecExpr Pi = ops::kinetic_momentum(model, p);
  const Expr invE = ops::inv_energy(p), invEEm = ops::inv_energy_sum(p);
  CandidateEquation eq;
  add(eq, "alpha-cross-pi", "all", -c * cross(b.alpha, Pi));
  add(eq, "beta-p-cross-pi", "all", c * left(invE * b.beta, cross(b.P, Pi)));
  add(eq, "p2-alpha-cross-pi", "all", c * left(invEEm * dot(b.P, b.P), cross(b.alpha, Pi)));
  add(eq, "r-b-p", "all", (c * e / 2) * left(invEEm, r_b_p_fw(b, B)));
  const VecExpr BxP = cross(B, b.P), Pxa = cross(b.P, b.alpha);
  VecExpr bracket;
  const Expr sa_bxp = dot(b.alpha, BxP);
  const Expr s_dot_a = dot(b.sigma, b.alpha), s_dot_pxa = dot(b.sigma, Pxa), s_dot_b = dot(b.sigma, B);
  for (int i = 0; i < 3; ++i)
    bracket[i] = b.sigma[i] * sa_bxp + s_dot_a * BxP[i] - s_dot_pxa * B[i] - s_dot_b * Pxa[i];
  add(eq, "sigma-alpha-b-p", "all", (c * e / 4) * left(invEEm, bracket));
  return eq;
}

CandidateEquation pryce_em(const FieldModel& model, const PhysParamsd& p) {
  const Blocks b = blocks();
  const double c = p.c, e = p.e;
  const VecExpr B = ops::field(model, FieldQuantity::B);
  const Expr invp2 = ops::inv_p2();
  CandidateEquation eq;
  add(eq, "sigma-cross-b-alpha-p", "all",
      (e * c / 4) * left(invp2, right(cross(b.sigma, B), dot(b.alpha, b.P))));
  add(eq, "r-b-p", "all", (e * c / 2) * left(invp2, r_b_p_pryce(b, B)));
  return eq;
}

CandidateEquation fw_direct(const FieldModel& model, const PhysParamsd& p) {
  const Blocks b = blocks();
  const double m = p.m0, c = p.c, e = p.e;
  const VecExpr B = ops::field(model, FieldQuantity::B);
  const VecExpr E = ops::field(model, FieldQuantity::E);
  const VecExpr dB = ops::field(model, FieldQuantity::dBdt);
  const VecExpr d2B = ops::field(model, FieldQuantity::d2Bdt2);
  const Expr invE = ops::inv_energy(p), invEEm = ops::inv_energy_sum(p);
  const VecExpr L = cross(b.R, b.P);
  const VecExpr Pxa = cross(b.P, b.alpha);
  const Expr sa = dot(b.sigma, b.alpha);
  auto projector = [&](const VecExpr& v) { return cross(b.P, cross(v, b.P)); };
  CandidateEquation eq;

  add(eq, "precession", "zeeman", (e / (2 * m)) * left(b.beta, cross(b.sigma, B)));
  add(eq, "orbital", "kinetic",
      (1.0 / (2 * m)) * left(invE, right(Pxa, dot(b.P, b.P) - e * dot(B, L))));
  add(eq, "sigma-alpha", "zeeman", (e / (6 * m)) * left(invE * sa, cross(B, b.P)));
  add(eq, "zeeman-projector", "zeeman",
      (-e / (4 * m)) * left(b.beta * invEEm, projector(cross(b.sigma, B))));

  const double ks = e / (4 * m * m * c * c);
  const VecExpr ExP = cross(E, b.P);
  add(eq, "soc-efield", "soc", ks * cross(b.sigma, ExP));
  add(eq, "soc-efield-offdiag", "soc", (ks * I) * left(invE, cross(Pxa, ExP)));
  add(eq, "soc-efield-projector", "soc", -ks * left(invEEm, projector(cross(b.sigma, ExP))));

  const cdouble kd = -I * e / (8 * m * m * c * c);
  add(eq, "soc-dbdt", "soc", kd * cross(b.sigma, dB));
  add(eq, "soc-dbdt-offdiag", "soc", (kd * I) * left(invE, cross(Pxa, dB)));
  add(eq, "soc-dbdt-alpha", "soc", (-0.5 * kd) * left(invE, cross(b.alpha, cross(dB, cross(b.sigma, b.P)))));
  add(eq, "soc-dbdt-projector", "soc", kd * left(invEEm, projector(cross(b.sigma, dB))));

  const double kn = -e / (16 * m * m * m * c * c * c * c);
  add(eq, "nutation-precession", "nutation", kn * left(b.beta, cross(b.sigma, d2B)));
  add(eq, "nutation-sigma-alpha", "nutation", (kn / 3) * left(invE * sa, cross(d2B, b.P)));
  add(eq, "nutation-projector", "nutation",
      kn * left(b.beta * invEEm, projector(cross(b.sigma, d2B))));
  return eq;
}

CandidateEquation pryce_direct(const FieldModel& model, const PhysParamsd& p) {
  const Blocks b = blocks();
  const double m = p.m0, c = p.c, e = p.e;
  const VecExpr B = ops::field(model, FieldQuantity::B);
  const VecExpr E = ops::field(model, FieldQuantity::E);
  const VecExpr dB = ops::field(model, FieldQuantity::dBdt);
  const VecExpr d2B = ops::field(model, FieldQuantity::d2Bdt2);
  const Expr invp2 = ops::inv_p2();
  const Expr bb = b.beta * (b.one - b.beta);  // beta(1 - beta)
  const VecExpr L = cross(b.R, b.P);
  CandidateEquation eq;

  add(eq, "precession", "zeeman", (e / (2 * m)) * cross(b.sigma, B));
  add(eq, "projector-zeeman", "zeeman",
      (e / (4 * m)) * left(bb * invp2, cross(b.sigma, cross(b.P, cross(B, b.P)))));

  const double ks = e / (4 * m * m * c * c);
  add(eq, "soc-efield", "soc", ks * left(b.beta, cross(b.sigma, cross(E, b.P))));
  {
    const Expr sp = dot(b.sigma, b.P), s2 = dot(b.sigma, b.sigma);
    const Expr sdb = dot(b.sigma, dB), ldb = dot(L, dB), dbp = dot(dB, b.P);
    VecExpr br;
    for (int i = 0; i < 3; ++i)
      br[i] = sp * sdb * b.P[i] - sp * ldb * b.P[i] - 0.5 * ((s2 * b.P[i] + sp * b.sigma[i]) * dbp);
    add(eq, "soc-dbdt-projector", "soc",
        (e / (8 * m * m * c * c)) * left((b.one - b.beta) * invp2, br));
  }
  const cdouble kd = -I * e / (8 * m * m * c * c);
  add(eq, "soc-dbdt-precession", "soc", kd * left(b.beta, cross(b.sigma, dB)));
  add(eq, "soc-dbdt-longitudinal", "soc",
      kd * left(b.beta * bb * invp2 * dot(cross(b.sigma, dB), b.P), b.P));

  const double kn = -e / (16 * m * m * m * c * c * c * c);
  add(eq, "nutation-precession", "nutation", kn * cross(b.sigma, d2B));
  add(eq, "nutation-longitudinal", "nutation",
      kn * left(bb * invp2 * dot(cross(b.sigma, d2B), b.P), b.P));
  return eq;
}

VecExpr zero_vec() { return {Expr(), Expr(), Expr()}; }

}  // namespace

VecExpr CandidateEquation::total() const {
  VecExpr out = zero_vec();
  for (const auto& t : terms) out = out + t.expr;
  return out;
}

VecExpr CandidateEquation::group(const std::string& source) const {
  VecExpr out = zero_vec();
  for (const auto& t : terms)
    if (t.source == source) out = out + t.expr;
  return out;
}

std::vector<std::string> CandidateEquation::sources() const {
  std::vector<std::string> out;
  for (const auto& t : terms)
    if (std::find(out.begin(), out.end(), t.source) == out.end()) out.push_back(t.source);
  return out;
}

VecExpr spin_expr(SpinKind kind, const PhysParamsd& params) { return ops::spin(kind, params); }

bool has_candidate_equation(SpinKind kind, HamiltonianId ham) {
  switch (ham) {
    case HamiltonianId::Free: return true;
    case HamiltonianId::DiracEM:
    case HamiltonianId::FWDirect: return kind != SpinKind::Dirac;
    case HamiltonianId::FWFull: return false;
  }
  return false;
}

std::string equation_id(SpinKind kind, HamiltonianId ham) {
  std::string family = ham == HamiltonianId::Free      ? "free"
                       : ham == HamiltonianId::DiracEM ? "em"
                       : ham == HamiltonianId::FWDirect ? "direct"
                                                        : "fw-full";
  return std::string(to_string(kind)) + "-" + family;
}

CandidateEquation rhs(SpinKind kind, HamiltonianId ham, const FieldModel& model,
                    const PhysParamsd& params) {
  params.validate();
  if (!has_candidate_equation(kind, ham))
    throw PreconditionError("rhs: no candidate equation of motion for spin kind '" +
                            std::string(to_string(kind)) + "' with Hamiltonian '" +
                            std::string(to_string(ham)) + "'");
  if (ham != HamiltonianId::Free && !is_zero(model) && !is_uniform_b(model))
    throw PreconditionError("rhs: the candidate equations assume a uniform B field in the gauge "
                            "A = B x r / 2; got " + describe(model));
  CandidateEquation eq;
  switch (ham) {
    case HamiltonianId::Free:
      if (kind == SpinKind::Dirac) {
        const Blocks b = blocks();
        add(eq, "alpha-cross-p", "all", -params.c * cross(b.alpha, b.P));
      }
      break;
    case HamiltonianId::DiracEM:
      eq = kind == SpinKind::FW ? fw_em(model, params) : pryce_em(model, params);
      break;
    case HamiltonianId::FWDirect:
      eq = kind == SpinKind::FW ? fw_direct(model, params) : pryce_direct(model, params);
      break;
    case HamiltonianId::FWFull: break;
  }
  eq.id = equation_id(kind, ham);
  eq.kind = kind;
  eq.hamiltonian = ham;
  return eq;
}

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::Holds: return "identity holds";
    case Classification::Converging: return "converging";
    case Classification::NonConverging: return "non-converging mismatch";
  }
  return "?";
}

Classification classify(const std::vector<double>& ladder, const ClassificationThresholds& th) {
  if (ladder.empty()) throw PreconditionError("classify: empty residual ladder");
  for (double r : ladder)
    if (!std::isfinite(r)) return Classification::NonConverging;
  if (std::all_of(ladder.begin(), ladder.end(), [&](double r) { return r <= th.holds; }))
    return Classification::Holds;
  if (ladder.size() == 1)
    return ladder[0] <= th.converging_single ? Classification::Converging
                                             : Classification::NonConverging;
  for (std::size_t i = 1; i < ladder.size(); ++i)
    if (ladder[i] > ladder[i - 1] && ladder[i] > th.roundoff_floor) return Classification::NonConverging;
  const double first = ladder.front(), last = ladder.back();
  if (last <= th.converging_final && last <= th.converging_ratio * first)
    return Classification::Converging;
  return Classification::NonConverging;
}

std::vector<StateInfo> standard_battery(int dim, double width, std::uint64_t seed) {
  if (dim != 1 && dim != 3) throw PreconditionError("standard_battery: dim must be 1 or 3");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Spinor4d random_pol;
  for (int i = 0; i < 4; ++i) random_pol(i) = cdouble(nd(rng), nd(rng));
  random_pol.normalize();
  Spinor4d up = Spinor4d::Zero();
  up(0) = 1.0;

  // Multiples of 2 pi / 48: on the lattice of every grid whose length is a
  // multiple of 48, so the packets stay periodic on the refinement ladder.
  const double q = 2.0 * 3.14159265358979323846 / 48.0;
  std::vector<Vector3d> momenta;
  if (dim == 3)
    momenta = {q * Vector3d(0, 0, 8), q * Vector3d(6, -5, 4), q * Vector3d(-5, 4, -7)};
  else
    momenta = {q * Vector3d(8, 0, 0), q * Vector3d(9, 0, 0), q * Vector3d(-10, 0, 0)};

  std::vector<StateInfo> out;
  const std::pair<const char*, Spinor4d> pols[] = {{"up", up}, {"random", random_pol}};
  for (const auto& [pname, pol] : pols)
    for (std::size_t j = 0; j < momenta.size(); ++j) {
      StateInfo s;
      s.id = std::string(pname) + "-k" + std::to_string(j);
      s.spec.center = Vector3d::Zero();
      s.spec.width = width;
      s.spec.momentum = momenta[j];
      s.spec.polarization = pol;
      out.push_back(s);
    }
  return out;
}

double GroupResult::max_residual() const { return *std::max_element(residual.begin(), residual.end()); }

namespace {

// Three field strengths for the linearization: lambda = 0, +1, -1.
struct Lin {
  SpinorField f[3];
  bool linear_only = false;  // lambda = +-1 skipped (no field)
  SpinorField value() const {
    if (linear_only) return f[0];
    SpinorField out = f[1];
    out -= f[2];
    out *= 0.5;
    out += f[0];
    return out;
  }
  SpinorField order1() const {
    if (linear_only) return SpinorField(f[0].grid(), f[0].space());
    SpinorField out = f[1];
    out -= f[2];
    out *= 0.5;
    return out;
  }
};

SpinorField zeros_like(const SpinorField& f) { return SpinorField(f.grid(), f.space()); }

SpinorField apply_or_zero(const Expr& e, const SpinorField& psi, double t, const ApplyOptions& o) {
  if (e.is_zero()) return zeros_like(psi);
  SpinorField out = apply(e, psi, t, o);
  transform_in_place(out, psi.space());
  return out;
}

// Free limit of the (masked) Hamiltonian.
NamedHamiltonian reference_hamiltonian(HamiltonianId ham, const PhysParamsd& p,
                                       const std::vector<std::string>& mask) {
  if (ham == HamiltonianId::FWDirect) {
    NamedHamiltonian h;
    h.id = ham;
    if (!mask.empty() && std::find(mask.begin(), mask.end(), "kinetic") == mask.end()) return h;
    const VecExpr P = ops::momentum();
    h.total = (1.0 / (2 * p.m0)) * (ops::beta() * dot(P, P));
    h.terms = {{"kinetic", h.total}};
    return h;
  }
  return build_free_dirac(p);
}

const double kEtaFloor = 1e-6;

}  // namespace

namespace {

// Classification from the refinement tables; verdict and offending term from
// the "all"/"total" group.
void finalize(ResidualReport& rep, const ClassificationThresholds& th) {
  std::size_t decisive = 0;
  for (std::size_t g = 0; g < rep.groups.size(); ++g) {
    auto& gr = rep.groups[g];
    std::vector<double> ladder;
    for (const auto& row : gr.refinement) ladder.push_back(row.residual);
    gr.classification = classify(ladder, th);
    if (gr.source == "all" || gr.source == "total") decisive = g;
  }
  for (auto& term : rep.terms)
    for (const auto& gr : rep.groups)
      if (gr.source == term.source) term.classification = gr.classification;
  rep.verdict = rep.groups[decisive].classification;
  rep.offending_term.clear();
  if (rep.verdict != Classification::NonConverging) return;
  const auto& ex = rep.mismatch_explanation;
  double score = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ex.size() && k < rep.terms.size(); ++k)
    if (ex[k] < score) score = ex[k], rep.offending_term = rep.terms[k].name;
  if (rep.offending_term.empty()) rep.offending_term = "(missing term: candidate right-hand side is zero)";
}

}  // namespace

ResidualReport verify(SpinKind kind, HamiltonianId ham, const FieldModel& model,
                      const PhysParamsd& params, const std::vector<StateInfo>& states,
                      const GridSpec& grid, const VerifyOptions& opts) {
  if (states.empty()) throw PreconditionError("verify: empty state list");
  const bool field_on = ham != HamiltonianId::Free && !is_zero(model);
  const int nl = field_on ? 3 : 1;
  const double lambdas[3] = {0.0, 1.0, -1.0};

  // Hamiltonians and candidate right-hand sides at lambda = 0, 1, -1.
  std::vector<NamedHamiltonian> H;
  std::vector<CandidateEquation> R;
  for (int l = 0; l < nl; ++l) {
    const FieldModel m = scaled(model, lambdas[l]);
    H.push_back(build_hamiltonian(ham, m, params, false, opts.term_mask));
    R.push_back(rhs(kind, ham, m, params));
  }
  const NamedHamiltonian Href = reference_hamiltonian(ham, params, opts.term_mask);
  const VecExpr S = spin_expr(kind, params);
  const double t = opts.t;

  // Per-source groups are diagnostics; "total" (or "all") decides the verdict.
  std::vector<std::string> groups;
  if (ham == HamiltonianId::FWDirect) {
    groups = H[0].term_names();
    groups.push_back("total");
  } else {
    groups = {"all"};
  }
  auto hterm = [&](int l, const std::string& g) -> const Expr& {
    return g == "all" || g == "total" ? H[l].total : H[l].term(g);
  };
  auto in_group = [](const std::string& source, const std::string& g) {
    return g == "total" || source == g;
  };

  ResidualReport rep;
  rep.equation = equation_id(kind, ham);
  rep.kind = kind;
  rep.hamiltonian = ham;
  rep.field = describe(model);
  rep.params = params;
  rep.t = t;
  rep.grid = grid;
  rep.states = states;
  for (const auto& g : groups) {
    rep.groups.emplace_back();
    rep.groups.back().source = g;
  }
  for (const auto& term : R[0].terms)
    if (term.source == "all" || std::find(groups.begin(), groups.end(), term.source) != groups.end())
      {
      rep.terms.emplace_back();
      rep.terms.back().name = term.name;
      rep.terms.back().source = term.source;
    }

  std::vector<double> worst_cell(groups.size(), -1.0);
  std::vector<std::vector<double>> explain(groups.size());

  for (const auto& st : states) {
    SpinorField psi = gaussian_packet(grid, st.spec, params);
    ApplyOptions ao = opts.apply;
    if (std::isfinite(ao.zero_mode_guard)) {
      const double w = zero_mode_weight(psi);
      if (w > ao.zero_mode_guard && kind != SpinKind::Dirac)
      {
        std::ostringstream os;
        os << "verify: state '" << st.id << "' has zero-mode weight " << std::scientific
           << std::setprecision(3) << w << " > guard " << ao.zero_mode_guard
           << " (the Pryce and FW operators are singular or non-analytic at k = 0)";
        throw SingularMomentumError(os.str());
      }
      ao.zero_mode_guard = std::numeric_limits<double>::infinity();
    }
    const double psi_norm = norm(psi);
    const double eps = opts.eps_rel * psi_norm;

    std::array<SpinorField, 3> S_psi;
    for (int i = 0; i < 3; ++i) S_psi[i] = apply_or_zero(S[i], psi, t, ao);

    std::array<SpinorField, 3> full_L, full_R, zero_L, zero_R;
    for (int i = 0; i < 3; ++i) {
      full_L[i] = zeros_like(psi);
      full_R[i] = zeros_like(psi);
      zero_L[i] = zeros_like(psi);
      zero_R[i] = zeros_like(psi);
    }

    for (std::size_t g = 0; g < groups.size(); ++g) {
      GroupResult& gr = rep.groups[g];
      std::vector<SpinorField> Hpsi(nl);
      for (int l = 0; l < nl; ++l) Hpsi[l] = apply_or_zero(hterm(l, groups[g]), psi, t, ao);

      for (int i = 0; i < 3; ++i) {
        Lin a, b_, lhs, rhs_sum;
        a.linear_only = b_.linear_only = lhs.linear_only = rhs_sum.linear_only = !field_on;
        for (int l = 0; l < nl; ++l) {
          a.f[l] = apply_or_zero(S[i], Hpsi[l], t, ao);
          b_.f[l] = apply_or_zero(hterm(l, groups[g]), S_psi[i], t, ao);
          lhs.f[l] = a.f[l];
          lhs.f[l] -= b_.f[l];
          lhs.f[l] *= -I;
          rhs_sum.f[l] = zeros_like(psi);
        }
        // candidate terms of this group, one at a time
        std::vector<Lin> term_fields;
        std::vector<std::size_t> term_index;
        for (std::size_t k = 0; k < rep.terms.size(); ++k) {
          if (!in_group(rep.terms[k].source, groups[g])) continue;
          const auto& name = rep.terms[k].name;
          Lin tf;
          tf.linear_only = !field_on;
          for (int l = 0; l < nl; ++l) {
            const auto it = std::find_if(R[l].terms.begin(), R[l].terms.end(),
                                         [&](const CandidateTerm& pt) { return pt.name == name; });
            tf.f[l] = apply_or_zero(it->expr[i], psi, t, ao);
            rhs_sum.f[l] += tf.f[l];
          }
          const SpinorField v = tf.value();
          rep.terms[k].contribution[i] = std::max(rep.terms[k].contribution[i], norm(v));
          term_fields.push_back(std::move(tf));
          term_index.push_back(k);
        }

        const SpinorField L = lhs.value(), Rv = rhs_sum.value();
        SpinorField D = L;
        D -= Rv;
        const double eta = norm(a.value()) + norm(b_.value());
        const double floor = std::max(eps, kEtaFloor * eta);
        const double nL = norm(L);
        const double res = norm(D) / std::max(nL, floor);
        gr.residual[i] = std::max(gr.residual[i], res);
        gr.lhs_norm[i] = std::max(gr.lhs_norm[i], nL);

        SpinorField d0 = lhs.f[0];
        d0 -= rhs_sum.f[0];
        const double eta0 = norm(a.f[0]) + norm(b_.f[0]);
        gr.order0 = std::max(gr.order0, norm(d0) / std::max({norm(lhs.f[0]), eps, kEtaFloor * eta0}));
        if (field_on) {
          SpinorField d1 = lhs.order1();
          d1 -= rhs_sum.order1();
          const double eta1 = norm(a.order1()) + norm(b_.order1());
          gr.order1 = std::max(gr.order1,
                               norm(d1) / std::max({norm(lhs.order1()), eps, kEtaFloor * eta1}));
        }

        // Which candidate term best accounts for the mismatch: dropping it, or flipping its sign.
        if (res > worst_cell[g]) {
          worst_cell[g] = res;
          explain[g].assign(rep.terms.size(), std::numeric_limits<double>::infinity());
          const double nD = std::max(norm(D), eps);
          for (std::size_t q = 0; q < term_fields.size(); ++q) {
            const SpinorField T = term_fields[q].value();
            SpinorField d1 = D;
            d1 += T;
            SpinorField d2 = d1;
            d2 += T;
            explain[g][term_index[q]] = std::min(norm(d1), norm(d2)) / nD;
          }
        }

        if (groups[g] == "all" || groups[g] == "total") {
          zero_L[i] = lhs.f[0];
          zero_R[i] = rhs_sum.f[0];
          full_L[i] = lhs.f[field_on ? 1 : 0];
          full_R[i] = rhs_sum.f[field_on ? 1 : 0];
        }
      }
    }

    for (int i = 0; i < 3; ++i) {
      SpinorField ref = apply_or_zero(-I * commutator(S[i], Href.total), psi, t, ao);
      SpinorField d = zero_L[i];
      d -= ref;
      rep.zero_field_lhs = std::max(rep.zero_field_lhs, norm(d) / std::max(norm(ref), psi_norm));
      SpinorField dr = zero_R[i];
      dr -= ref;
      rep.zero_field_rhs = std::max(rep.zero_field_rhs, norm(dr) / std::max(norm(ref), psi_norm));
      SpinorField df = full_L[i];
      df -= full_R[i];
      rep.full_field_residual =
          std::max(rep.full_field_residual, norm(df) / std::max(norm(full_L[i]), std::max(eps, kEtaFloor * psi_norm)));
    }
  }

  for (auto& gr : rep.groups) gr.refinement = {{grid.n(), grid.length(0), gr.max_residual()}};
  for (std::size_t g = 0; g < groups.size(); ++g)
    if (groups[g] == "all" || groups[g] == "total") rep.mismatch_explanation = explain[g];
  finalize(rep, opts.thresholds);
  return rep;
}

ResidualReport verify_refined(SpinKind kind, HamiltonianId ham, const FieldModel& model,
                              const PhysParamsd& params, const std::vector<StateInfo>& states,
                              const std::vector<GridSpec>& ladder, const VerifyOptions& opts) {
  if (ladder.empty()) throw PreconditionError("verify_refined: empty grid ladder");
  std::vector<ResidualReport> reps;
  for (const auto& g : ladder) reps.push_back(verify(kind, ham, model, params, states, g, opts));
  ResidualReport out = reps.back();
  for (std::size_t g = 0; g < out.groups.size(); ++g) {
    out.groups[g].refinement.clear();
    for (std::size_t l = 0; l < reps.size(); ++l)
      out.groups[g].refinement.push_back(
          {ladder[l].n(), ladder[l].length(0), reps[l].groups[g].max_residual()});
  }
  finalize(out, opts.thresholds);
  return out;
}

double total_j_identity(SpinKind kind, const std::vector<SpinorField>& states,
                        const PhysParamsd& params, const ApplyOptions& opts) {
  const VecExpr R = ops::position(), P = ops::momentum();
  const VecExpr Rk = R + ops::position_correction(kind, params);
  const VecExpr J = cross(Rk, P) + spin_expr(kind, params);
  const VecExpr Jref = cross(R, P) + 0.5 * ops::sigma();
  double worst = 0.0;
  for (const auto& psi : states) {
    for (int i = 0; i < 3; ++i) {
      SpinorField a = apply_or_zero(J[i], psi, 0.0, opts);
      a -= apply_or_zero(Jref[i], psi, 0.0, opts);
      worst = std::max(worst, norm(a) / norm(psi));
    }
  }
  return worst;
}

double canonical_commutator_residual(const SpinorField& state) {
  const Expr x = ops::position()[0], k = ops::momentum()[0];
  SpinorField out = apply_or_zero(commutator(x, k), state, 0.0, {});
  SpinorField ref = state;
  ref *= I;
  out -= ref;
  return norm(out) / norm(state);
}

std::string_view to_string(Parity p) {
  switch (p) {
    case Parity::Zero: return "zero";
    case Parity::Even: return "block-diagonal";
    case Parity::Odd: return "block-off-diagonal";
    case Parity::Mixed: return "mixed";
  }
  return "?";
}

namespace {

Parity combine_product(Parity a, Parity b) {
  if (a == Parity::Zero || b == Parity::Zero) return Parity::Zero;
  if (a == Parity::Mixed || b == Parity::Mixed) return Parity::Mixed;
  return a == b ? Parity::Even : Parity::Odd;
}

Parity combine_sum(Parity a, Parity b) {
  if (a == Parity::Zero) return b;
  if (b == Parity::Zero) return a;
  return a == b ? a : Parity::Mixed;
}

struct ParityWalker {
  std::mt19937_64 rng;
  int samples;
  double tol = 1e-12;
  double impurity = 0.0;

  ParityResult leaf(const ExprNode& n) {
    std::uniform_real_distribution<double> ur(-5.0, 5.0), ut(0.0, 2.0), uk(0.3, 3.0);
    std::normal_distribution<double> nd;
    bool even = true, odd = true, any = false;
    double worst_even = 0, worst_odd = 0;
    const int count = n.kind == Expr::Kind::Constant ? 1 : samples;
    for (int s = 0; s < count; ++s) {
      Matrix4d m;
      if (n.kind == Expr::Kind::Constant) {
        m = n.constant;
      } else if (n.kind == Expr::Kind::PositionDiag) {
        m = n.position(Vector3d(ur(rng), ur(rng), ur(rng)), ut(rng));
      } else {
        Vector3d k(nd(rng), nd(rng), nd(rng));
        k *= uk(rng) / k.norm();
        m = n.eval_momentum(k);
      }
      const double total = m.norm();
      if (total == 0.0) continue;
      any = true;
      const double d = block_diagonal_part(m).norm() / total;
      const double o = block_off_diagonal_part(m).norm() / total;
      worst_even = std::max(worst_even, o);
      worst_odd = std::max(worst_odd, d);
      if (o > tol) even = false;
      if (d > tol) odd = false;
    }
    if (!any) return {Parity::Zero, 0.0};
    if (even) return {Parity::Even, worst_even};
    if (odd) return {Parity::Odd, worst_odd};
    return {Parity::Mixed, std::min(worst_even, worst_odd)};
  }

  Parity walk(const Expr& e) {
    const ExprNode& n = e.node();
    switch (n.kind) {
      case Expr::Kind::Zero: return Parity::Zero;
      case Expr::Kind::Constant:
      case Expr::Kind::PositionDiag:
      case Expr::Kind::MomentumDiag: {
        const ParityResult r = leaf(n);
        impurity = std::max(impurity, r.impurity);
        return r.parity;
      }
      case Expr::Kind::Add: {
        Parity p = Parity::Zero;
        for (const auto& c : n.children) p = combine_sum(p, walk(c));
        return p;
      }
      case Expr::Kind::Mul:
      case Expr::Kind::Commutator: {
        Parity p = Parity::Even;
        bool first = true;
        for (const auto& c : n.children) {
          const Parity q = walk(c);
          p = first ? q : combine_product(p, q);
          first = false;
        }
        return p;
      }
      case Expr::Kind::Scale:
        return n.scale == 0.0 ? Parity::Zero : walk(n.children.front());
      case Expr::Kind::Adjoint: return walk(n.resolved_adjoint);
    }
    return Parity::Mixed;
  }
};

}  // namespace

ParityResult block_parity(const Expr& e, int samples, std::uint64_t seed) {
  ParityWalker w{std::mt19937_64(seed), samples};
  const Parity p = w.walk(e);
  return {p, w.impurity};
}

ZeemanFixedMomentum zeeman_fixed_momentum(const Vector3d& p, const Vector3d& b,
                                          const PhysParamsd& params) {
  const auto& d = dirac_matrices<double>();
  const double m = params.m0, e = params.e;
  Matrix4d sdotb = Matrix4d::Zero();
  for (int j = 0; j < 3; ++j) sdotb += b(j) * d.sigma[j];
  const Matrix4d Hz = (-e / (2 * m)) * d.beta * sdotb;
  auto sxb = [&](int i) -> Matrix4d {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    return d.sigma[j] * b(k) - d.sigma[k] * b(j);
  };
  const auto spy = spin_operator(SpinKind::Pryce, p, params);
  const double p2 = p.squaredNorm();
  const Matrix4d bb = d.beta * (d.identity - d.beta);
  const Vector3d pxbxp = p.cross(b.cross(p));
  ZeemanFixedMomentum out;
  for (int i = 0; i < 3; ++i) {
    const Matrix4d fw_lhs = -I * commutator(Matrix4d(0.5 * d.sigma[i]), Hz);
    const Matrix4d fw_rhs = (e / (2 * m)) * d.beta * sxb(i);
    out.fw_leading = std::max(out.fw_leading, (fw_lhs - fw_rhs).cwiseAbs().maxCoeff());

    const Matrix4d py_lead = (-I / 2.0) * commutator(Matrix4d(d.beta * d.sigma[i]), Hz);
    const Matrix4d py_rhs_lead = (e / (2 * m)) * sxb(i);
    out.pryce_leading = std::max(out.pryce_leading, (py_lead - py_rhs_lead).cwiseAbs().maxCoeff());

    const Matrix4d py_full = -I * commutator(spy[i], Hz);
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    const Matrix4d proj = (e / (4 * m * p2)) * bb * (d.sigma[j] * pxbxp(k) - d.sigma[k] * pxbxp(j));
    out.pryce_full = std::max(out.pryce_full, (py_full - py_rhs_lead - proj).cwiseAbs().maxCoeff());
  }
  return out;
}

double zeeman_leading_residual(const FieldModel& model, const PhysParamsd& params,
                               const std::vector<SpinorField>& states, double t) {
  const NamedHamiltonian h = build_fw_direct(model, params, false, {"zeeman"});
  const VecExpr B = ops::field(model, FieldQuantity::B);
  const VecExpr target = (params.e / (2 * params.m0)) * left(ops::beta(), cross(ops::sigma(), B));
  const VecExpr half_sigma = 0.5 * ops::sigma();
  double worst = 0.0;
  for (const auto& psi : states)
    for (int i = 0; i < 3; ++i) {
      SpinorField d = apply_or_zero(-I * commutator(half_sigma[i], h.total), psi, t, {});
      d -= apply_or_zero(target[i], psi, t, {});
      worst = std::max(worst, norm(d) / norm(psi));
    }
  return worst;
}

namespace {

nlohmann::json arr3(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }

nlohmann::json vec3(const Vector3d& v) { return {v(0), v(1), v(2)}; }

std::string_view projection_name(EnergyProjection p) {
  switch (p) {
    case EnergyProjection::None: return "none";
    case EnergyProjection::Positive: return "positive";
    case EnergyProjection::Negative: return "negative";
  }
  return "?";
}

}  // namespace

std::string report_to_json(const ResidualReport& r, int indent) {
  using nlohmann::json;
  json j;
  j["schema"] = "relspin-report/1";
  j["equation"] = r.equation;
  j["spin_kind"] = std::string(to_string(r.kind));
  j["hamiltonian"] = std::string(to_string(r.hamiltonian));
  j["field"] = r.field;
  j["params"] = {{"m0", r.params.m0}, {"c", r.params.c}, {"e", r.params.e}};
  j["t"] = r.t;
  j["grid"] = {{"dim", r.grid.dim()},
               {"n", r.grid.n()},
               {"length", {r.grid.length(0), r.grid.length(1), r.grid.length(2)}}};
  j["states"] = json::array();
  for (const auto& s : r.states) {
    json pol = json::array();
    for (int i = 0; i < 4; ++i) pol.push_back({s.spec.polarization(i).real(), s.spec.polarization(i).imag()});
    j["states"].push_back({{"id", s.id},
                           {"center", vec3(s.spec.center)},
                           {"width", s.spec.width},
                           {"momentum", vec3(s.spec.momentum)},
                           {"polarization", pol},
                           {"projection", std::string(projection_name(s.spec.projection))}});
  }
  j["groups"] = json::array();
  for (const auto& g : r.groups) {
    json ref = json::array();
    for (const auto& row : g.refinement) ref.push_back({{"n", row.n}, {"length", row.length}, {"residual", row.residual}});
    j["groups"].push_back({{"source", g.source},
                           {"residual", arr3(g.residual)},
                           {"lhs_norm", arr3(g.lhs_norm)},
                           {"order0_residual", g.order0},
                           {"order1_residual", g.order1},
                           {"classification", std::string(to_string(g.classification))},
                           {"refinement", ref}});
  }
  j["terms"] = json::array();
  for (const auto& t : r.terms)
    j["terms"].push_back({{"name", t.name},
                          {"source", t.source},
                          {"contribution_norm", arr3(t.contribution)},
                          {"classification", std::string(to_string(t.classification))}});
  j["zero_field"] = {{"lhs_reduction", r.zero_field_lhs}, {"rhs_residual", r.zero_field_rhs}};
  j["full_field_residual"] = r.full_field_residual;
  j["verdict"] = std::string(to_string(r.verdict));
  j["offending_term"] = r.offending_term.empty() ? json(nullptr) : json(r.offending_term);
  return j.dump(indent);
}

std::string report_table(const ResidualReport& r) {
  std::ostringstream os;
  os << "equation " << r.equation << "  field " << r.field << "  grid " << r.grid.describe() << "\n";
  os << std::scientific << std::setprecision(3);
  os << "  " << std::left << std::setw(12) << "source" << std::setw(12) << "res_x" << std::setw(12)
     << "res_y" << std::setw(12) << "res_z" << std::setw(12) << "order0" << std::setw(12) << "order1"
     << "classification\n";
  for (const auto& g : r.groups) {
    os << "  " << std::setw(12) << g.source;
    for (double v : g.residual) os << std::setw(12) << v;
    os << std::setw(12) << g.order0 << std::setw(12) << g.order1 << to_string(g.classification) << "\n";
    if (g.refinement.size() > 1) {
      os << "    refinement:";
      for (const auto& row : g.refinement) os << "  (" << row.n << ", " << row.length << ") " << row.residual;
      os << "\n";
    }
  }
  for (const auto& t : r.terms)
    os << "    term " << std::setw(26) << t.name << std::setw(10) << t.source << " |T| "
       << *std::max_element(t.contribution.begin(), t.contribution.end()) << "\n";
  os << "  zero field: lhs reduction " << r.zero_field_lhs << ", candidate rhs residual " << r.zero_field_rhs
     << "\n  full-field residual " << r.full_field_residual << "\n  verdict: " << to_string(r.verdict);
  if (!r.offending_term.empty()) os << " (offending term: " << r.offending_term << ")";
  os << "\n";
  return os.str();
}

}  // namespace relspin
