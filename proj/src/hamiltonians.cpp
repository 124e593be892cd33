#include "relspin/hamiltonians.hpp"

#include <algorithm>

#include "relspin/errors.hpp"
#include "relspin/expr_library.hpp"

namespace relspin {

using namespace ops;

std::string_view to_string(HamiltonianId id) {
  switch (id) {
    case HamiltonianId::Free:
      return "free";
    case HamiltonianId::DiracEM:
      return "dirac-em";
    case HamiltonianId::FWFull:
      return "fw-full";
    case HamiltonianId::FWDirect:
      return "fw-direct";
  }
  return "?";
}

HamiltonianId hamiltonian_id_from_string(std::string_view s) {
  if (s == "free") return HamiltonianId::Free;
  if (s == "dirac-em") return HamiltonianId::DiracEM;
  if (s == "fw-full") return HamiltonianId::FWFull;
  if (s == "fw-direct") return HamiltonianId::FWDirect;
  throw PreconditionError("unknown hamiltonian '" + std::string(s) + "'");
}

const Expr& NamedHamiltonian::term(std::string_view name) const {
  for (const auto& [n, e] : terms)
    if (n == name) return e;
  throw PreconditionError("hamiltonian " + std::string(to_string(id)) + " has no term '" +
                          std::string(name) + "'");
}

bool NamedHamiltonian::has_term(std::string_view name) const {
  return std::any_of(terms.begin(), terms.end(), [&](const auto& t) { return t.first == name; });
}

std::vector<std::string> NamedHamiltonian::term_names() const {
  std::vector<std::string> out;
  for (const auto& t : terms) out.push_back(t.first);
  return out;
}

const std::vector<std::string>& term_vocabulary(HamiltonianId id) {
  static const std::vector<std::string> free{"kinetic-free", "mass"};
  static const std::vector<std::string> em{"kinetic-free", "gauge-coupling", "mass", "scalar"};
  static const std::vector<std::string> full{
      "rest-mass", "kinetic", "zeeman",  "mass-correction", "kinetic-zeeman-cross",
      "B2-const",  "darwin",  "spin-orbit", "dEdt-term"};
  static const std::vector<std::string> direct{"kinetic", "zeeman", "soc", "nutation"};
  switch (id) {
    case HamiltonianId::Free:
      return free;
    case HamiltonianId::DiracEM:
      return em;
    case HamiltonianId::FWFull:
      return full;
    case HamiltonianId::FWDirect:
      return direct;
  }
  return free;
}

std::vector<std::string> default_terms(HamiltonianId id) {
  std::vector<std::string> out = term_vocabulary(id);
  if (id == HamiltonianId::FWFull) out.erase(out.begin());
  return out;
}

namespace {

std::vector<std::string> resolve_mask(HamiltonianId id, const std::vector<std::string>& mask) {
  if (mask.empty()) return default_terms(id);
  const auto& vocab = term_vocabulary(id);
  for (const auto& m : mask) {
    if (std::find(vocab.begin(), vocab.end(), m) == vocab.end())
      throw PreconditionError("unknown term '" + m + "' for hamiltonian " +
                              std::string(to_string(id)));
  }
  return mask;
}

bool selected(const std::vector<std::string>& mask, const std::string& name) {
  return std::find(mask.begin(), mask.end(), name) != mask.end();
}

void finish(NamedHamiltonian& h) {
  Expr total;
  for (const auto& t : h.terms) total = total + t.second;
  h.total = total;
}

}  // namespace

NamedHamiltonian build_free_dirac(const PhysParamsd& params) {
  params.validate();
  NamedHamiltonian h;
  h.id = HamiltonianId::Free;
  h.terms.emplace_back("kinetic-free", params.c * dot(alpha(), momentum()));
  h.terms.emplace_back("mass", params.rest_energy() * beta());
  finish(h);
  return h;
}

NamedHamiltonian build_dirac_em(const FieldModel& model, const PhysParamsd& params) {
  params.validate();
  validate(model);
  NamedHamiltonian h;
  h.id = HamiltonianId::DiracEM;
  const double c = params.c, e = params.e;
  h.terms.emplace_back("kinetic-free", c * dot(alpha(), momentum()));
  h.terms.emplace_back("gauge-coupling", (-e * c) * dot(alpha(), field(model, FieldQuantity::A)));
  h.terms.emplace_back("mass", params.rest_energy() * beta());
  h.terms.emplace_back("scalar", e * scalar_potential(model));
  finish(h);
  return h;
}

NamedHamiltonian build_fw_full(const FieldModel& model, const PhysParamsd& params,
                               const std::vector<std::string>& term_mask) {
  params.validate();
  validate(model);
  const auto mask = resolve_mask(HamiltonianId::FWFull, term_mask);
  const double m = params.m0, c = params.c, e = params.e;
  const double m3c2 = m * m * m * c * c;
  const double m2c2 = m * m * c * c;
  const VecExpr pi = kinetic_momentum(model, params);
  const Expr pi2 = dot(pi, pi);
  const VecExpr bf = field(model, FieldQuantity::B);
  const VecExpr ef = field(model, FieldQuantity::E);
  const VecExpr dedt = field(model, FieldQuantity::dEdt);
  const Expr sigma_b = dot(sigma(), bf);

  NamedHamiltonian h;
  h.id = HamiltonianId::FWFull;
  auto add = [&](const std::string& name, auto make) {
    if (selected(mask, name)) h.terms.emplace_back(name, make());
  };
  add("rest-mass", [&] { return params.rest_energy() * beta(); });
  add("kinetic", [&] { return (1.0 / (2.0 * m)) * (beta() * pi2); });
  add("zeeman", [&] { return (-e / (2.0 * m)) * (beta() * sigma_b); });
  add("mass-correction", [&] { return (-1.0 / (8.0 * m3c2)) * (beta() * (pi2 * pi2)); });
  add("kinetic-zeeman-cross",
      [&] { return (e / (8.0 * m3c2)) * (beta() * anticommutator(pi2, sigma_b)); });
  add("B2-const", [&] { return (-e * e / (8.0 * m3c2)) * (beta() * dot(bf, bf)); });
  add("darwin", [&] { return (-e / (8.0 * m2c2)) * div_e(model); });
  add("spin-orbit", [&] {
    return (e / (8.0 * m2c2)) * dot(sigma(), cross(pi, ef) - cross(ef, pi));
  });
  add("dEdt-term", [&] {
    return cdouble(0, -e / (16.0 * m3c2 * c * c)) *
           (beta() * dot(sigma(), cross(pi, dedt) + cross(dedt, pi)));
  });
  finish(h);
  return h;
}

NamedHamiltonian build_fw_direct(const FieldModel& model, const PhysParamsd& params,
                                 bool hermitize, const std::vector<std::string>& term_mask) {
  params.validate();
  validate(model);
  const auto mask = resolve_mask(HamiltonianId::FWDirect, term_mask);
  const double m = params.m0, c = params.c, e = params.e;
  const VecExpr pi = kinetic_momentum(model, params);
  const VecExpr bf = field(model, FieldQuantity::B);
  const VecExpr ef = field(model, FieldQuantity::E);
  const VecExpr db = field(model, FieldQuantity::dBdt);
  const VecExpr d2b = field(model, FieldQuantity::d2Bdt2);

  NamedHamiltonian h;
  h.id = HamiltonianId::FWDirect;
  h.hermitized = hermitize;
  auto add = [&](const std::string& name, auto make) {
    if (!selected(mask, name)) return;
    Expr t = make();
    h.terms.emplace_back(name, hermitize ? hermitian_part(t) : t);
  };
  add("kinetic", [&] { return (1.0 / (2.0 * m)) * (beta() * dot(pi, pi)); });
  add("zeeman", [&] { return (-e / (2.0 * m)) * (beta() * dot(sigma(), bf)); });
  add("soc", [&] {
    const VecExpr inner = 2.0 * cross(ef, pi) - cdouble(0, 1) * db;
    return (-e / (8.0 * m * m * c * c)) * dot(sigma(), inner);
  });
  add("nutation", [&] {
    return (e / (16.0 * m * m * m * c * c * c * c)) * (beta() * dot(sigma(), d2b));
  });
  finish(h);
  return h;
}

NamedHamiltonian build_hamiltonian(HamiltonianId id, const FieldModel& model,
                                   const PhysParamsd& params, bool hermitize,
                                   const std::vector<std::string>& term_mask) {
  switch (id) {
    case HamiltonianId::Free:
      return build_free_dirac(params);
    case HamiltonianId::DiracEM:
      return build_dirac_em(model, params);
    case HamiltonianId::FWFull:
      return build_fw_full(model, params, term_mask);
    case HamiltonianId::FWDirect:
      return build_fw_direct(model, params, hermitize, term_mask);
  }
  throw PreconditionError("unknown hamiltonian");
}

}  // namespace relspin
