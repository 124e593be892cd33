#pragma once

// Hamiltonians as operator expressions split into named terms.
//
// Term names (stable report vocabulary):
//   free:      kinetic-free, mass
//   dirac-em:  kinetic-free, gauge-coupling, mass, scalar
//   fw-full:   rest-mass, kinetic, zeeman, mass-correction, kinetic-zeeman-cross,
//              B2-const, darwin, spin-orbit, dEdt-term
//   fw-direct: kinetic, zeeman, soc, nutation

#include <string>
#include <utility>
#include <vector>

#include "relspin/field_models.hpp"
#include "relspin/operator_expr.hpp"
#include "relspin/spin_operators.hpp"

namespace relspin {

enum class HamiltonianId { Free, DiracEM, FWFull, FWDirect };

std::string_view to_string(HamiltonianId id);
HamiltonianId hamiltonian_id_from_string(std::string_view s);

struct NamedHamiltonian {
  HamiltonianId id = HamiltonianId::Free;
  Expr total;
  std::vector<std::pair<std::string, Expr>> terms;
  bool hermitized = false;

  /// Throws PreconditionError for an unknown name.
  const Expr& term(std::string_view name) const;
  bool has_term(std::string_view name) const;
  std::vector<std::string> term_names() const;
};

/// Known term names of a Hamiltonian, in order.
const std::vector<std::string>& term_vocabulary(HamiltonianId id);
/// Terms enabled when no mask is given.
std::vector<std::string> default_terms(HamiltonianId id);

NamedHamiltonian build_free_dirac(const PhysParamsd& params);
NamedHamiltonian build_dirac_em(const FieldModel& model, const PhysParamsd& params);
/// An empty mask selects default_terms(FWFull) (everything except rest-mass).
NamedHamiltonian build_fw_full(const FieldModel& model, const PhysParamsd& params,
                               const std::vector<std::string>& term_mask = {});
/// An empty mask selects all four terms. With `hermitize` every term T is
/// replaced by (T + T^dagger)/2.
NamedHamiltonian build_fw_direct(const FieldModel& model, const PhysParamsd& params,
                                 bool hermitize = false,
                                 const std::vector<std::string>& term_mask = {});

NamedHamiltonian build_hamiltonian(HamiltonianId id, const FieldModel& model,
                                   const PhysParamsd& params, bool hermitize = false,
                                   const std::vector<std::string>& term_mask = {});

}  // namespace relspin
