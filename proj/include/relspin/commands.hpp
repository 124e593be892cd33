#pragma once

// Subcommands behind the relspin tool. Each returns the process exit code:
// 0 pass, 1 scientific failure or aborted run, 2 usage or configuration error.
// Machine-readable output goes to `out`, human-readable tables and messages
// to `err`.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "relspin/scenario.hpp"

namespace relspin {

enum ExitCode : int { kExitPass = 0, kExitFailure = 1, kExitConfig = 2 };

struct OperatorCheckOptions {
  int samples = 1000;
  double pmax = 3.0;  // momenta uniform in the ball |p| <= pmax (units of m0 c)
  std::uint64_t seed = 1;
  double tol = 1e-12;
  double dirac_tol = 1e-10;
};

/// Conditions per kind: SU(2) algebra, spectrum {-1/2, 1/2}, commutation
/// with the free Hamiltonian. FW and Pryce must pass all three; Dirac must
/// fail the last with |[Sigma_i/2, H]|_F = 2c |p_perp,i|.
int check_operators(const OperatorCheckOptions& opts, std::ostream& out, std::ostream& err);

/// Verifier reports for every configured kind, plus the total-J identity
/// (FW, Pryce) and, for uniform B with fw-direct, the leading Zeeman match.
int verify_dynamics(const Scenario& s, bool refine, std::ostream& out, std::ostream& err);

/// Trajectory CSV.
int simulate(const Scenario& s, std::ostream& out, std::ostream& err);

/// Runs the scenario for each |B0| in the list (direction from the scenario's
/// uniform-b field, z if the field is zero) and writes
///   b0,t,d_py,d_fw,d_py_growth,d_fw_growth
/// with d_py = |<S_Py> - <Sigma/2>|, d_fw = |<S_FW> - <S_Py>| and the growth
/// columns measured against the t = 0 difference vectors.
int sweep(const Scenario& s, const std::vector<double>& b0_list, std::ostream& out, std::ostream& err);

}  // namespace relspin
