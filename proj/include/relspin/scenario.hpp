#pragma once

// Scenario files: JSON with "schema": "relspin-scenario/1".
//
//   {
//     "schema": "relspin-scenario/1",
//     "name": "larmor",
//     "units": "natural",                      // or "si"
//     "seed": 7,
//     "params": {"m0": 1, "c": 1, "e": -1},
//     "grid": {"dim": 1, "n": 256, "length": 192},   // length: number or [Lx, Ly, Lz]
//     "field": {"type": "uniform-b", "b0": [0, 0, 0.1],
//               "envelope": {"kind": "constant"}},
//     "hamiltonian": {"id": "fw-direct", "terms": ["zeeman"], "hermitize": false},
//     "initial": [{"center": [0, 0, 0], "width": 6, "momentum": [1.047, 0, 0],
//                  "polarization": "up", "projection": "positive", "amplitude": [1, 0]}],
//     "propagation": {"dt": 0.05, "steps": 200, "stride": 10, "method": "auto",
//                     "krylov": {"max_dim": 40, "tol": 1e-12}, "flux_threshold": 1e-6},
//     "verification": {"kinds": ["fw", "pryce"], "battery": "standard", "width": 6,
//                      "t": 0, "ladder": [{"n": 128, "length": 96}]},
//     "output": {"report": "report.json", "trajectory": "traj.csv"}
//   }
//
// Field types: zero, uniform-b {b0, envelope}, uniform-e {e0, envelope},
// plane-wave {e_amplitude, wavevector, omega, t0, width}. Envelope kinds:
// constant, polynomial {c0, c1, c2}, gaussian {t0, width}, sinusoid {omega, phase}.
// Polarization: "up", "down", "random" (seeded) or four [re, im] pairs.
//
// With "units": "si" the params are SI (kg, m/s, C) and every length (m),
// time (s), wavevector (1/m), momentum (kg m/s), B (T) and E (V/m) is
// converted to hbar = 1 units built on m0 and c: length hbar/(m0 c), time
// hbar/(m0 c^2), B m0^2 c^2/(|e| hbar), E m0^2 c^3/(|e| hbar). Internally
// m0 = c = 1 and e = sign(e).
//
// Every violation raises ConfigError with the JSON path of the field.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "relspin/dynamics.hpp"
#include "relspin/propagator.hpp"

namespace relspin {

struct VerificationSpec {
  std::vector<SpinKind> kinds{SpinKind::FW, SpinKind::Pryce};
  std::string battery = "standard";  // or "initial": the scenario's packets
  double width = 6.0;
  double t = 0.0;
  std::vector<GridSpec> ladder;  // for --refine; empty: n, 2n, 4n at fixed length
};

struct OutputSpec {
  std::string report;
  std::string trajectory;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 1;
  RunSpec run;
  VerificationSpec verification;
  OutputSpec output;
};

Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::string& path);

/// Verification states: the standard battery or the scenario's packets.
std::vector<StateInfo> verification_states(const Scenario& s);
std::vector<GridSpec> refinement_ladder(const Scenario& s);

}  // namespace relspin
