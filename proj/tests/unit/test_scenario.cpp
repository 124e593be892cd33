#include <gtest/gtest.h>

#include <map>
#include <sstream>
#include <string>

#include "relspin/commands.hpp"
#include "relspin/errors.hpp"
#include "relspin/scenario.hpp"

using namespace relspin;

namespace {

std::string minimal(const std::string& extra = "") {
  return R"({"schema": "relspin-scenario/1", "grid": {"dim": 1, "n": 128, "length": 96})" + extra + "}";
}

std::string path_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<accepted>";
}

const char* kFree = R"({
  "schema": "relspin-scenario/1",
  "seed": 7,
  "grid": {"dim": 1, "n": 256, "length": 192},
  "hamiltonian": {"id": "free"},
  "initial": {"width": 6, "momentum": [1.0471975511965976, 0, 0],
              "polarization": "random", "projection": "positive"},
  "propagation": {"dt": 0.1, "steps": 500, "stride": 10, "flux_threshold": 1.0},
  "verification": {"kinds": ["dirac", "fw", "pryce"]}
})";

const char* kSweep = R"({
  "schema": "relspin-scenario/1",
  "grid": {"dim": 1, "n": 256, "length": 192},
  "field": {"type": "uniform-b", "b0": [0, 0, 1]},
  "hamiltonian": {"id": "dirac-em"},
  "initial": {"width": 6, "momentum": [1.0471975511965976, 0, 0],
              "polarization": "up", "projection": "positive"},
  "propagation": {"dt": 0.05, "steps": 100, "stride": 10}
})";

}  // namespace

TEST(Scenario, Defaults) {
  const Scenario s = parse_scenario(minimal());
  EXPECT_EQ(s.run.grid, GridSpec::cube(1, 128, 96));
  EXPECT_TRUE(is_zero(s.run.model));
  EXPECT_EQ(s.run.hamiltonian, HamiltonianId::DiracEM);
  EXPECT_EQ(s.verification.kinds.size(), 2u);
  EXPECT_EQ(refinement_ladder(s).size(), 3u);
  EXPECT_EQ(refinement_ladder(s)[2].n(), 512);
  EXPECT_EQ(verification_states(s).size(), 6u);
}

TEST(Scenario, FullDocument) {
  const Scenario s = parse_scenario(R"({
    "schema": "relspin-scenario/1", "name": "x", "seed": 3,
    "grid": {"dim": 3, "n": 64, "length": [48, 48, 96]},
    "field": {"type": "uniform-b", "b0": [0, 0, 0.1],
              "envelope": {"kind": "polynomial", "c0": 1, "c1": 0.3, "c2": 0.2}},
    "hamiltonian": {"id": "fw-direct", "terms": ["zeeman", "soc"], "hermitize": true},
    "initial": [{"width": 6, "momentum": [1, 0, 0], "polarization": [[1, 0], [0, 1], 0, 0]},
                {"width": 6, "polarization": "down", "amplitude": [0, 0.5]}],
    "propagation": {"dt": 0.02, "steps": 10, "stride": 5, "method": "krylov",
                    "krylov": {"max_dim": 20, "tol": 1e-10}},
    "verification": {"kinds": ["pryce"], "battery": "initial", "t": 0.5},
    "output": {"report": "r.json", "trajectory": "t.csv"}
  })");
  EXPECT_EQ(s.name, "x");
  EXPECT_EQ(s.run.grid.length(2), 96);
  const auto& b = std::get<UniformB>(s.run.model);
  EXPECT_EQ(b.envelope.kind, Envelope::Kind::Polynomial);
  EXPECT_EQ(s.run.term_mask, (std::vector<std::string>{"zeeman", "soc"}));
  EXPECT_TRUE(s.run.hermitize);
  ASSERT_EQ(s.run.initial.size(), 2u);
  EXPECT_NEAR(std::abs(s.run.initial[0].packet.polarization(1) - cdouble(0, 1) / std::sqrt(2.0)), 0, 1e-15);
  EXPECT_EQ(s.run.initial[1].amplitude, cdouble(0, 0.5));
  EXPECT_EQ(s.run.method, Method::Krylov);
  EXPECT_EQ(s.run.krylov.max_dim, 20);
  EXPECT_EQ(verification_states(s).size(), 2u);
  EXPECT_EQ(s.output.trajectory, "t.csv");
}

TEST(Scenario, RejectionsNameTheField) {
  EXPECT_EQ(path_of("{"), "<document>");
  EXPECT_EQ(path_of(R"({"grid": {"n": 128, "length": 96}})"), "schema");
  EXPECT_EQ(path_of(minimal(R"(, "colour": 1)")), "colour");
  EXPECT_EQ(path_of(R"({"schema": "relspin-scenario/1", "grid": {"n": 100, "length": 96}})"), "grid");
  EXPECT_EQ(path_of(R"({"schema": "relspin-scenario/1", "grid": {"n": 128, "length": -1}})"), "grid");
  EXPECT_EQ(path_of(minimal(R"(, "units": "imperial")")), "units");
  EXPECT_EQ(path_of(minimal(R"(, "field": {"type": "uniform-b", "b0": [0, 0]})")), "field.b0");
  EXPECT_EQ(path_of(minimal(R"(, "field": {"type": "plane-wave", "e_amplitude": [1, 0, 0],
                                 "wavevector": [1, 0, 0], "omega": 1})")), "field");
  EXPECT_EQ(path_of(minimal(R"(, "hamiltonian": {"id": "schroedinger"})")), "hamiltonian.id");
  EXPECT_EQ(path_of(minimal(R"(, "hamiltonian": {"id": "fw-direct", "terms": ["darwin"]})")),
            "hamiltonian.terms");
  EXPECT_EQ(path_of(minimal(R"(, "initial": {"width": 1})")), "initial");
  EXPECT_EQ(path_of(minimal(R"(, "initial": [{"width": 6}, {"width": 6, "polarization": "left"}])")),
            "initial[1].polarization");
  EXPECT_EQ(path_of(minimal(R"(, "propagation": {"dt": 0})")), "propagation.dt");
  EXPECT_EQ(path_of(minimal(R"(, "propagation": {"stride": 0})")), "propagation.stride");
  EXPECT_EQ(path_of(minimal(R"(, "propagation": {"krylov": {"max_dim": 4}})")), "propagation.krylov.max_dim");
  EXPECT_EQ(path_of(minimal(R"(, "hamiltonian": {"id": "fw-full"}, "propagation": {"method": "strang"})")),
            "propagation.method");
  EXPECT_EQ(path_of(minimal(R"(, "verification": {"kinds": ["dirac"]})")), "verification.kinds[0]");
  EXPECT_EQ(path_of(minimal(R"(, "verification": {"battery": "initial"})")), "verification.battery");
}

TEST(Scenario, SIUnitsConvertToNatural) {
  // electron: lengths in reduced Compton wavelengths, B in units of 4.414e9 T
  const Scenario s = parse_scenario(R"({
    "schema": "relspin-scenario/1", "units": "si",
    "params": {"m0": 9.1093837015e-31, "c": 299792458, "e": -1.602176634e-19},
    "grid": {"dim": 1, "n": 128, "length": 3.7072e-11},
    "field": {"type": "uniform-b", "b0": [0, 0, 4.414005e8]},
    "propagation": {"dt": 1.28809e-22}
  })");
  EXPECT_DOUBLE_EQ(s.run.params.m0, 1.0);
  EXPECT_DOUBLE_EQ(s.run.params.e, -1.0);
  EXPECT_NEAR(s.run.grid.length(0), 96.0, 0.01);
  EXPECT_NEAR(std::get<UniformB>(s.run.model).b0.z(), 0.1, 1e-6);
  EXPECT_NEAR(s.run.dt, 0.1, 1e-5);
  EXPECT_EQ(path_of(R"({"schema": "relspin-scenario/1", "units": "si",
                        "grid": {"n": 128, "length": 1e-10}})"), "params");
}

TEST(Commands, CheckOperators) {
  std::ostringstream out, err;
  EXPECT_EQ(check_operators({}, out, err), kExitPass);
  EXPECT_NE(out.str().find("\"pass\": true"), std::string::npos);
  // three kinds x three conditions
  std::size_t rows = 0;
  for (std::size_t p = 0; (p = out.str().find("\"condition\"", p)) != std::string::npos; ++p) ++rows;
  EXPECT_EQ(rows, 9u);
  OperatorCheckOptions wide;
  wide.pmax = 10;
  EXPECT_EQ(check_operators(wide, out, err), kExitPass);
  OperatorCheckOptions none;
  none.samples = 0;
  EXPECT_EQ(check_operators(none, out, err), kExitConfig);
}

TEST(Commands, VerifyFreeScenarioPasses) {
  std::ostringstream out, err;
  EXPECT_EQ(verify_dynamics(parse_scenario(kFree), false, out, err), kExitPass);
  EXPECT_NE(out.str().find("\"relspin-verify/1\""), std::string::npos);
  EXPECT_NE(out.str().find("\"pass\": true"), std::string::npos);
}

TEST(Commands, VerifyZeemanOnly) {
  const Scenario s = parse_scenario(minimal(R"(,
    "field": {"type": "uniform-b", "b0": [0, 0, 0.1]},
    "hamiltonian": {"id": "fw-direct", "terms": ["zeeman"]})"));
  std::ostringstream out, err;
  const int code = verify_dynamics(s, false, out, err);
  EXPECT_NE(code, kExitConfig);
  EXPECT_NE(out.str().find("\"zeeman_leading\""), std::string::npos);
  EXPECT_NE(err.str().find("zeeman leading term"), std::string::npos);
  EXPECT_NE(err.str().find(" ok"), std::string::npos);
}

TEST(Commands, VerifyPryceAtRestHitsGuard) {
  const Scenario s = parse_scenario(minimal(R"(,
    "field": {"type": "uniform-b", "b0": [0, 0, 0.1]},
    "initial": {"width": 6, "polarization": "up"},
    "verification": {"kinds": ["pryce"], "battery": "initial"})"));
  std::ostringstream out, err;
  EXPECT_THROW(verify_dynamics(s, false, out, err), SingularMomentumError);
}

TEST(Commands, SimulateFreeKeepsProperSpins) {
  std::ostringstream out, err;
  ASSERT_EQ(simulate(parse_scenario(kFree), out, err), kExitPass);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, Trajectory::csv_header());
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  ASSERT_EQ(rows.size(), 51u);
  double drift = 0;
  for (const auto& r : rows)
    for (int c = 6; c < 12; ++c) drift = std::max(drift, std::abs(r[c] - rows[0][c]));
  EXPECT_LT(drift, 1e-8);
}

TEST(Commands, SweepZeroFieldLimitAndDeterminism) {
  const Scenario s = parse_scenario(kSweep);
  std::ostringstream a, b, err;
  ASSERT_EQ(sweep(s, {0.0, 1e-9, 0.02, 0.05}, a, err), kExitPass);
  ASSERT_EQ(sweep(s, {0.0, 1e-9, 0.02, 0.05}, b, err), kExitPass);
  EXPECT_EQ(a.str(), b.str());

  std::istringstream in(a.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "b0,t,d_py,d_fw,d_py_growth,d_fw_growth");
  std::map<double, double> growth;
  while (std::getline(in, line)) {
    double v[6];
    char comma;
    std::istringstream ls(line);
    ls >> v[0];
    for (int i = 1; i < 6; ++i) ls >> comma >> v[i];
    growth[v[0]] = std::max({growth[v[0]], v[4], v[5]});
  }
  EXPECT_LT(growth[0.0], 1e-8);
  EXPECT_LT(growth[1e-9], 1e-8);
  EXPECT_GT(growth[0.05], growth[0.02]);
  EXPECT_THROW(sweep(parse_scenario(kFree), {0.1}, a, err), ConfigError);
}
