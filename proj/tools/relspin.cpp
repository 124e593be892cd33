#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "relspin/commands.hpp"
#include "relspin/errors.hpp"

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw relspin::ConfigError("--field-grid", "bad number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

void set_threads(int requested) {
  int n = requested;
  if (n <= 0)
    if (const char* env = std::getenv("RELSPIN_THREADS")) n = std::atoi(env);
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-operator dynamics on Dirac wave packets"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: RELSPIN_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);

  relspin::OperatorCheckOptions op;
  auto* check = app.add_subcommand("check-operators", "Algebraic conditions on sampled momenta");
  check->add_option("--samples", op.samples, "Number of sampled momenta");
  check->add_option("--pmax", op.pmax, "Sampling radius in units of m0 c");
  check->add_option("--seed", op.seed, "Sampling seed");

  std::string scenario_path;
  bool refine = false;
  auto* verify = app.add_subcommand("verify-dynamics", "Commutator check of the spin equations of motion");
  verify->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  verify->add_flag("--refine", refine, "Run the refinement ladder");

  auto* sim = app.add_subcommand("simulate", "Propagate and write the trajectory CSV");
  sim->add_option("--scenario", scenario_path, "Scenario JSON")->required();

  std::string field_grid;
  auto* sweep = app.add_subcommand("sweep", "Spin-operator divergence over field strengths");
  sweep->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  sweep->add_option("--field-grid", field_grid, "Comma-separated B0 values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : relspin::kExitConfig;
  }
  set_threads(threads);

  try {
    if (*check) return relspin::check_operators(op, std::cout, std::cerr);
    const relspin::Scenario s = relspin::load_scenario(scenario_path);
    if (*verify) return relspin::verify_dynamics(s, refine, std::cout, std::cerr);
    if (*sim) return relspin::simulate(s, std::cout, std::cerr);
    if (*sweep) return relspin::sweep(s, parse_list(field_grid), std::cout, std::cerr);
  } catch (const relspin::BoundaryFluxError& e) {
    std::cerr << "aborted: " << e.what() << '\n';
    return relspin::kExitFailure;
  } catch (const relspin::StepSizeError& e) {
    std::cerr << "aborted: " << e.what() << " (try dt = " << e.suggested_dt() << ")\n";
    return relspin::kExitFailure;
  } catch (const relspin::SingularMomentumError& e) {
    // a bad verification state is a configuration problem; mid-run it aborts the run
    std::cerr << (*verify ? "error: " : "aborted: ") << e.what() << '\n';
    return *verify ? relspin::kExitConfig : relspin::kExitFailure;
  } catch (const relspin::NumericalError& e) {
    std::cerr << "aborted: " << e.what() << '\n';
    return relspin::kExitFailure;
  } catch (const relspin::Error& e) {
    // configuration and precondition errors
    std::cerr << "error: " << e.what() << '\n';
    return relspin::kExitConfig;
  }
  return relspin::kExitConfig;
}
