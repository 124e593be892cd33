#include "relspin/commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>

#include <nlohmann/json.hpp>

#include "relspin/errors.hpp"

namespace relspin {

namespace {

using nlohmann::json;

// Writes to the configured path, or to `fallback` when none is set.
template <typename Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream f(path);
  if (!f) throw ConfigError("output", "cannot write '" + path + "'");
  write(f);
}

Vector3d sample_ball(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    const Vector3d v(u(rng), u(rng), u(rng));
    if (v.squaredNorm() <= 1.0 && v.squaredNorm() > 1e-6) return radius * v;
  }
}

}  // namespace

int check_operators(const OperatorCheckOptions& opts, std::ostream& out, std::ostream& err) {
  if (opts.samples < 1) {
    err << "check-operators: --samples must be at least 1\n";
    return kExitConfig;
  }
  if (!(opts.pmax > 0) || !std::isfinite(opts.pmax)) {
    err << "check-operators: --pmax must be positive\n";
    return kExitConfig;
  }
  const PhysParamsd params;
  std::mt19937_64 rng(opts.seed);
  std::vector<Vector3d> momenta;
  for (int i = 0; i < opts.samples; ++i) momenta.push_back(sample_ball(rng, opts.pmax * params.m0 * params.c));

  json kinds = json::array();
  bool pass = true;
  for (SpinKind kind : kAllSpinKinds) {
    double su2 = 0, spec = 0, free = 0, analytic_dev = 0;
    for (const auto& p : momenta) {
      const auto r = condition_checks<double>(kind, p, params);
      su2 = std::max(su2, r.su2_residual);
      spec = std::max(spec, r.spectrum_residual);
      free = std::max(free, r.free_commutation_residual);
      if (kind == SpinKind::Dirac)
        for (int i = 0; i < 3; ++i) {
          const int j = (i + 1) % 3, k = (i + 2) % 3;
          const double predicted = 2 * params.c * std::hypot(p(j), p(k));
          analytic_dev = std::max(analytic_dev, std::abs(r.free_commutation[i] - predicted));
        }
    }
    json conds = json::array();
    auto cond = [&](const char* name, double residual, bool expect_pass, bool ok) {
      conds.push_back({{"condition", name},
                       {"residual", residual},
                       {"expected", expect_pass ? "pass" : "fail"},
                       {"ok", ok}});
      pass = pass && ok;
    };
    cond("su2-algebra", su2, true, su2 <= opts.tol);
    cond("spectrum", spec, true, spec <= opts.tol);
    if (kind == SpinKind::Dirac) {
      cond("free-commutation", free, false, analytic_dev <= opts.dirac_tol && free > opts.tol);
      conds.back()["analytic_deviation"] = analytic_dev;
    } else {
      cond("free-commutation", free, true, free <= opts.tol);
    }
    kinds.push_back({{"kind", std::string(to_string(kind))}, {"conditions", conds}});
  }

  json doc = {{"schema", "relspin-operators/1"},
              {"samples", opts.samples},
              {"pmax", opts.pmax},
              {"seed", opts.seed},
              {"kinds", kinds},
              {"pass", pass}};
  out << doc.dump(2) << '\n';

  err << std::left << std::setw(7) << "kind" << std::setw(18) << "condition" << std::setw(14) << "residual"
      << "status\n";
  for (const auto& k : kinds)
    for (const auto& c : k["conditions"]) {
      err << std::setw(7) << k["kind"].get<std::string>() << std::setw(18) << c["condition"].get<std::string>()
          << std::setw(14) << std::setprecision(3) << std::scientific << c["residual"].get<double>()
          << (c["ok"].get<bool>() ? "ok" : "FAIL") << " (expected " << c["expected"].get<std::string>()
          << ")\n";
    }
  err << std::defaultfloat;
  return pass ? kExitPass : kExitFailure;
}

int verify_dynamics(const Scenario& s, bool refine, std::ostream& out, std::ostream& err) {
  const RunSpec& r = s.run;
  const auto states = verification_states(s);
  VerifyOptions vo;
  vo.t = s.verification.t;
  vo.term_mask = r.term_mask;
  const auto ladder = refine ? refinement_ladder(s) : std::vector<GridSpec>{r.grid};

  json doc = {{"schema", "relspin-verify/1"}, {"scenario", s.name}};
  json reports = json::array();
  bool pass = true;
  for (SpinKind kind : s.verification.kinds) {
    const ResidualReport rep = verify_refined(kind, r.hamiltonian, r.model, r.params, states, ladder, vo);
    reports.push_back(json::parse(report_to_json(rep, -1)));
    err << report_table(rep) << '\n';
    if (rep.verdict == Classification::NonConverging) {
      pass = false;
      err << rep.equation << ": " << to_string(rep.verdict);
      if (!rep.offending_term.empty()) err << " (offending term: " << rep.offending_term << ")";
      err << '\n';
    }
  }
  doc["reports"] = reports;

  json tj = json::array();
  for (SpinKind kind : {SpinKind::FW, SpinKind::Pryce}) {
    json rows = json::array();
    double worst = 0;
    for (const auto& g : ladder) {
      std::vector<SpinorField> fields;
      for (const auto& st : states) fields.push_back(gaussian_packet(g, st.spec, r.params));
      const double res = total_j_identity(kind, fields, r.params);
      worst = std::max(worst, res);
      rows.push_back({{"n", g.n()}, {"length", g.length(0)}, {"residual", res}});
    }
    const bool ok = worst <= 1e-6;
    pass = pass && ok;
    tj.push_back({{"kind", std::string(to_string(kind))}, {"refinement", rows}, {"max_residual", worst}, {"ok", ok}});
    err << "total-j " << to_string(kind) << ": " << worst << (ok ? " ok" : " FAIL") << '\n';
  }
  doc["total_j"] = tj;

  if (r.hamiltonian == HamiltonianId::FWDirect && is_uniform_b(r.model)) {
    std::vector<SpinorField> fields;
    for (const auto& st : states) fields.push_back(gaussian_packet(r.grid, st.spec, r.params));
    const double z = zeeman_leading_residual(r.model, r.params, fields, vo.t);
    const bool ok = z <= 1e-10;
    pass = pass && ok;
    doc["zeeman_leading"] = {{"residual", z}, {"ok", ok}};
    err << "zeeman leading term: " << z << (ok ? " ok" : " FAIL") << '\n';
  } else {
    doc["zeeman_leading"] = nullptr;
  }
  doc["pass"] = pass;
  emit(s.output.report, out, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
  return pass ? kExitPass : kExitFailure;
}

int simulate(const Scenario& s, std::ostream& out, std::ostream& err) {
  if (s.run.initial.empty()) throw ConfigError("initial", "simulate needs an initial state");
  const Trajectory tr = run(s.run);
  emit(s.output.trajectory, out, [&](std::ostream& os) { tr.write_csv(os); });
  err << "simulate: " << tr.samples.size() << " samples, final norm " << tr.samples.back().norm << '\n';
  return kExitPass;
}

int sweep(const Scenario& s, const std::vector<double>& b0_list, std::ostream& out, std::ostream& err) {
  if (s.run.initial.empty()) throw ConfigError("initial", "sweep needs an initial state");
  if (b0_list.empty()) throw ConfigError("--field-grid", "needs at least one value");
  Vector3d dir(0, 0, 1);
  Envelope env;
  if (const auto* b = std::get_if<UniformB>(&s.run.model)) {
    if (b->b0.norm() > 0) dir = b->b0.normalized();
    env = b->envelope;
  } else if (!is_zero(s.run.model)) {
    throw ConfigError("field", "sweep needs a uniform-b or zero field");
  }
  if (s.run.hamiltonian == HamiltonianId::Free)
    throw ConfigError("hamiltonian.id", "sweep needs a field-dependent Hamiltonian");

  std::ostringstream csv;
  csv << "b0,t,d_py,d_fw,d_py_growth,d_fw_growth\n" << std::setprecision(15);
  for (double b0 : b0_list) {
    if (!std::isfinite(b0) || b0 < 0) throw ConfigError("--field-grid", "values must be finite and >= 0");
    RunSpec r = s.run;
    r.model = UniformB{b0 * dir, env};
    const Trajectory tr = run(r);
    const Vector3d py0 = tr.samples[0].spin[2] - tr.samples[0].spin[0];
    const Vector3d fw0 = tr.samples[0].spin[1] - tr.samples[0].spin[2];
    double worst = 0;
    for (const auto& x : tr.samples) {
      const Vector3d py = x.spin[2] - x.spin[0], fw = x.spin[1] - x.spin[2];
      csv << b0 << ',' << x.t << ',' << py.norm() << ',' << fw.norm() << ',' << (py - py0).norm() << ','
          << (fw - fw0).norm() << '\n';
      worst = std::max(worst, (fw - fw0).norm());
    }
    err << "sweep: b0 = " << b0 << ", max d_fw growth " << worst << '\n';
  }
  emit(s.output.trajectory, out, [&](std::ostream& os) { os << csv.str(); });
  return kExitPass;
}

}  // namespace relspin
