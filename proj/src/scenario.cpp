#include "relspin/scenario.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "relspin/errors.hpp"

namespace relspin {

namespace {

using nlohmann::json;

constexpr const char* kSchema = "relspin-scenario/1";
constexpr double kHbar = 1.054571817e-34;

// Multipliers from input units to internal ones.
struct Units {
  double length = 1, time = 1, momentum = 1, bfield = 1, efield = 1;
};

Units si_units(double m0, double c, double e) {
  Units u;
  const double lambda = kHbar / (m0 * c);
  const double tau = kHbar / (m0 * c * c);
  u.length = 1.0 / lambda;
  u.time = 1.0 / tau;
  u.momentum = 1.0 / (m0 * c);
  u.bfield = std::abs(e) * kHbar / (m0 * m0 * c * c);
  u.efield = std::abs(e) * kHbar / (m0 * m0 * c * c * c);
  return u;
}

class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return j_; }
  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string at(std::size_t i) const { return path_ + "[" + std::to_string(i) + "]"; }

  void require_object() const {
    if (!j_.is_object()) fail("expected an object");
  }
  void allow(std::initializer_list<const char*> keys) const {
    require_object();
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items())
      if (!ok.count(k)) throw ConfigError(sub(k), "unknown key");
  }
  bool has(const char* key) const { return j_.contains(key); }
  Node child(const char* key) const {
    if (!j_.contains(key)) throw ConfigError(sub(key), "missing");
    return {j_.at(key), sub(key)};
  }
  double number(const char* key, double fallback) const {
    return has(key) ? child(key).as_number() : fallback;
  }
  double number(const char* key) const { return child(key).as_number(); }
  double as_number() const {
    if (!j_.is_number()) fail("expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) fail("must be finite");
    return v;
  }
  long long integer(const char* key, long long fallback) const {
    if (!has(key)) return fallback;
    const Node n = child(key);
    if (!n.j_.is_number_integer()) n.fail("expected an integer");
    return n.j_.get<long long>();
  }
  std::string string(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const Node n = child(key);
    if (!n.j_.is_string()) n.fail("expected a string");
    return n.j_.get<std::string>();
  }
  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const Node n = child(key);
    if (!n.j_.is_boolean()) n.fail("expected true or false");
    return n.j_.get<bool>();
  }
  Vector3d vec3(const char* key, const Vector3d& fallback) const {
    if (!has(key)) return fallback;
    const Node n = child(key);
    if (!n.j_.is_array() || n.j_.size() != 3) n.fail("expected an array of three numbers");
    Vector3d v;
    for (int i = 0; i < 3; ++i) v(i) = Node(n.j_[i], n.at(i)).as_number();
    return v;
  }
  std::vector<Node> array(const char* key) const {
    const Node n = child(key);
    if (!n.j_.is_array()) n.fail("expected an array");
    std::vector<Node> out;
    for (std::size_t i = 0; i < n.j_.size(); ++i) out.emplace_back(n.j_[i], n.at(i));
    return out;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(path_, msg); }

 private:
  const json& j_;
  std::string path_;
};

double positive(const Node& n, const char* key, double fallback) {
  const double v = n.number(key, fallback);
  if (!(v > 0)) throw ConfigError(n.sub(key), "must be positive");
  return v;
}

Envelope parse_envelope(const Node& n, const Units& u) {
  const std::string kind = n.string("kind", "constant");
  if (kind == "constant") {
    n.allow({"kind"});
    return Envelope::constant();
  }
  if (kind == "polynomial") {
    n.allow({"kind", "c0", "c1", "c2"});
    return Envelope::polynomial(n.number("c0", 1.0), n.number("c1", 0.0) / u.time,
                                n.number("c2", 0.0) / (u.time * u.time));
  }
  if (kind == "gaussian") {
    n.allow({"kind", "t0", "width"});
    return Envelope::gaussian(n.number("t0", 0.0) * u.time, positive(n, "width", 1.0) * u.time);
  }
  if (kind == "sinusoid") {
    n.allow({"kind", "omega", "phase"});
    return Envelope::sinusoid(n.number("omega") / u.time, n.number("phase", 0.0));
  }
  throw ConfigError(n.sub("kind"), "unknown envelope kind '" + kind + "'");
}

FieldModel parse_field(const Node& n, const Units& u) {
  const std::string type = n.string("type", "zero");
  FieldModel m;
  if (type == "zero") {
    n.allow({"type"});
    m = ZeroField{};
  } else if (type == "uniform-b") {
    n.allow({"type", "b0", "envelope"});
    UniformB b;
    b.b0 = n.vec3("b0", Vector3d::Zero()) * u.bfield;
    if (n.has("envelope")) b.envelope = parse_envelope(n.child("envelope"), u);
    m = b;
  } else if (type == "uniform-e") {
    n.allow({"type", "e0", "envelope"});
    UniformE e;
    e.e0 = n.vec3("e0", Vector3d::Zero()) * u.efield;
    if (n.has("envelope")) e.envelope = parse_envelope(n.child("envelope"), u);
    m = e;
  } else if (type == "plane-wave") {
    n.allow({"type", "e_amplitude", "wavevector", "omega", "t0", "width"});
    PlaneWavePulse p;
    p.e_amplitude = n.vec3("e_amplitude", Vector3d::Zero()) * u.efield;
    p.wavevector = n.vec3("wavevector", Vector3d::Zero()) / u.length;
    p.omega = n.number("omega") / u.time;
    p.t0 = n.number("t0", 0.0) * u.time;
    p.width = positive(n, "width", 1.0) * u.time;
    m = p;
  } else {
    throw ConfigError(n.sub("type"), "unknown field type '" + type + "'");
  }
  try {
    validate(m);
  } catch (const PreconditionError& e) {
    n.fail(e.what());
  }
  return m;
}

GridSpec make_grid(const Node& n, int dim, long long points, std::array<double, 3> len) {
  try {
    return GridSpec(dim, int(points), len);
  } catch (const PreconditionError& e) {
    n.fail(e.what());
  }
}

GridSpec parse_grid(const Node& n, const Units& u, int dim_default = 1) {
  n.allow({"dim", "n", "length"});
  const long long dim = n.integer("dim", dim_default);
  const long long points = n.integer("n", 0);
  if (!n.has("n")) throw ConfigError(n.sub("n"), "missing");
  std::array<double, 3> len{};
  const Node l = n.child("length");
  if (l.raw().is_array()) {
    if (l.raw().size() != 3) l.fail("expected a number or three numbers");
    for (int i = 0; i < 3; ++i) len[i] = Node(l.raw()[i], l.at(i)).as_number() * u.length;
  } else {
    len.fill(l.as_number() * u.length);
  }
  if (points > (1 << 16)) throw ConfigError(n.sub("n"), "too large");
  return make_grid(n, int(dim), points, len);
}

Spinor4d random_polarization(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Spinor4d s;
  for (int i = 0; i < 4; ++i) s(i) = cdouble(nd(rng), nd(rng));
  return s.normalized();
}

Spinor4d parse_polarization(const Node& n, std::uint64_t seed) {
  if (n.raw().is_string()) {
    const auto s = n.raw().get<std::string>();
    Spinor4d v = Spinor4d::Zero();
    if (s == "up") {
      v(0) = 1.0;
    } else if (s == "down") {
      v(1) = 1.0;
    } else if (s == "random") {
      v = random_polarization(seed);
    } else {
      n.fail("expected \"up\", \"down\", \"random\" or four [re, im] pairs");
    }
    return v;
  }
  if (!n.raw().is_array() || n.raw().size() != 4) n.fail("expected four [re, im] pairs");
  Spinor4d v;
  for (std::size_t i = 0; i < 4; ++i) {
    const Node c(n.raw()[i], n.at(i));
    if (c.raw().is_number()) {
      v(i) = c.as_number();
    } else if (c.raw().is_array() && c.raw().size() == 2) {
      v(i) = cdouble(Node(c.raw()[0], c.at(0)).as_number(), Node(c.raw()[1], c.at(1)).as_number());
    } else {
      c.fail("expected a number or [re, im]");
    }
  }
  if (v.norm() == 0) n.fail("must be nonzero");
  return v.normalized();
}

InitialComponent parse_component(const Node& n, const Units& u, std::uint64_t seed) {
  n.allow({"center", "width", "momentum", "polarization", "projection", "amplitude"});
  InitialComponent c;
  c.packet.center = n.vec3("center", Vector3d::Zero()) * u.length;
  c.packet.width = positive(n, "width", 6.0) * u.length;
  c.packet.momentum = n.vec3("momentum", Vector3d::Zero()) * u.momentum;
  if (n.has("polarization")) c.packet.polarization = parse_polarization(n.child("polarization"), seed);
  const std::string proj = n.string("projection", "none");
  if (proj == "none")
    c.packet.projection = EnergyProjection::None;
  else if (proj == "positive")
    c.packet.projection = EnergyProjection::Positive;
  else if (proj == "negative")
    c.packet.projection = EnergyProjection::Negative;
  else
    throw ConfigError(n.sub("projection"), "expected none, positive or negative");
  if (n.has("amplitude")) {
    const Node a = n.child("amplitude");
    if (a.raw().is_number())
      c.amplitude = a.as_number();
    else if (a.raw().is_array() && a.raw().size() == 2)
      c.amplitude = cdouble(Node(a.raw()[0], a.at(0)).as_number(), Node(a.raw()[1], a.at(1)).as_number());
    else
      a.fail("expected a number or [re, im]");
  }
  return c;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", e.what());
  }
  const Node root(doc, "");
  root.allow({"schema", "name", "units", "seed", "params", "grid", "field", "hamiltonian", "initial",
              "propagation", "verification", "output"});
  if (root.string("schema", "") != kSchema)
    throw ConfigError("schema", std::string("expected \"") + kSchema + "\"");

  Scenario s;
  s.name = root.string("name", "scenario");
  const long long seed = root.integer("seed", 1);
  if (seed < 0) throw ConfigError("seed", "must be non-negative");
  s.seed = std::uint64_t(seed);

  const std::string units = root.string("units", "natural");
  Units u;
  PhysParamsd params;
  if (root.has("params")) {
    const Node p = root.child("params");
    p.allow({"m0", "c", "e"});
    params.m0 = positive(p, "m0", 1.0);
    params.c = positive(p, "c", 1.0);
    params.e = p.number("e", -1.0);
    if (params.e == 0) throw ConfigError("params.e", "must be nonzero");
  }
  if (units == "si") {
    if (!root.has("params")) throw ConfigError("params", "required with SI units");
    u = si_units(params.m0, params.c, params.e);
    params = PhysParamsd{1.0, 1.0, params.e > 0 ? 1.0 : -1.0};
  } else if (units != "natural") {
    throw ConfigError("units", "expected \"natural\" or \"si\"");
  }
  RunSpec& r = s.run;
  r.params = params;
  r.grid = parse_grid(root.child("grid"), u);
  if (root.has("field")) r.model = parse_field(root.child("field"), u);

  if (root.has("hamiltonian")) {
    const Node h = root.child("hamiltonian");
    h.allow({"id", "terms", "hermitize"});
    try {
      r.hamiltonian = hamiltonian_id_from_string(h.string("id", "dirac-em"));
    } catch (const PreconditionError& e) {
      throw ConfigError(h.sub("id"), e.what());
    }
    if (h.has("terms"))
      for (const auto& t : h.array("terms")) {
        if (!t.raw().is_string()) t.fail("expected a term name");
        r.term_mask.push_back(t.raw().get<std::string>());
      }
    r.hermitize = h.boolean("hermitize", false);
    if (r.hermitize && r.hamiltonian != HamiltonianId::FWDirect)
      throw ConfigError(h.sub("hermitize"), "only the fw-direct Hamiltonian has a hermitized form");
    try {
      build_hamiltonian(r.hamiltonian, r.model, r.params, r.hermitize, r.term_mask);
    } catch (const PreconditionError& e) {
      throw ConfigError(h.sub("terms"), e.what());
    }
  }

  if (root.has("initial")) {
    const Node init = root.child("initial");
    std::vector<Node> items;
    if (init.raw().is_array())
      items = root.array("initial");
    else
      items.push_back(init);
    if (items.empty()) init.fail("needs at least one packet");
    for (std::size_t i = 0; i < items.size(); ++i) {
      r.initial.push_back(parse_component(items[i], u, s.seed + i));
      try {
        gaussian_packet(r.grid, r.initial.back().packet, r.params);
      } catch (const PreconditionError& e) {
        items[i].fail(e.what());
      }
    }
    try {
      initial_state(r);
    } catch (const PreconditionError& e) {
      init.fail(e.what());
    }
  }

  if (root.has("propagation")) {
    const Node p = root.child("propagation");
    p.allow({"dt", "steps", "stride", "method", "krylov", "flux_threshold", "flux_shell"});
    r.dt = positive(p, "dt", 0.01) * u.time;
    const long long steps = p.integer("steps", 100), stride = p.integer("stride", 1);
    if (steps < 0) throw ConfigError(p.sub("steps"), "must be non-negative");
    if (stride < 1) throw ConfigError(p.sub("stride"), "must be at least 1");
    r.steps = int(steps);
    r.stride = int(stride);
    const std::string method = p.string("method", "auto");
    if (method == "auto")
      r.method = Method::Auto;
    else if (method == "strang")
      r.method = Method::Strang;
    else if (method == "krylov")
      r.method = Method::Krylov;
    else
      throw ConfigError(p.sub("method"), "expected auto, strang or krylov");
    if (r.method == Method::Strang && r.hamiltonian != HamiltonianId::Free &&
        r.hamiltonian != HamiltonianId::DiracEM)
      throw ConfigError(p.sub("method"), "strang needs the free or dirac-em Hamiltonian");
    if (p.has("krylov")) {
      const Node k = p.child("krylov");
      k.allow({"max_dim", "tol"});
      const long long md = k.integer("max_dim", 40);
      if (md < 8 || md > 400) throw ConfigError(k.sub("max_dim"), "must be in [8, 400]");
      r.krylov.max_dim = int(md);
      r.krylov.tol = positive(k, "tol", 1e-12);
    }
    r.flux_threshold = positive(p, "flux_threshold", 1e-6);
    r.flux_shell = p.number("flux_shell", 0.0) * u.length;
    if (r.flux_shell < 0) throw ConfigError(p.sub("flux_shell"), "must be non-negative");
  }

  if (root.has("verification")) {
    const Node v = root.child("verification");
    v.allow({"kinds", "battery", "width", "t", "ladder"});
    VerificationSpec& vs = s.verification;
    if (v.has("kinds")) {
      vs.kinds.clear();
      for (const auto& k : v.array("kinds")) {
        if (!k.raw().is_string()) k.fail("expected dirac, fw or pryce");
        try {
          vs.kinds.push_back(spin_kind_from_string(k.raw().get<std::string>()));
        } catch (const PreconditionError& e) {
          k.fail(e.what());
        }
      }
    }
    vs.battery = v.string("battery", "standard");
    if (vs.battery != "standard" && vs.battery != "initial")
      throw ConfigError(v.sub("battery"), "expected standard or initial");
    if (vs.battery == "initial" && r.initial.empty())
      throw ConfigError(v.sub("battery"), "\"initial\" needs an initial section");
    vs.width = positive(v, "width", 6.0) * u.length;
    vs.t = v.number("t", 0.0) * u.time;
    if (v.has("ladder"))
      for (const auto& g : v.array("ladder")) vs.ladder.push_back(parse_grid(g, u, r.grid.dim()));
  }
  for (std::size_t i = 0; i < s.verification.kinds.size(); ++i) {
    const SpinKind k = s.verification.kinds[i];
    if (!has_candidate_equation(k, r.hamiltonian))
      throw ConfigError("verification.kinds[" + std::to_string(i) + "]",
                        "no candidate equation for " + equation_id(k, r.hamiltonian));
  }

  if (root.has("output")) {
    const Node o = root.child("output");
    o.allow({"report", "trajectory"});
    s.output.report = o.string("report", "");
    s.output.trajectory = o.string("trajectory", "");
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open scenario file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::vector<StateInfo> verification_states(const Scenario& s) {
  if (s.verification.battery == "standard")
    return standard_battery(s.run.grid.dim(), s.verification.width, s.seed);
  std::vector<StateInfo> out;
  for (std::size_t i = 0; i < s.run.initial.size(); ++i)
    out.push_back({"initial-" + std::to_string(i), s.run.initial[i].packet});
  return out;
}

std::vector<GridSpec> refinement_ladder(const Scenario& s) {
  if (!s.verification.ladder.empty()) return s.verification.ladder;
  const GridSpec& g = s.run.grid;
  const std::array<double, 3> len{g.length(0), g.length(1), g.length(2)};
  return {g, GridSpec(g.dim(), 2 * g.n(), len), GridSpec(g.dim(), 4 * g.n(), len)};
}

}  // namespace relspin
