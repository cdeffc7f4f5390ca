#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "nimf/errors.hpp"

namespace nimf::cli {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  fail(ErrorKind::config, where + ": " + what);
}

// an object whose keys must all be read; leftovers are unknown keys
class Block {
 public:
  Block(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) bad(where_, "expected an object");
  }
  ~Block() = default;
  Block(const Block&) = delete;
  Block& operator=(const Block&) = delete;

  bool has(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k);
  }
  const json& raw(const std::string& k) {
    seen_.insert(k);
    return j_.at(k);
  }
  std::string at(const std::string& k) const { return where_ + "." + k; }

  double number(const std::string& k, double def) {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_number()) bad(at(k), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) bad(at(k), "must be finite");
    return x;
  }
  double positive(const std::string& k, double def) {
    const double x = number(k, def);
    if (!(x > 0.0)) bad(at(k), "must be positive");
    return x;
  }
  int integer(const std::string& k, int def, int min) {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_number_integer()) bad(at(k), "expected an integer");
    const auto x = v.get<long long>();
    if (x < min || x > 1'000'000) bad(at(k), "must be in [" + std::to_string(min) + ", 1000000]");
    return static_cast<int>(x);
  }
  bool boolean(const std::string& k, bool def) {
    if (!has(k)) return def;
    if (!j_.at(k).is_boolean()) bad(at(k), "expected true or false");
    return j_.at(k).get<bool>();
  }
  std::string string(const std::string& k, const std::string& def) {
    if (!has(k)) return def;
    if (!j_.at(k).is_string()) bad(at(k), "expected a string");
    return j_.at(k).get<std::string>();
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) bad(where_, "unknown key '" + k + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::vector<double> value_list(const json& j, const std::string& where, bool positive) {
  std::vector<double> out;
  if (j.is_number()) {
    out.push_back(j.get<double>());
  } else if (j.is_array()) {
    for (const auto& v : j) {
      if (!v.is_number()) bad(where, "list entries must be numbers");
      out.push_back(v.get<double>());
    }
  } else {
    Block b(j, where);
    const double from = b.number("from", NAN), to = b.number("to", NAN);
    const int count = b.integer("count", 0, 1);
    const std::string spacing = b.string("spacing", "linear");
    b.finish();
    if (std::isnan(from) || std::isnan(to) || count < 1) bad(where, "range needs from, to and count");
    if (spacing != "linear" && spacing != "log") bad(where + ".spacing", "must be 'linear' or 'log'");
    if (spacing == "log" && !(from > 0.0 && to > 0.0)) bad(where, "log spacing needs positive bounds");
    for (int i = 0; i < count; ++i) {
      const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
      out.push_back(spacing == "log" ? std::exp(std::log(from) + t * (std::log(to) - std::log(from)))
                                     : from + t * (to - from));
    }
  }
  if (out.empty()) bad(where, "empty list");
  for (double x : out) {
    if (!std::isfinite(x)) bad(where, "values must be finite");
    if (positive && !(x > 0.0)) bad(where, "values must be positive");
  }
  return out;
}

SurfaceKind kind_of(const std::string& s, const std::string& where) {
  try {
    return parse_surface_kind(s);
  } catch (const Error&) {
    bad(where, "unknown surface kind '" + s + "' (bo, mf, nimf)");
  }
}

ModelBlock parse_model(const json& j) {
  Block b(j, "model");
  ModelBlock m;
  m.type = b.string("type", "");
  m.delta = b.number("delta", m.delta);
  if (m.type == "linear_crossing") {
    m.kappa0 = b.number("kappa0", m.kappa0);
    m.kappa1 = b.number("kappa1", m.kappa1);
    m.v_cross = b.number("v_cross", m.v_cross);
    m.mass = b.positive("mass", m.mass);
    m.reactant_side = b.integer("reactant_side", -1, -1);
    if (m.reactant_side != -1 && m.reactant_side != 1) bad("model.reactant_side", "must be -1 or 1");
    if (m.kappa0 == m.kappa1) bad("model", "kappa0 and kappa1 must differ");
  } else if (m.type == "parabolic") {
    m.curvature = b.number("curvature", m.curvature);
    m.offset = b.number("offset", m.offset);
    m.mass = b.positive("mass", m.mass);
    if (m.curvature == 0.0) bad("model.curvature", "must be non-zero");
  } else if (m.type == "spin_boson") {
    m.bath.reorganisation = b.positive("reorganisation", m.bath.reorganisation);
    m.bath.omega = b.positive("omega", m.bath.omega);
    m.bath.gamma = b.positive("gamma", m.bath.gamma);
    m.bath.bath_size = b.integer("bath_size", m.bath.bath_size, 1);
    m.bath.omega_max = b.number("omega_max", m.bath.omega_max);
    if (m.bath.omega_max < 0.0) bad("model.omega_max", "must be non-negative");
  } else {
    bad("model.type", "expected linear_crossing, parabolic or spin_boson, got '" + m.type + "'");
  }
  b.finish();
  return m;
}

OptimizerSettings parse_optimizer(const json& j) {
  Block b(j, "optimizer");
  OptimizerSettings s;
  s.g_tol = b.positive("g_tol", s.g_tol);
  s.max_iter = b.integer("max_iter", s.max_iter, 1);
  s.trust_radius = b.positive("trust_radius", s.trust_radius);
  s.collapse_tol = b.positive("collapse_tol", s.collapse_tol);
  s.zero_tol = b.positive("zero_tol", s.zero_tol);
  s.fd_step = b.positive("fd_step", s.fd_step);
  s.hessian_refresh = b.integer("hessian_refresh", s.hessian_refresh, 1);
  b.finish();
  return s;
}

CrossoverOptions parse_crossover(const json& j) {
  Block b(j, "crossover");
  CrossoverOptions c;
  c.beta_n_max = b.positive("beta_n_max", c.beta_n_max);
  c.n_beads = b.integer("n_beads", c.n_beads, 0);
  c.rel_tol = b.positive("rel_tol", c.rel_tol);
  if (b.has("bracket")) {
    const auto v = value_list(b.raw("bracket"), "crossover.bracket", true);
    if (v.size() != 2 || !(v[0] < v[1])) bad("crossover.bracket", "expected [lo, hi] with lo < hi");
    c.bracket = std::make_pair(v[0], v[1]);
  }
  b.finish();
  return c;
}

OracleBlock parse_oracles(const json& j) {
  Block b(j, "oracles");
  OracleBlock o;
  o.exact = b.boolean("exact", false);
  o.quantum_gr = b.boolean("quantum_gr", false);
  o.classical_gr = b.boolean("classical_gr", false);
  o.holstein = b.boolean("holstein", false);
  o.eyring = b.boolean("eyring", false);
  o.eyring_quantum = b.boolean("eyring_quantum", false);
  if (b.has("benchmarks")) {
    Block t(b.raw("benchmarks"), "oracles.benchmarks");
    o.benchmark_system = t.string("system", "");
    if (t.has("methods")) {
      const json& ms = t.raw("methods");
      if (!ms.is_array()) bad("oracles.benchmarks.methods", "expected a list of strings");
      for (const auto& m : ms) {
        if (!m.is_string()) bad("oracles.benchmarks.methods", "expected a list of strings");
        o.benchmark_methods.push_back(m.get<std::string>());
      }
    }
    t.finish();
    if (o.benchmark_system.empty() || o.benchmark_methods.empty())
      bad("oracles.benchmarks", "needs system and methods");
  }
  if (b.has("scattering")) {
    Block s(b.raw("scattering"), "oracles.scattering");
    auto& n = o.scattering;
    n.step = s.positive("step", n.step);
    if (s.has("x_min")) n.x_min = s.number("x_min", 0.0);
    if (s.has("x_max")) n.x_max = s.number("x_max", 0.0);
    n.asymptotic_kinetic = s.positive("asymptotic_kinetic", n.asymptotic_kinetic);
    n.window = s.positive("window", n.window);
    n.rel_tol = s.positive("rel_tol", n.rel_tol);
    n.max_halvings = s.integer("max_halvings", n.max_halvings, 1);
    s.finish();
    if (n.x_min && n.x_max && !(*n.x_min < *n.x_max)) bad("oracles.scattering", "x_min must be below x_max");
  }
  b.finish();
  return o;
}

}  // namespace

int GridBlock::beads_for(double beta) const {
  if (n_beads > 0) return n_beads;
  return RingPolymerGrid::beads_for(beta, beta_n_max, n_min);
}

bool OracleBlock::any() const {
  return exact || quantum_gr || classical_gr || holstein || eyring || eyring_quantum || !benchmark_methods.empty();
}

ExperimentConfig parse_config(const json& j) {
  Block top(j, "config");
  ExperimentConfig c;
  c.source = j;
  c.system = top.string("system", "");
  if (c.system.empty()) bad("config.system", "required");
  if (c.system.find_first_of(",\"\n") != std::string::npos) bad("config.system", "must not contain , \" or newlines");
  if (!top.has("model")) bad("config", "missing 'model'");
  c.model = parse_model(top.raw("model"));
  c.deltas = {c.model.delta};

  if (!top.has("grid")) bad("config", "missing 'grid'");
  {
    Block g(top.raw("grid"), "grid");
    if (g.has("beta")) c.grid.betas = value_list(g.raw("beta"), "grid.beta", true);
    c.grid.n_beads = g.integer("n_beads", 0, 0);
    if (c.grid.n_beads == 1) bad("grid.n_beads", "needs at least 2 beads");
    c.grid.beta_n_max = g.positive("beta_n_max", c.grid.beta_n_max);
    c.grid.n_min = g.integer("n_min", c.grid.n_min, 2);
    c.grid.hbar = g.positive("hbar", c.grid.hbar);
    g.finish();
  }
  if (top.has("scan")) {
    Block s(top.raw("scan"), "scan");
    if (s.has("delta")) c.deltas = value_list(s.raw("delta"), "scan.delta", false);
    if (s.has("beta")) {
      if (!c.grid.betas.empty()) bad("scan.beta", "beta is already given in grid.beta");
      c.grid.betas = value_list(s.raw("beta"), "scan.beta", true);
    }
    s.finish();
  }
  if (c.grid.betas.empty()) bad("grid.beta", "required (or scan.beta)");

  if (top.has("kinds")) {
    const json& k = top.raw("kinds");
    if (!k.is_array()) bad("config.kinds", "expected a list");
    for (const auto& s : k) {
      if (!s.is_string()) bad("config.kinds", "expected strings");
      const SurfaceKind kind = kind_of(s.get<std::string>(), "config.kinds");
      if (std::find(c.kinds.begin(), c.kinds.end(), kind) != c.kinds.end()) bad("config.kinds", "duplicate kind");
      c.kinds.push_back(kind);
    }
  }
  if (top.has("oracles")) c.oracles = parse_oracles(top.raw("oracles"));
  if (c.kinds.empty() && !c.oracles.any()) bad("config", "nothing to compute: give kinds or oracles");
  if (top.has("optimizer")) c.optimizer = parse_optimizer(top.raw("optimizer"));
  if (top.has("crossover")) c.crossover = parse_crossover(top.raw("crossover"));
  if (top.has("rate")) {
    Block r(top.raw("rate"), "rate");
    if (r.has("beta_c")) c.beta_c = r.positive("beta_c", 1.0);
    const std::string mf = r.string("mf_high_t", "not_available");
    if (mf == "affleck") c.mf_high_t = MfHighT::affleck;
    else if (mf != "not_available") bad("rate.mf_high_t", "expected not_available or affleck");
    c.reactant_kind = kind_of(r.string("reactant_kind", "mf"), "rate.reactant_kind");
    r.finish();
  }
  if (top.has("output")) {
    Block o(top.raw("output"), "output");
    c.out_dir = o.string("dir", c.out_dir);
    c.geometry = o.boolean("geometry", c.geometry);
    o.finish();
  }
  if (top.has("seed")) {
    const json& s = top.raw("seed");
    if (!s.is_number_unsigned()) bad("config.seed", "expected a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  top.finish();

  const bool linear = c.model.type == "linear_crossing";
  if ((c.oracles.quantum_gr || c.oracles.classical_gr || c.oracles.holstein) && !linear)
    bad("oracles", "golden-rule and Holstein oracles need a linear_crossing model");
  if (c.oracles.exact && c.model.type == "spin_boson") bad("oracles.exact", "needs a one-dimensional scattering model");
  if (c.oracles.exact && c.model.type == "parabolic" && c.model.curvature > 0.0)
    bad("oracles.exact", "needs a scattering model (negative curvature)");
  if ((c.oracles.exact || c.oracles.quantum_gr) && c.grid.hbar != 1.0)
    bad("oracles", "scattering and Airy oracles are implemented for hbar = 1");
  if (!c.oracles.benchmark_methods.empty() && c.grid.betas.size() != 1)
    bad("oracles.benchmarks", "published values need a single beta");
  // build one model now so parameter errors surface as config errors
  try {
    for (double d : c.deltas) make_model(c.model, d);
  } catch (const Error& e) {
    bad("model", e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::config, "cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(f, nullptr, true, true);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::config, path + ": " + e.what());
  }
  return parse_config(j);
}

std::unique_ptr<DiabaticModel> make_model(const ModelBlock& m, double delta) {
  if (m.type == "linear_crossing")
    return std::make_unique<LinearCrossingModel>(m.kappa0, m.kappa1, delta, m.v_cross, m.mass, m.reactant_side);
  if (m.type == "parabolic") return std::make_unique<ParabolicModel>(m.curvature, m.offset, delta, m.mass);
  if (m.type == "spin_boson") return std::make_unique<SystemBathModel>(discretize_bath(m.bath, delta));
  fail(ErrorKind::config, "unknown model type '" + m.type + "'");
}

}  // namespace nimf::cli
