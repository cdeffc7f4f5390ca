#include "runner.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>

#include "nimf/benchmark_table.hpp"
#include "nimf/errors.hpp"
#include "nimf/parallel.hpp"

namespace nimf::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

class Progress {
 public:
  explicit Progress(std::size_t total) : total_(total) {}
  void done(const std::string& what, double t) {
    std::lock_guard lock(mu_);
    fmt::print(stderr, "[{}/{}] {} ({:.1f} s)\n", ++count_, total_, what, t);
  }

 private:
  std::mutex mu_;
  std::size_t total_, count_ = 0;
};

// each cell runs on one worker; spare workers go to the cell's inner loops
int inner_workers(int workers, std::size_t cells) {
  return std::max(1, workers / static_cast<int>(std::max<std::size_t>(1, cells)));
}

json saddle_json(const StationaryPoint& sp) {
  return {{"classification", to_string(sp.classification)},
          {"energy", sp.energy},
          {"grad_norm", sp.grad_norm},
          {"iterations", sp.iterations},
          {"b_n", sp.b_n},
          {"n_negative", sp.spectrum.n_negative},
          {"n_zero", sp.spectrum.n_zero},
          {"zero_mode_overlap", sp.zero_mode_overlap}};
}

json rate_json(const RateResult& r) {
  const RateComponents& c = r.components;
  json j = {{"hbar", r.hbar},
            {"above_crossover", r.above_crossover},
            {"components",
             {{"log_im_z", c.log_im_z},
              {"log_z_r", c.log_z_r},
              {"b_n", c.b_n},
              {"omega0", c.omega0},
              {"eta", c.eta},
              {"form", to_string(c.form)},
              {"log_prefactor", c.log_prefactor}}}};
  if (r.saddle) j["saddle"] = saddle_json(*r.saddle);
  return j;
}

void record_failure(ResultRow& row, const std::exception& e) {
  row.error = e.what();
  row.regime = "failed";
  row.log10_k.reset();
}

LinearCrossingParams linear_params(const ModelBlock& m, double delta, double hbar) {
  return {m.kappa0, m.kappa1, delta, m.v_cross, m.mass, hbar};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

std::string opt_number(const std::optional<double>& x, const char* spec) {
  return x && std::isfinite(*x) ? fmt::format(fmt::runtime(spec), *x) : std::string();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) fail(ErrorKind::io, "cannot write " + p.string());
  f << text;
  if (!f) fail(ErrorKind::io, "write failed for " + p.string());
}

}  // namespace

std::vector<ResultRow> run_rates(const ExperimentConfig& c, int workers) {
  struct Cell {
    SurfaceKind kind;
    double delta, beta;
  };
  std::vector<Cell> cells;
  for (SurfaceKind k : c.kinds)
    for (double d : sorted_unique(c.deltas))
      for (double b : sorted_unique(c.grid.betas)) cells.push_back({k, d, b});

  std::vector<ResultRow> rows(cells.size());
  CrossoverCache cache;
  Progress progress(cells.size());
  const int inner = inner_workers(workers, cells.size());
  parallel_for(cells.size(), workers, [&](std::size_t i) {
    const Cell& cell = cells[i];
    ResultRow& row = rows[i];
    row.system = c.system;
    row.kind = to_string(cell.kind);
    row.delta = cell.delta;
    row.beta = cell.beta;
    row.n_beads = c.grid.beads_for(cell.beta);
    const Timer t;
    try {
      const auto model = make_model(c.model, cell.delta);
      row.dim = static_cast<int>(model->dimension());
      RateOptions o;
      o.settings = c.optimizer;
      o.settings.workers = inner;
      o.crossover = c.crossover;
      o.beta_c = c.beta_c;
      o.mf_high_t = c.mf_high_t;
      o.reactant_kind = c.reactant_kind;
      o.cache = &cache;
      RateResult r = compute_rate(*model, RingPolymerGrid(cell.beta, row.n_beads, c.grid.hbar), cell.kind, o);
      row.log10_k = r.log10_k;
      row.regime = to_string(r.regime);
      row.beta_c = r.beta_c;
      row.warnings = r.warnings;
      row.detail = rate_json(r);
      row.saddle = std::move(r.saddle);
    } catch (const std::exception& e) {
      record_failure(row, e);
    }
    row.wall_time = t.seconds();
    progress.done(fmt::format("{} delta={:.6g} beta={:.6g} {}", row.kind, row.delta, row.beta,
                              row.error ? "failed: " + *row.error : fmt::format("log10 k = {:.4f}", *row.log10_k)),
                  row.wall_time);
  });
  return rows;
}

std::vector<ResultRow> run_oracles(const ExperimentConfig& c, int workers) {
  // each oracle returns ln k
  using Eval = std::function<double(const DiabaticModel&, double delta, double beta, int inner, ResultRow&)>;
  std::vector<std::pair<std::string, Eval>> oracles;
  const OracleBlock& ob = c.oracles;
  const double hbar = c.grid.hbar;
  if (ob.exact)
    oracles.emplace_back("exact", [&](const DiabaticModel& m, double, double b, int inner, ResultRow& row) {
      ScatteringNumerics n = ob.scattering;
      n.workers = inner;
      const ScatteringResult s = exact_rate_1d(m, b, n);
      row.detail = {{"x_min", s.x_min}, {"x_max", s.x_max}, {"step", s.step},
                    {"rel_change", s.rel_change}, {"unitarity_error", s.unitarity_error}};
      return std::log(s.rate);
    });
  if (ob.quantum_gr)
    oracles.emplace_back("quantum_gr", [&](const DiabaticModel& m, double, double b, int inner, ResultRow&) {
      GoldenRuleNumerics n;
      n.workers = inner;
      return quantum_gr_log_rate_1d(dynamic_cast<const LinearCrossingModel&>(m), b, n);
    });
  if (ob.classical_gr)
    oracles.emplace_back("classical_gr", [&](const DiabaticModel&, double d, double b, int, ResultRow& row) {
      row.warnings.emplace_back("printed unit-Z_R form divided by the per-length Z_R");
      return std::log(classical_gr_rate(linear_params(c.model, d, hbar), b)) -
             free_particle_log_z(c.model.mass, b, hbar);
    });
  if (ob.holstein)
    oracles.emplace_back("holstein", [&](const DiabaticModel&, double d, double b, int, ResultRow&) {
      return std::log(holstein_rate(linear_params(c.model, d, hbar), b));
    });
  if (ob.eyring)
    oracles.emplace_back("eyring", [&](const DiabaticModel& m, double, double b, int, ResultRow&) {
      return std::log(eyring_rate(m, b, EyringForm::classical, hbar));
    });
  if (ob.eyring_quantum)
    oracles.emplace_back("eyring_quantum", [&](const DiabaticModel& m, double, double b, int, ResultRow&) {
      return std::log(eyring_rate(m, b, EyringForm::quantum_harmonic, hbar));
    });

  struct Cell {
    std::size_t oracle;
    double delta, beta;
  };
  std::vector<Cell> cells;
  for (std::size_t o = 0; o < oracles.size(); ++o)
    for (double d : sorted_unique(c.deltas))
      for (double b : sorted_unique(c.grid.betas)) cells.push_back({o, d, b});

  std::vector<ResultRow> rows(cells.size());
  Progress progress(cells.size());
  const int inner = inner_workers(workers, cells.size());
  parallel_for(cells.size(), workers, [&](std::size_t i) {
    const Cell& cell = cells[i];
    ResultRow& row = rows[i];
    row.system = c.system;
    row.kind = oracles[cell.oracle].first;
    row.delta = cell.delta;
    row.beta = cell.beta;
    row.regime = "oracle";
    const Timer t;
    try {
      const auto model = make_model(c.model, cell.delta);
      row.dim = static_cast<int>(model->dimension());
      const double ln_k = oracles[cell.oracle].second(*model, cell.delta, cell.beta, inner, row);
      if (std::isfinite(ln_k)) row.log10_k = ln_k / std::numbers::ln10;
      else row.warnings.emplace_back(ln_k > 0.0 ? "rate overflows" : "rate is zero");
    } catch (const std::exception& e) {
      record_failure(row, e);
    }
    row.wall_time = t.seconds();
    progress.done(fmt::format("{} delta={:.6g} beta={:.6g}", row.kind, row.delta, row.beta), row.wall_time);
  });

  // published values at the scanned couplings
  const auto& table = BenchmarkTable::embedded();
  for (const auto& method : ob.benchmark_methods)
    for (double d : sorted_unique(c.deltas)) {
      const auto e = table.find(ob.benchmark_system, method, d);
      if (!e || !e->value) continue;
      ResultRow row;
      row.system = c.system;
      row.kind = "published_" + method;
      row.delta = d;
      row.beta = sorted_unique(c.grid.betas).front();
      row.regime = "published";
      row.log10_k = *e->value;
      row.warnings.push_back(e->provenance);
      if (!e->marker.empty()) row.warnings.push_back("marked " + e->marker);
      rows.push_back(std::move(row));
    }
  return rows;
}

std::vector<CrossoverRow> run_crossovers(const ExperimentConfig& c, int workers) {
  struct Cell {
    SurfaceKind kind;
    double delta;
  };
  std::vector<Cell> cells;
  for (SurfaceKind k : c.kinds)
    for (double d : sorted_unique(c.deltas)) cells.push_back({k, d});
  std::vector<CrossoverRow> rows(cells.size());
  Progress progress(cells.size());
  const int inner = inner_workers(workers, cells.size());
  parallel_for(cells.size(), workers, [&](std::size_t i) {
    CrossoverRow& row = rows[i];
    row.system = c.system;
    row.kind = to_string(cells[i].kind);
    row.delta = cells[i].delta;
    const Timer t;
    try {
      const auto model = make_model(c.model, row.delta);
      OptimizerSettings s = c.optimizer;
      s.workers = inner;
      const CrossoverResult r = crossover_beta(*model, cells[i].kind, c.crossover, s);
      row.beta_c = r.beta_c;
      row.lo = r.lo;
      row.hi = r.hi;
      row.n_beads = r.n_beads;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    row.wall_time = t.seconds();
    progress.done(fmt::format("{} delta={:.6g} beta_c={}", row.kind, row.delta,
                              row.error ? "failed: " + *row.error : fmt::format("{:.6f}", *row.beta_c)),
                  row.wall_time);
  });
  return rows;
}

std::vector<ResultRow> run_stationary_points(const ExperimentConfig& c, int workers) {
  struct Cell {
    SurfaceKind kind;
    double delta, beta;
  };
  std::vector<Cell> cells;
  for (SurfaceKind k : c.kinds)
    for (double d : sorted_unique(c.deltas))
      for (double b : sorted_unique(c.grid.betas)) cells.push_back({k, d, b});
  std::vector<ResultRow> rows(cells.size());
  Progress progress(cells.size());
  const int inner = inner_workers(workers, cells.size());
  parallel_for(cells.size(), workers, [&](std::size_t i) {
    const Cell& cell = cells[i];
    ResultRow& row = rows[i];
    row.system = c.system;
    row.kind = to_string(cell.kind);
    row.delta = cell.delta;
    row.beta = cell.beta;
    row.n_beads = c.grid.beads_for(cell.beta);
    const Timer t;
    try {
      const auto model = make_model(c.model, cell.delta);
      row.dim = static_cast<int>(model->dimension());
      OptimizerSettings s = c.optimizer;
      s.workers = inner;
      StationaryPoint sp = find_instanton(*model, RingPolymerGrid(cell.beta, row.n_beads, c.grid.hbar), cell.kind, {}, s);
      row.regime = to_string(sp.classification);
      row.detail = {{"saddle", saddle_json(sp)}};
      row.saddle = std::move(sp);
    } catch (const std::exception& e) {
      record_failure(row, e);
    }
    row.wall_time = t.seconds();
    progress.done(fmt::format("{} delta={:.6g} beta={:.6g} {}", row.kind, row.delta, row.beta, row.regime),
                  row.wall_time);
  });
  return rows;
}

void dump_instanton(const StationaryPoint& sp, const DiabaticModel& model, const fs::path& out) {
  const BeadPath& path = sp.path;
  const RingPolymerGrid grid(sp.beta, path.n_beads());
  const BeadElectronics el = bead_electronics(path, grid, model, sp.kind);
  std::string text = "bead";
  for (Eigen::Index d = 0; d < path.dimension(); ++d) text += fmt::format(",x{}", d);
  text += ",gap,weight0,weight1\n";
  for (int i = 0; i < path.n_beads(); ++i) {
    text += std::to_string(i);
    for (Eigen::Index d = 0; d < path.dimension(); ++d) text += fmt::format(",{:.12g}", path.coords()(i, d));
    text += fmt::format(",{:.12g},{:.12g},{:.12g}\n", el.gap(i), el.weights(i, 0), el.weights(i, 1));
  }
  write_file(out, text);
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string out = "system,kind,delta,beta,N,f,log10_k,regime,beta_c,warnings\n";
  for (const auto& r : rows) {
    std::vector<std::string> notes = r.warnings;
    if (r.error) notes.insert(notes.begin(), "error: " + *r.error);
    out += fmt::format("{},{},{:.10g},{:.10g},{},{},{},{},{},{}\n", csv_field(r.system), r.kind, r.delta, r.beta,
                       r.n_beads > 0 ? std::to_string(r.n_beads) : "", r.dim > 0 ? std::to_string(r.dim) : "",
                       opt_number(r.log10_k, "{:.6f}"), r.regime, opt_number(r.beta_c, "{:.6f}"),
                       csv_field(join(notes, "; ")));
  }
  return out;
}

std::string crossover_csv(const std::vector<CrossoverRow>& rows) {
  std::string out = "system,kind,delta,N,beta_c,lo,hi,error\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{:.10g},{},{},{},{},{}\n", csv_field(r.system), r.kind, r.delta,
                       r.n_beads > 0 ? std::to_string(r.n_beads) : "", opt_number(r.beta_c, "{:.8f}"),
                       opt_number(r.lo, "{:.8f}"), opt_number(r.hi, "{:.8f}"), csv_field(r.error.value_or("")));
  return out;
}

json results_json(const ExperimentConfig& c, const std::vector<ResultRow>& rows) {
  json out = {{"config", c.source}, {"seed", c.seed}, {"rows", json::array()}};
  for (const auto& r : rows) {
    json j = {{"system", r.system},     {"kind", r.kind},       {"delta", r.delta},
              {"beta", r.beta},         {"N", r.n_beads},       {"f", r.dim},
              {"regime", r.regime},     {"warnings", r.warnings}, {"wall_time", r.wall_time}};
    j["log10_k"] = r.log10_k ? json(*r.log10_k) : json(nullptr);
    j["beta_c"] = r.beta_c ? json(*r.beta_c) : json(nullptr);
    j["error"] = r.error ? json(*r.error) : json(nullptr);
    j["detail"] = r.detail;
    if (!r.geometry_file.empty()) j["geometry_file"] = r.geometry_file;
    out["rows"].push_back(std::move(j));
  }
  return out;
}

int write_results(const ExperimentConfig& c, std::vector<ResultRow>& rows, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
  if (c.geometry) {
    for (auto& r : rows) {
      if (!r.saddle) continue;
      const fs::path rel = fs::path("geometry") /
                           fmt::format("{}_delta{:.6g}_beta{:.6g}.csv", r.kind, r.delta, r.beta);
      fs::create_directories(dir / "geometry", ec);
      if (ec) fail(ErrorKind::io, "cannot create geometry directory: " + ec.message());
      dump_instanton(*r.saddle, *make_model(c.model, r.delta), dir / rel);
      r.geometry_file = rel.generic_string();
    }
  }
  write_file(dir / "results.csv", results_csv(rows));
  write_file(dir / "results.json", results_json(c, rows).dump(2) + "\n");
  return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const ResultRow& r) { return r.error.has_value(); }));
}

}  // namespace nimf::cli
