#include <CLI11.hpp>
#include <fmt/core.h>

#include <filesystem>
#include <fstream>

#include "config.hpp"
#include "nimf/errors.hpp"
#include "nimf/parallel.hpp"
#include "runner.hpp"

namespace fs = std::filesystem;
using namespace nimf;
using namespace nimf::cli;

namespace {

constexpr int kOk = 0, kConfigError = 1, kPartial = 2;

void print_rows(const std::vector<ResultRow>& rows) {
  for (const auto& r : rows) {
    const std::string k = r.log10_k ? fmt::format("{:10.4f}", *r.log10_k) : fmt::format("{:>10}", "-");
    fmt::print("{:<16} delta={:<10.4g} beta={:<8.4g} log10 k={} {}{}\n", r.kind, r.delta, r.beta, k, r.regime,
               r.error ? "  [" + *r.error + "]" : "");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonadiabatic ring-polymer instanton rates"};
  app.require_subcommand(1);
  std::string config_path, out_override;
  int workers = 1;
  std::optional<std::uint64_t> seed;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_override, "output directory (overrides output.dir)");
    sub->add_option("--workers", workers, "worker threads")->check(CLI::Range(1, 1024));
    sub->add_option("--seed", seed, "random seed (recorded; overrides the config)");
  };
  auto* rate = app.add_subcommand("rate", "rate coefficients at a single coupling and temperature");
  auto* scan = app.add_subcommand("scan", "rate coefficients over the coupling and temperature scan");
  auto* cross = app.add_subcommand("crossover", "crossover temperatures for each kind and coupling");
  auto* oracle = app.add_subcommand("oracle", "reference rates only");
  auto* dump = app.add_subcommand("dump-instanton", "stationary-point geometries");
  auto* validate = app.add_subcommand("validate-config", "check a configuration and exit");
  for (auto* s : {rate, scan, cross, oracle, dump, validate}) common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  ExperimentConfig c;
  try {
    c = load_config(config_path);
    if (seed) c.seed = *seed;
    if (rate->parsed() && (c.deltas.size() != 1 || c.grid.betas.size() != 1))
      fail(ErrorKind::config, "'rate' runs a single coupling and temperature; use 'scan' for lists");
    if ((rate->parsed() || scan->parsed() || cross->parsed() || dump->parsed()) && c.kinds.empty())
      fail(ErrorKind::config, "no surface kinds given");
    if (oracle->parsed() && !c.oracles.any()) fail(ErrorKind::config, "no oracles requested");
  } catch (const Error& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfigError;
  }
  if (validate->parsed()) {
    fmt::print("{}: ok ({} kinds, {} couplings, {} temperatures)\n", config_path, c.kinds.size(), c.deltas.size(),
               c.grid.betas.size());
    return kOk;
  }
  const fs::path out = out_override.empty() ? fs::path(c.out_dir) : fs::path(out_override);

  try {
    int failed = 0;
    if (cross->parsed()) {
      const auto rows = run_crossovers(c, workers);
      fs::create_directories(out);
      std::ofstream(out / "crossover.csv", std::ios::binary) << crossover_csv(rows);
      for (const auto& r : rows) {
        fmt::print("{:<6} delta={:<10.4g} N={:<5} beta_c={}\n", r.kind, r.delta, r.n_beads,
                   r.beta_c ? fmt::format("{:.6f}", *r.beta_c) : "failed: " + r.error.value_or(""));
        failed += r.error.has_value();
      }
    } else {
      std::vector<ResultRow> rows;
      if (dump->parsed()) {
        rows = run_stationary_points(c, workers);
        c.geometry = true;
      } else {
        if (!oracle->parsed()) rows = run_rates(c, workers);
        if (c.oracles.any()) {
          auto extra = run_oracles(c, workers);
          rows.insert(rows.end(), std::make_move_iterator(extra.begin()), std::make_move_iterator(extra.end()));
        }
      }
      failed = write_results(c, rows, out);
      print_rows(rows);
    }
    fmt::print(stderr, "results in {}\n", out.string());
    return failed > 0 ? kPartial : kOk;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kConfigError;
  }
}
