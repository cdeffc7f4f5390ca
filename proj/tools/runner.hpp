#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "nimf/saddle.hpp"

namespace nimf::cli {

struct ResultRow {
  std::string system;
  std::string kind;  // surface kind, or oracle name
  double delta = 0.0;
  double beta = 0.0;
  int n_beads = 0;  // 0 for oracles
  int dim = 0;
  std::optional<double> log10_k;
  std::string regime;  // deep_tunnelling, high_temperature, oracle, published, failed
  std::optional<double> beta_c;
  std::vector<std::string> warnings;
  double wall_time = 0.0;
  std::optional<std::string> error;
  nlohmann::json detail = nlohmann::json::object();
  std::optional<StationaryPoint> saddle;
  std::string geometry_file;
};

struct CrossoverRow {
  std::string system, kind;
  double delta = 0.0;
  int n_beads = 0;
  std::optional<double> beta_c, lo, hi;
  double wall_time = 0.0;
  std::optional<std::string> error;
};

std::vector<ResultRow> run_rates(const ExperimentConfig& c, int workers);
std::vector<ResultRow> run_oracles(const ExperimentConfig& c, int workers);
std::vector<CrossoverRow> run_crossovers(const ExperimentConfig& c, int workers);
// stationary points only (instanton below crossover, collapsed barrier above)
std::vector<ResultRow> run_stationary_points(const ExperimentConfig& c, int workers);

// bead, coordinates, diabatic gap, per-bead electronic weights
void dump_instanton(const StationaryPoint& sp, const DiabaticModel& model,
                    const std::filesystem::path& out);

std::string results_csv(const std::vector<ResultRow>& rows);
std::string crossover_csv(const std::vector<CrossoverRow>& rows);
nlohmann::json results_json(const ExperimentConfig& c, const std::vector<ResultRow>& rows);

// writes results.csv, results.json and geometry files; returns the number of failed rows
int write_results(const ExperimentConfig& c, std::vector<ResultRow>& rows, const std::filesystem::path& dir);

}  // namespace nimf::cli
