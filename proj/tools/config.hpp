#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nimf/models.hpp"
#include "nimf/oracles.hpp"
#include "nimf/rates.hpp"

namespace nimf::cli {

struct ModelBlock {
  std::string type;  // linear_crossing | parabolic | spin_boson
  // linear crossing
  double kappa0 = 1.0, kappa1 = -1.0, v_cross = 0.0;
  int reactant_side = -1;
  // parabolic
  double curvature = -1.0, offset = 0.0;
  // shared
  double delta = 0.1, mass = 1.0;
  BathSpec bath;
};

struct GridBlock {
  std::vector<double> betas;
  int n_beads = 0;          // fixed N; 0 uses beta_n_max
  double beta_n_max = 0.1;  // N = max(n_min, ceil(β/beta_n_max))
  int n_min = 16;
  double hbar = 1.0;

  int beads_for(double beta) const;
};

struct OracleBlock {
  bool exact = false;
  bool quantum_gr = false;
  bool classical_gr = false;
  bool holstein = false;
  bool eyring = false;
  bool eyring_quantum = false;
  std::string benchmark_system;          // rows copied from the published tables
  std::vector<std::string> benchmark_methods;
  ScatteringNumerics scattering;

  bool any() const;
};

struct ExperimentConfig {
  std::string system;
  ModelBlock model;
  GridBlock grid;
  std::vector<double> deltas;  // scan; defaults to the model's Δ
  std::vector<SurfaceKind> kinds;
  OracleBlock oracles;
  OptimizerSettings optimizer;
  CrossoverOptions crossover;
  std::optional<double> beta_c;
  MfHighT mf_high_t = MfHighT::not_available;
  SurfaceKind reactant_kind = SurfaceKind::mf;
  std::string out_dir = "out";
  bool geometry = true;
  std::uint64_t seed = 0;
  nlohmann::json source;  // as read, echoed into results.json
};

// throws Error(config) with a message naming the offending key
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

std::unique_ptr<DiabaticModel> make_model(const ModelBlock& m, double delta);

}  // namespace nimf::cli
