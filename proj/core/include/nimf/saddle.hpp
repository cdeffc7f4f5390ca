#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nimf/rp_potential.hpp"

namespace nimf {

enum class PointClass { minimum, instanton, collapsed_barrier };
std::string to_string(PointClass c);

struct StationaryPoint {
  BeadPath path;
  SurfaceKind kind = SurfaceKind::bo;
  double beta = 0.0;
  double energy = 0.0;  // U_RP
  double grad_norm = 0.0;
  ModeSpectrum spectrum;
  PointClass classification = PointClass::minimum;
  double b_n = 0.0;  // Σ m (x_i − x_{i+1})²
  int iterations = 0;
  int zero_mode = -1;            // index into the spectrum, instantons only
  double zero_mode_overlap = 0.0;  // with the normalized path tangent
};

double path_b_n(const BeadPath& path, const Vec& masses);

StationaryPoint minimize_reactant(const DiabaticModel& model, const RingPolymerGrid& grid,
                                  SurfaceKind kind, const Vec& x_init,
                                  const OptimizerSettings& settings = {});

struct InstantonGuess {
  std::optional<BeadPath> path;  // continuation from a neighbouring β or Δ
  std::optional<Vec> centre;     // default: collapse point of the surface
};

StationaryPoint find_instanton(const DiabaticModel& model, const RingPolymerGrid& grid,
                               SurfaceKind kind, const InstantonGuess& guess = {},
                               const OptimizerSettings& settings = {});

// stationary point of the collapsed effective potential (index 1 in f dimensions)
Vec collapse_point(const DiabaticModel& model, double beta, SurfaceKind kind,
                   const OptimizerSettings& settings = {}, std::optional<Vec> guess = std::nullopt);

StationaryPoint find_collapsed_barrier(const DiabaticModel& model, const RingPolymerGrid& grid,
                                       SurfaceKind kind, const OptimizerSettings& settings = {},
                                       std::optional<Vec> guess = std::nullopt);

// collapsed path held at a given point (not optimized); spectrum from the circulant structure
StationaryPoint collapsed_at(const DiabaticModel& model, const RingPolymerGrid& grid,
                             SurfaceKind kind, const Vec& x, const OptimizerSettings& settings = {});

struct CrossoverOptions {
  std::optional<std::pair<double, double>> bracket;
  double beta_n_max = 0.1;
  int n_beads = 0;      // fixed bead count for the bisection; 0 derives it from beta_n_max
  double rel_tol = 1e-4;
};

struct CrossoverResult {
  double beta_c = 0.0;
  double lo = 0.0, hi = 0.0;
  SurfaceKind kind = SurfaceKind::bo;
  int n_beads = 0;
  std::vector<std::pair<double, double>> trace;  // (β, tracked eigenvalue)
};

// second-smallest mass-weighted eigenvalue at the collapsed barrier
double tracked_eigenvalue(const DiabaticModel& model, double beta, int n_beads, SurfaceKind kind,
                          const OptimizerSettings& settings = {});

CrossoverResult crossover_beta(const DiabaticModel& model, SurfaceKind kind,
                               const CrossoverOptions& opts = {},
                               const OptimizerSettings& settings = {});

}  // namespace nimf
