#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "nimf/saddle.hpp"

namespace nimf {

enum class Regime { deep_tunnelling, high_temperature };
std::string to_string(Regime r);

enum class PartitionOrigin { steepest_descent, free_particle };
std::string to_string(PartitionOrigin o);

struct PartitionFactors {
  double log_z = 0.0;
  PartitionOrigin origin = PartitionOrigin::free_particle;
  double log_mode_product = 0.0;  // Σ ln(β_N ħ ω_k)
  double action = 0.0;            // β_N U_RP at the minimum
  int n_modes = 0;
};

// ½ ln(m / 2πβħ²): reactant density of a free particle per unit length
double free_particle_log_z(double mass, double beta, double hbar = 1.0);

// bound reactants: steepest descent about the minimum of `kind`; scattering: free particle per length
PartitionFactors reactant_partition(const DiabaticModel& model, const RingPolymerGrid& grid,
                                    SurfaceKind kind, const OptimizerSettings& settings = {});
PartitionFactors partition_from_minimum(const StationaryPoint& sp, const RingPolymerGrid& grid);

struct ImZFactors {
  double log_im_z = 0.0;
  double log_mode_product = 0.0;  // primed for instantons
  double action = 0.0;            // β_N U_RP
  double log_zero_mode = 0.0;     // ln(N/2) + ½ ln(B_N / 2πβ_Nħ²), instantons only
  double b_n = 0.0;
  double omega_unstable = 0.0;    // |ω| of the negative mode
};

ImZFactors im_z_instanton(const StationaryPoint& sp, const RingPolymerGrid& grid);
ImZFactors im_z_collapsed(const StationaryPoint& sp, const RingPolymerGrid& grid);

enum class PrefactorForm { deep_tunnelling, affleck, nimf_high_t };
std::string to_string(PrefactorForm p);

struct RateComponents {
  double log_im_z = 0.0;
  double log_z_r = 0.0;
  double b_n = 0.0;
  double omega0 = 0.0;  // |ω| of the unstable mode
  double eta = 0.0;
  PrefactorForm form = PrefactorForm::deep_tunnelling;
  double log_prefactor = 0.0;
};

struct RateResult {
  double log10_k = 0.0;
  Regime regime = Regime::deep_tunnelling;
  double beta = 0.0;
  double beta_c = 0.0;
  double hbar = 1.0;
  int n_beads = 0;
  SurfaceKind kind = SurfaceKind::bo;
  RateComponents components;
  std::vector<std::string> warnings;
  bool above_crossover = false;  // tables print these with "*"
  std::optional<StationaryPoint> saddle;

  double log_k() const;
};

// log10 k recomputed from the stored components alone
double reconstruct_log10_k(const RateResult& r);

RateResult rate_deep_tunnelling(const ImZFactors& imz, const PartitionFactors& zr,
                                const RingPolymerGrid& grid);
RateResult rate_high_t_bo(const ImZFactors& imz, const PartitionFactors& zr,
                          const RingPolymerGrid& grid, double omega_b);
RateResult rate_high_t_nimf(const ImZFactors& imz, const PartitionFactors& zr,
                            const RingPolymerGrid& grid, double beta_c, double omega0);

// mean-field surface above crossover has no rate of its own; `affleck` borrows the adiabatic form
enum class MfHighT { not_available, affleck };

// thread-safe memo of crossover temperatures keyed by (model, kind)
class CrossoverCache {
 public:
  double get(const DiabaticModel& model, SurfaceKind kind, const CrossoverOptions& opts,
             const OptimizerSettings& settings);

 private:
  std::mutex mu_;
  std::map<std::string, double> values_;
};

struct RateOptions {
  OptimizerSettings settings;
  CrossoverOptions crossover;
  std::optional<double> beta_c;  // skips the crossover search
  InstantonGuess guess;
  MfHighT mf_high_t = MfHighT::not_available;
  // reactant surface used for MF and NIMF rates of bound systems
  SurfaceKind reactant_kind = SurfaceKind::mf;
  bool keep_saddle = true;
  CrossoverCache* cache = nullptr;
};

RateResult compute_rate(const DiabaticModel& model, const RingPolymerGrid& grid, SurfaceKind kind,
                        const RateOptions& options = {});

}  // namespace nimf
