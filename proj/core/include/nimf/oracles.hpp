#pragma once

#include <optional>
#include <vector>

#include "nimf/models.hpp"

namespace nimf {

enum class ScatteringSolver { log_derivative, green_function };

struct ScatteringNumerics {
  double step = 0.01;                  // spatial grid spacing
  std::optional<double> x_min, x_max;  // default: chosen from the energy window
  double asymptotic_kinetic = 30.0;    // energy margin of open and closed channels at the boundaries
  double window = 40.0;                // integrand kept down to e^{-window} of its peak
  double rel_tol = 5e-3;               // step-halving convergence of the rate
  int max_halvings = 4;
  int workers = 1;
};

struct ChannelFlux {
  double transmission = 0.0;
  double reflection = 0.0;
};

struct TransmissionPoint {
  double energy = 0.0;
  double cumulative = 0.0;            // N(E)
  std::vector<ChannelFlux> channels;  // per open incoming channel (log-derivative only)
};

// N(E) for the model truncated to [x_min, x_max] with constant continuation outside
TransmissionPoint transmission(const DiabaticModel& model, double energy, double x_min,
                               double x_max, double step, ScatteringSolver solver);

struct ScatteringResult {
  double rate = 0.0;  // per unit reactant density
  std::vector<double> energy;
  std::vector<double> cumulative;
  double unitarity_error = 0.0;  // max |T + R − 1| over energies and channels
  double x_min = 0.0, x_max = 0.0, step = 0.0;
  double rel_change = 0.0;  // between the last two step sizes
  std::vector<std::pair<double, double>> step_history;  // (step, rate)
};

ScatteringResult exact_rate_1d(const DiabaticModel& model, double beta,
                               const ScatteringNumerics& numerics = {},
                               ScatteringSolver solver = ScatteringSolver::log_derivative);

struct GoldenRuleNumerics {
  double window = 36.0;
  double rel_tol = 1e-8;  // energy quadrature, panel doubling
  bool spatial_quadrature = false;  // overlaps by quadrature instead of the closed form
  int workers = 1;
};

// ⟨χ0(E)|χ1(E)⟩ of energy-normalized Airy states, by spatial quadrature
double airy_overlap(const LinearCrossingModel& model, double energy, double rel_tol = 1e-10);
// same overlap from the closed-form integral of two Airy functions
double airy_overlap_exact(const LinearCrossingModel& model, double energy);

double quantum_gr_rate_1d(const LinearCrossingModel& model, double beta,
                          const GoldenRuleNumerics& numerics = {});
// natural log; stays finite where the rate itself over- or underflows
double quantum_gr_log_rate_1d(const LinearCrossingModel& model, double beta,
                              const GoldenRuleNumerics& numerics = {});

struct LinearCrossingParams {
  double kappa0 = 1.0, kappa1 = -1.0, delta = 0.0, v_cross = 0.0, mass = 1.0, hbar = 1.0;
};

// printed closed form; normalized to a unit reactant partition function
double classical_gr_rate(const LinearCrossingParams& p, double beta);
// Landau-Zener/Holstein thermal average, per unit reactant density
double holstein_rate(const LinearCrossingParams& p, double beta);
// second quadrature scheme for the same integral (log-spaced composite Gauss-Legendre)
double holstein_rate_log_grid(const LinearCrossingParams& p, double beta);

// harmonic TST on the lower adiabat; quantum_harmonic uses quantum vibrational partition functions
enum class EyringForm { classical, quantum_harmonic };
double eyring_rate(const DiabaticModel& model, double beta,
                   EyringForm form = EyringForm::classical, double hbar = 1.0);
double eyring_rate(const AdiabatInfo& info, bool bound, double mass, double beta,
                   EyringForm form = EyringForm::classical, double hbar = 1.0);

double interpolation_formula(double k_gr, double k_bo, double k_bo_at_zero);

struct GrLinearAnalytics {
  double omega0 = 0.0;
  double beta_c = 0.0;
  double k_nimf_symmetric = 0.0;   // ratio · classical golden rule
  double k_nimf_asymmetric = 0.0;  // closed form for general slopes
  double ratio = 0.0;              // 6√6/π^{5/2}
};

GrLinearAnalytics gr_linear_analytics(const LinearCrossingParams& p, double beta);

}  // namespace nimf
