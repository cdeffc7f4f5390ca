#include "nimf/rates.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "nimf/errors.hpp"

namespace nimf {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

std::string to_string(Regime r) {
  return r == Regime::deep_tunnelling ? "deep_tunnelling" : "high_temperature";
}

std::string to_string(PartitionOrigin o) {
  return o == PartitionOrigin::steepest_descent ? "steepest_descent" : "free_particle";
}

std::string to_string(PrefactorForm p) {
  switch (p) {
    case PrefactorForm::deep_tunnelling: return "deep_tunnelling";
    case PrefactorForm::affleck: return "affleck";
    case PrefactorForm::nimf_high_t: return "nimf_high_t";
  }
  return "unknown";
}

double free_particle_log_z(double mass, double beta, double hbar) {
  if (!(mass > 0.0 && beta > 0.0 && hbar > 0.0))
    fail(ErrorKind::invalid_input, "free-particle partition function needs positive m, β, ħ");
  return 0.5 * std::log(mass / (kTwoPi * beta * hbar * hbar));
}

PartitionFactors partition_from_minimum(const StationaryPoint& sp, const RingPolymerGrid& grid) {
  const Vec& lam = sp.spectrum.eigenvalues;
  if (lam.size() == 0 || !(lam.minCoeff() > 0.0))
    fail(ErrorKind::invalid_state, "reactant has imaginary or zero frequencies");
  PartitionFactors z;
  z.origin = PartitionOrigin::steepest_descent;
  const double bh = grid.beta_n() * grid.hbar();
  for (Eigen::Index k = 0; k < lam.size(); ++k) z.log_mode_product += std::log(bh * std::sqrt(lam(k)));
  z.action = grid.beta_n() * sp.energy;
  z.n_modes = static_cast<int>(lam.size());
  z.log_z = -z.log_mode_product - z.action;
  return z;
}

PartitionFactors reactant_partition(const DiabaticModel& model, const RingPolymerGrid& grid,
                                    SurfaceKind kind, const OptimizerSettings& settings) {
  if (!model.bound_reactant()) {
    if (model.dimension() != 1)
      fail(ErrorKind::unsupported_model, "free-particle reactants are implemented for 1D models");
    PartitionFactors z;
    z.log_z = free_particle_log_z(model.masses()(0), grid.beta(), grid.hbar());
    return z;
  }
  const StationaryPoint sp = minimize_reactant(model, grid, kind, model.reactant_guess(), settings);
  return partition_from_minimum(sp, grid);
}

ImZFactors im_z_instanton(const StationaryPoint& sp, const RingPolymerGrid& grid) {
  if (sp.classification != PointClass::instanton)
    fail(ErrorKind::invalid_state, "stationary point is not an instanton");
  if (sp.spectrum.n_negative != 1 || sp.spectrum.n_zero != 1) {
    std::string msg = "instanton needs exactly one negative and one near-zero mode, found " +
                      std::to_string(sp.spectrum.n_negative) + " and " + std::to_string(sp.spectrum.n_zero);
    const Vec& lam = sp.spectrum.eigenvalues;
    if (sp.spectrum.n_zero == 0 && sp.zero_mode >= 0 && sp.zero_mode < lam.size()) {
      std::ostringstream os;
      os.precision(3);
      os << "; tangent mode has λ/max|λ| = " << std::abs(lam(sp.zero_mode)) / lam.cwiseAbs().maxCoeff()
         << " (bead spacing too coarse for the potential, increase N)";
      msg += os.str();
    }
    fail(ErrorKind::invalid_state, msg);
  }
  if (!(sp.b_n > 0.0)) fail(ErrorKind::invalid_state, "instanton has no zero-mode volume (B_N = 0)");
  const Vec& lam = sp.spectrum.eigenvalues;
  Eigen::Index zero = sp.zero_mode;
  if (zero < 0 || !sp.spectrum.is_zero(zero))
    for (Eigen::Index k = 0; k < lam.size(); ++k)
      if (sp.spectrum.is_zero(k)) zero = k;
  ImZFactors f;
  const double bn = grid.beta_n(), bh = bn * grid.hbar();
  for (Eigen::Index k = 0; k < lam.size(); ++k)
    if (k != zero) f.log_mode_product += std::log(bh * std::sqrt(std::abs(lam(k))));
  f.b_n = sp.b_n;
  f.log_zero_mode = std::log(0.5 * grid.n_beads()) +
                    0.5 * std::log(sp.b_n / (kTwoPi * bn * grid.hbar() * grid.hbar()));
  f.action = bn * sp.energy;
  f.omega_unstable = std::sqrt(-lam(0));
  f.log_im_z = f.log_zero_mode - f.log_mode_product - f.action;
  return f;
}

ImZFactors im_z_collapsed(const StationaryPoint& sp, const RingPolymerGrid& grid) {
  if (sp.classification != PointClass::collapsed_barrier)
    fail(ErrorKind::invalid_state, "stationary point is not a collapsed barrier");
  if (sp.spectrum.n_zero != 0)
    fail(ErrorKind::invalid_state, "collapsed barrier has a near-zero mode (too close to crossover)");
  if (sp.spectrum.n_negative != 1)
    fail(ErrorKind::invalid_state, "collapsed barrier needs exactly one negative mode, found " +
                                       std::to_string(sp.spectrum.n_negative));
  const Vec& lam = sp.spectrum.eigenvalues;
  ImZFactors f;
  const double bh = grid.beta_n() * grid.hbar();
  for (Eigen::Index k = 0; k < lam.size(); ++k) f.log_mode_product += std::log(bh * std::sqrt(std::abs(lam(k))));
  f.action = grid.beta_n() * sp.energy;
  f.omega_unstable = std::sqrt(-lam(0));
  f.log_im_z = std::log(0.5) - f.log_mode_product - f.action;
  return f;
}

double RateResult::log_k() const { return log10_k * std::numbers::ln10; }

namespace {

double prefactor(PrefactorForm form, double beta, double beta_c, double hbar, double omega0,
                 double eta) {
  switch (form) {
    case PrefactorForm::deep_tunnelling: return std::log(2.0 / (beta * hbar));
    case PrefactorForm::affleck: return std::log(omega0 / std::numbers::pi);
    case PrefactorForm::nimf_high_t:
      return std::log(2.0 / hbar) + std::log(beta / beta_c) +
             eta * std::log(beta_c * hbar * omega0 / kTwoPi) - std::log(beta);
  }
  return 0.0;
}

RateResult assemble(const ImZFactors& imz, const PartitionFactors& zr, const RingPolymerGrid& grid,
                    PrefactorForm form, double beta_c, double omega0, double eta) {
  RateResult r;
  r.beta = grid.beta();
  r.beta_c = beta_c;
  r.hbar = grid.hbar();
  r.n_beads = grid.n_beads();
  r.regime = form == PrefactorForm::deep_tunnelling ? Regime::deep_tunnelling : Regime::high_temperature;
  RateComponents& c = r.components;
  c.log_im_z = imz.log_im_z;
  c.log_z_r = zr.log_z;
  c.b_n = imz.b_n;
  c.omega0 = omega0;
  c.eta = eta;
  c.form = form;
  c.log_prefactor = prefactor(form, r.beta, beta_c, r.hbar, omega0, eta);
  r.log10_k = (c.log_prefactor + c.log_im_z - c.log_z_r) / std::numbers::ln10;
  if (!std::isfinite(r.log10_k)) fail(ErrorKind::numerical, "rate is not finite");
  return r;
}

}  // namespace

double reconstruct_log10_k(const RateResult& r) {
  const RateComponents& c = r.components;
  const double lp = prefactor(c.form, r.beta, r.beta_c, r.hbar, c.omega0, c.eta);
  return (lp + c.log_im_z - c.log_z_r) / std::numbers::ln10;
}

RateResult rate_deep_tunnelling(const ImZFactors& imz, const PartitionFactors& zr,
                                const RingPolymerGrid& grid) {
  return assemble(imz, zr, grid, PrefactorForm::deep_tunnelling, 0.0, imz.omega_unstable, 0.0);
}

RateResult rate_high_t_bo(const ImZFactors& imz, const PartitionFactors& zr,
                          const RingPolymerGrid& grid, double omega_b) {
  if (!(omega_b > 0.0)) fail(ErrorKind::invalid_input, "barrier frequency must be positive");
  return assemble(imz, zr, grid, PrefactorForm::affleck, kTwoPi / (grid.hbar() * omega_b), omega_b,
                  1.0);
}

RateResult rate_high_t_nimf(const ImZFactors& imz, const PartitionFactors& zr,
                            const RingPolymerGrid& grid, double beta_c, double omega0) {
  if (!(omega0 > 0.0)) fail(ErrorKind::invalid_state, "collapsed polymer has no unstable mode");
  if (!(beta_c > 0.0)) fail(ErrorKind::invalid_input, "crossover temperature must be positive");
  return assemble(imz, zr, grid, PrefactorForm::nimf_high_t, beta_c, omega0, -2.0);
}

double CrossoverCache::get(const DiabaticModel& model, SurfaceKind kind, const CrossoverOptions& opts,
                           const OptimizerSettings& settings) {
  std::ostringstream key;
  key.precision(17);
  key << model.name() << '|' << to_string(kind) << '|' << model.dimension();
  for (const auto& [k, v] : model.parameters()) key << '|' << k << '=' << v;
  key << '|' << opts.n_beads << '|' << opts.beta_n_max << '|' << opts.rel_tol;
  if (opts.bracket) key << '|' << opts.bracket->first << ',' << opts.bracket->second;
  {
    std::lock_guard lock(mu_);
    if (auto it = values_.find(key.str()); it != values_.end()) return it->second;
  }
  const double bc = crossover_beta(model, kind, opts, settings).beta_c;
  std::lock_guard lock(mu_);
  values_.emplace(key.str(), bc);
  return bc;
}

RateResult compute_rate(const DiabaticModel& model, const RingPolymerGrid& grid, SurfaceKind kind,
                        const RateOptions& o) {
  const double beta = grid.beta();
  double beta_c = 0.0;
  if (o.beta_c) beta_c = *o.beta_c;
  else if (o.cache) beta_c = o.cache->get(model, kind, o.crossover, o.settings);
  else beta_c = crossover_beta(model, kind, o.crossover, o.settings).beta_c;

  const SurfaceKind reactant_kind = kind == SurfaceKind::bo ? SurfaceKind::bo : o.reactant_kind;
  const PartitionFactors zr = reactant_partition(model, grid, reactant_kind, o.settings);

  std::vector<std::string> warnings;
  RateResult r;
  std::optional<StationaryPoint> saddle;
  bool deep = beta > beta_c;
  if (deep) {
    StationaryPoint sp = find_instanton(model, grid, kind, o.guess, o.settings);
    if (sp.classification == PointClass::instanton) {
      r = rate_deep_tunnelling(im_z_instanton(sp, grid), zr, grid);
      saddle = std::move(sp);
    } else {
      warnings.emplace_back("instanton collapsed below the computed crossover; high-temperature formula used");
      deep = false;
    }
  }
  if (!deep) {
    StationaryPoint sp = find_collapsed_barrier(model, grid, kind, o.settings,
                                                o.guess.centre ? o.guess.centre : std::nullopt);
    const ImZFactors imz = im_z_collapsed(sp, grid);
    switch (kind) {
      case SurfaceKind::bo: r = rate_high_t_bo(imz, zr, grid, imz.omega_unstable); break;
      case SurfaceKind::nimf: r = rate_high_t_nimf(imz, zr, grid, beta_c, imz.omega_unstable); break;
      case SurfaceKind::mf:
        if (o.mf_high_t == MfHighT::not_available)
          fail(ErrorKind::not_available, "no high-temperature rate is defined on the mean-field surface");
        r = rate_high_t_bo(imz, zr, grid, imz.omega_unstable);
        warnings.emplace_back("mean-field high-temperature rate uses the adiabatic prefactor");
        break;
    }
    r.above_crossover = true;
    warnings.emplace_back("above-crossover value, marked *");
    saddle = std::move(sp);
  }
  r.beta_c = beta_c;
  r.kind = kind;
  if (std::abs(beta / beta_c - 1.0) < 0.1) warnings.emplace_back("within 10% of beta_c");
  r.warnings.insert(r.warnings.begin(), warnings.begin(), warnings.end());
  if (o.keep_saddle) r.saddle = std::move(saddle);
  return r;
}

}  // namespace nimf
