#include "nimf/oracles.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/airy.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "nimf/errors.hpp"
#include "nimf/parallel.hpp"

namespace nimf {

namespace {

constexpr double kPi = std::numbers::pi;
using GL = boost::math::quadrature::gauss<double, 10>;

// nodes and weights of a composite 10-point Gauss-Legendre rule
void composite_rule(double lo, double hi, int panels, std::vector<double>& x, std::vector<double>& w) {
  x.clear();
  w.clear();
  const double pw = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double c = lo + (p + 0.5) * pw;
    for (std::size_t q = 0; q < GL::abscissa().size(); ++q) {
      const double a = GL::abscissa()[q], wt = GL::weights()[q] * 0.5 * pw;
      x.push_back(c + 0.5 * pw * a);
      w.push_back(wt);
      if (a != 0.0) {
        x.push_back(c - 0.5 * pw * a);
        w.push_back(wt);
      }
    }
  }
}

// ln ∫ exp(g(E)) dE for a single-peaked log-integrand, window found by probing
double log_peak_integral(const std::function<double(double)>& g, double centre, double scale,
                         double window, double rel_tol, int workers) {
  double lo = centre - 20.0 * scale, hi = centre + 20.0 * scale;
  constexpr int probes = 64;
  std::vector<double> v(probes);
  for (int it = 0;; ++it) {
    const double de = (hi - lo) / (probes - 1);
    parallel_for(probes, workers, [&](std::size_t k) { v[k] = g(lo + k * de); });
    const double vmax = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(vmax)) return -std::numeric_limits<double>::infinity();
    const bool lo_open = v.front() > vmax - window, hi_open = v.back() > vmax - window;
    if (!lo_open && !hi_open) {
      int first = 0, last = probes - 1;
      while (v[first + 1] < vmax - window) ++first;
      while (v[last - 1] < vmax - window) --last;
      const double l = lo + first * de, h = lo + last * de;
      lo = l;
      hi = h;
      break;
    }
    if (it > 20) fail(ErrorKind::numerical, "integration window did not close");
    const double width = hi - lo;
    if (lo_open) lo -= width;
    if (hi_open) hi += width;
  }
  std::vector<double> x, w;
  double prev = 0.0, shift = 0.0;
  for (int panels = 8; panels <= 4096; panels *= 2) {
    composite_rule(lo, hi, panels, x, w);
    std::vector<double> gv(x.size());
    parallel_for(x.size(), workers, [&](std::size_t k) { gv[k] = g(x[k]); });
    if (panels == 8) shift = *std::max_element(gv.begin(), gv.end());
    double sum = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) sum += w[k] * std::exp(gv[k] - shift);
    if (panels > 8 && std::abs(sum - prev) <= rel_tol * sum) return std::log(sum) + shift;
    prev = sum;
  }
  fail(ErrorKind::numerical, "energy quadrature did not converge");
}

void require_distinct(double k0, double k1) {
  if (!(std::isfinite(k0) && std::isfinite(k1)) || k0 == k1)
    fail(ErrorKind::invalid_input, "diabatic slopes must differ");
}

struct AiryState {
  double scale;   // s·α
  double turn;    // classical turning point
  double norm;    // α/√|κ|
};

AiryState airy_state(double kappa, double v_cross, double mass, double energy) {
  const double alpha = std::cbrt(2.0 * mass * std::abs(kappa));
  return {std::copysign(alpha, kappa), (energy - v_cross) / kappa, alpha / std::sqrt(std::abs(kappa))};
}

// ln|Ai(z)|, with the asymptotic series where Ai underflows
double log_abs_airy_ai(double z) {
  if (z < 20.0) return std::log(std::abs(boost::math::airy_ai(z)));
  const double zeta = 2.0 / 3.0 * z * std::sqrt(z);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= 12; ++k) {
    term *= -(6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / ((2.0 * k - 1.0) * 216.0 * k * zeta);
    sum += term;
  }
  return -zeta - std::log(2.0 * std::sqrt(kPi) * std::sqrt(std::sqrt(z))) + std::log(sum);
}

void require_opposite(const LinearCrossingModel& m) {
  require_distinct(m.kappa0(), m.kappa1());
  if (m.kappa0() * m.kappa1() >= 0.0)
    fail(ErrorKind::unsupported_model, "Airy overlaps need diabats of opposite slope");
}

}  // namespace

double airy_overlap(const LinearCrossingModel& model, double energy, double rel_tol) {
  require_opposite(model);
  const AiryState a = airy_state(model.kappa0(), model.v_cross(), model.mass(), energy);
  const AiryState b = airy_state(model.kappa1(), model.v_cross(), model.mass(), energy);
  auto f = [&](double x) {
    return boost::math::airy_ai(a.scale * (x - a.turn)) * boost::math::airy_ai(b.scale * (x - b.turn));
  };
  // beyond ±40 in the Airy argument of the decaying factor the integrand is below e^{-160}
  const double reach = 40.0 / std::min(std::abs(a.scale), std::abs(b.scale));
  const double lo = std::min(a.turn, b.turn) - reach, hi = std::max(a.turn, b.turn) + reach;
  std::vector<double> x, w;
  double prev = 0.0;
  for (int panels = 16; panels <= (1 << 16); panels *= 2) {
    composite_rule(lo, hi, panels, x, w);
    double sum = 0.0, mass = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double v = f(x[k]);
      sum += w[k] * v;
      mass += w[k] * std::abs(v);
    }
    if (panels > 16 && std::abs(sum - prev) <= rel_tol * mass) return a.norm * b.norm * sum;
    prev = sum;
  }
  fail(ErrorKind::numerical, "Airy overlap quadrature did not converge");
}

namespace {

// ∫ Ai(p x + q) Ai(r x + s) dx = Ai((q r − p s)/D) / |D|, D = ∛(r³ − p³); returns the prefactor and argument
std::pair<double, double> overlap_closed_form(const LinearCrossingModel& model, double energy) {
  const AiryState a = airy_state(model.kappa0(), model.v_cross(), model.mass(), energy);
  const AiryState b = airy_state(model.kappa1(), model.v_cross(), model.mass(), energy);
  const double p = a.scale, q = -a.scale * a.turn, r = b.scale, s = -b.scale * b.turn;
  const double d = std::cbrt(r * r * r - p * p * p);
  return {a.norm * b.norm / std::abs(d), (q * r - p * s) / d};
}

}  // namespace

double airy_overlap_exact(const LinearCrossingModel& model, double energy) {
  require_opposite(model);
  const auto [pre, arg] = overlap_closed_form(model, energy);
  return pre * boost::math::airy_ai(arg);
}

double quantum_gr_log_rate_1d(const LinearCrossingModel& model, double beta, const GoldenRuleNumerics& num) {
  require_opposite(model);
  if (!(beta > 0.0)) fail(ErrorKind::invalid_input, "beta must be positive");
  if (model.delta() == 0.0) return -std::numeric_limits<double>::infinity();
  auto g = [&](double e) {
    if (!num.spatial_quadrature) {
      const auto [pre, arg] = overlap_closed_form(model, e);
      return 2.0 * (std::log(pre) + log_abs_airy_ai(arg)) - beta * e;
    }
    const double ov = airy_overlap(model, e, 1e-12);
    return ov == 0.0 ? -std::numeric_limits<double>::infinity() : 2.0 * std::log(std::abs(ov)) - beta * e;
  };
  const double log_i = log_peak_integral(g, model.v_cross(), 1.0 / beta, num.window, num.rel_tol, num.workers);
  const double log_zr = 0.5 * std::log(model.mass() / (2.0 * kPi * beta));
  return std::log(2.0 * kPi * model.delta() * model.delta()) + log_i - log_zr;
}

double quantum_gr_rate_1d(const LinearCrossingModel& model, double beta, const GoldenRuleNumerics& num) {
  return std::exp(quantum_gr_log_rate_1d(model, beta, num));
}

double classical_gr_rate(const LinearCrossingParams& p, double beta) {
  require_distinct(p.kappa0, p.kappa1);
  return std::sqrt(2.0 * kPi * p.mass / (beta * p.hbar * p.hbar)) * p.delta * p.delta /
         (p.hbar * std::abs(p.kappa0 - p.kappa1)) * std::exp(-beta * p.v_cross);
}

namespace {

double holstein_weight(const LinearCrossingParams& p, double beta, double v) {
  const double lz = -std::expm1(-2.0 * kPi * p.delta * p.delta / (std::abs(p.kappa0 - p.kappa1) * v * p.hbar));
  return v * 2.0 * lz / (1.0 + lz) * std::exp(-0.5 * beta * p.mass * v * v);
}

double holstein_scale(const LinearCrossingParams& p, double beta) {
  return (p.mass / (2.0 * kPi * p.hbar)) * std::exp(-beta * (p.v_cross - std::abs(p.delta))) /
         std::sqrt(p.mass / (2.0 * kPi * beta * p.hbar * p.hbar));
}

}  // namespace

double holstein_rate(const LinearCrossingParams& p, double beta) {
  require_distinct(p.kappa0, p.kappa1);
  if (p.delta == 0.0) return 0.0;
  boost::math::quadrature::exp_sinh<double> q;
  const double vt = 1.0 / std::sqrt(beta * p.mass);
  const double i = vt * q.integrate([&](double u) { return holstein_weight(p, beta, vt * u); }, 1e-14);
  return holstein_scale(p, beta) * i;
}

double holstein_rate_log_grid(const LinearCrossingParams& p, double beta) {
  require_distinct(p.kappa0, p.kappa1);
  if (p.delta == 0.0) return 0.0;
  const double vt = 1.0 / std::sqrt(beta * p.mass);
  // log-spaced panels from 1e-12 vt to 40 vt; the piece below is ≤ (1e-12 vt)²/2
  const double l0 = std::log(1e-12 * vt), l1 = std::log(40.0 * vt);
  std::vector<double> x, w;
  double prev = 0.0;
  for (int panels = 32; panels <= 8192; panels *= 2) {
    composite_rule(l0, l1, panels, x, w);
    double sum = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double v = std::exp(x[k]);
      sum += w[k] * v * holstein_weight(p, beta, v);
    }
    if (panels > 32 && std::abs(sum - prev) <= 1e-12 * sum) return holstein_scale(p, beta) * sum;
    prev = sum;
  }
  fail(ErrorKind::numerical, "Holstein quadrature did not converge");
}

double eyring_rate(const AdiabatInfo& info, bool bound, double mass, double beta, EyringForm form,
                   double hbar) {
  if (!(beta > 0.0 && hbar > 0.0)) fail(ErrorKind::invalid_input, "beta and hbar must be positive");
  if (!bound) {
    if (!(mass > 0.0)) fail(ErrorKind::invalid_input, "mass must be positive");
    return std::exp(-beta * info.v_barrier) / std::sqrt(2.0 * kPi * beta * mass);
  }
  if (!info.has_reactant) fail(ErrorKind::invalid_state, "Eyring rate needs the reactant minimum");
  // classical: ln ω; quantum: ln(2 sinh(βħω/2)) / βħ relative to the same prefactor
  auto mode = [&](double w) {
    if (form == EyringForm::classical) return std::log(w);
    const double x = beta * hbar * w;
    return 0.5 * x + std::log(-std::expm1(-x));
  };
  double log_ratio = 0.0;
  for (Eigen::Index i = 0; i < info.omega_reactant.size(); ++i) log_ratio += mode(info.omega_reactant(i));
  for (Eigen::Index i = 0; i < info.omega_barrier.size(); ++i) log_ratio -= mode(info.omega_barrier(i));
  const double pre = form == EyringForm::classical ? 1.0 / (2.0 * kPi) : 1.0 / (2.0 * kPi * beta * hbar);
  return pre * std::exp(log_ratio - beta * (info.v_barrier - info.v_reactant));
}

double eyring_rate(const DiabaticModel& model, double beta, EyringForm form, double hbar) {
  const AdiabatInfo info = barrier_top(model);
  const bool bound = model.bound_reactant();
  if (!bound && model.dimension() != 1)
    fail(ErrorKind::unsupported_model, "scattering Eyring rates are implemented for 1D models");
  return eyring_rate(info, bound, model.masses()(0), beta, form, hbar);
}

double interpolation_formula(double k_gr, double k_bo, double k_bo_at_zero) {
  if (!(k_gr >= 0.0 && k_bo >= 0.0 && k_bo_at_zero >= 0.0))
    fail(ErrorKind::invalid_input, "interpolation formula needs non-negative rates");
  if (k_gr + k_bo_at_zero == 0.0) fail(ErrorKind::invalid_input, "k_GR + k_BO(0) vanishes");
  return k_gr * k_bo / (k_gr + k_bo_at_zero);
}

GrLinearAnalytics gr_linear_analytics(const LinearCrossingParams& p, double beta) {
  require_distinct(p.kappa0, p.kappa1);
  if (!(beta > 0.0 && p.mass > 0.0 && p.hbar > 0.0)) fail(ErrorKind::invalid_input, "β, m, ħ must be positive");
  const double dk = p.kappa0 - p.kappa1;
  GrLinearAnalytics a;
  a.omega0 = std::sqrt(beta * dk * dk / (12.0 * p.mass));
  a.beta_c = std::cbrt(8.0 * p.mass * std::pow(kPi, 4) / (p.hbar * p.hbar * dk * dk));
  a.ratio = 6.0 * std::sqrt(6.0) / std::pow(kPi, 2.5);
  a.k_nimf_symmetric = a.ratio * classical_gr_rate(p, beta);
  a.k_nimf_asymmetric = 12.0 / (kPi * kPi * p.hbar) * beta * p.delta * p.delta *
                        std::sqrt(3.0 * p.mass / (beta * beta * beta)) / (p.hbar * std::abs(dk)) *
                        std::exp(-beta * p.v_cross);
  return a;
}

}  // namespace nimf
