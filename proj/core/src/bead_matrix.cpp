#include "nimf/bead_matrix.hpp"

#include <cmath>

namespace nimf {

namespace detail {

namespace {
constexpr double kSeriesCut = 0.5;

// Σ_{k>=1} 2k/(2k+1)! y^{2k-2}
double q_over_y2_series(double y) {
  const double y2 = y * y;
  double term = 1.0 / 6.0;  // 1/3!
  double pow = 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 14; ++k) {
    sum += 2.0 * k * term * pow;
    term /= (2.0 * k + 2.0) * (2.0 * k + 3.0);
    pow *= y2;
  }
  return sum;
}
}  // namespace

double scaled_q(double y) {
  if (y < kSeriesCut) return std::exp(-y) * y * y * q_over_y2_series(y);
  const double e = std::exp(-2.0 * y);
  return (y * (1.0 + e) + std::expm1(-2.0 * y)) / (2.0 * y);
}

double scaled_h(double y) {
  if (y < kSeriesCut) return std::exp(-y) * q_over_y2_series(y);
  return scaled_q(y) / (y * y);
}

double scaled_sinh_minus(double y) {
  if (y < kSeriesCut) {
    const double y2 = y * y;
    double term = y * y2 / 6.0, sum = 0.0;
    for (int k = 1; k <= 14; ++k) {
      sum += term;
      term *= y2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
    }
    return std::exp(-y) * sum;
  }
  return -0.5 * std::expm1(-2.0 * y) - y * std::exp(-y);
}

}  // namespace detail

void bead_weights(const DiabaticValues& d, double b, BeadWeights& w, BeadWeightDerivs* dw) {
  // work in units of b: vbar = b·(V0+V1)/2, dl = b·(V0−V1)/2, cp = b·Δ, ρ = hypot(dl, cp)
  const double vbar = 0.5 * b * (d.v0 + d.v1);
  const double dl = 0.5 * b * (d.v0 - d.v1);
  const double cp = b * d.delta;
  const double rho = std::hypot(dl, cp);
  const double da = std::abs(dl);
  const double sg = dl > 0.0 ? 1.0 : (dl < 0.0 ? -1.0 : 0.0);
  const double eta = rho > 0.0 ? cp * cp / (rho + da) : 0.0;  // ρ − |dl|
  const double g = rho > 0.0 ? -std::expm1(-2.0 * rho) / (2.0 * rho) : 1.0;

  w.log_scale = -(vbar - rho);
  // ρ ± dl, the small one taken as η
  const double sp = dl < 0.0 ? eta : rho + dl, sm = dl > 0.0 ? eta : rho - dl;
  const double ep = std::exp(-sp), em = std::exp(-sm);
  w.zero_hop << ep, 0.0, 0.0, em;

  // hop diagonals: e^{-ρ}[(cosh ρ − cosh dl) ∓ dl(S(ρ) − S(|dl|))], S(y) = sinh y / y
  const double xp = std::expm1(-sp), xm = std::expm1(-sm);
  const double sym = 0.5 * xp * xm;
  const double e_eta = std::exp(-eta), x_eta = std::expm1(-eta);
  const double e2a = std::exp(-2.0 * da);
  const double sig = detail::scaled_sinh_minus(eta);
  const double qa = detail::scaled_q(da);
  const double a1 = 0.25 * (1.0 - e2a) * x_eta * x_eta;
  const double a2 = 0.5 * (1.0 + e2a) * sig;
  const double a3 = eta * e_eta * qa;
  const double big_a = a1 + a2 + a3;
  const double odd = (dl != 0.0 && rho > 0.0) ? dl * big_a / rho : 0.0;
  w.hop << sym - odd, -g * cp, -g * cp, sym + odd;
  // full = zero-hop + hop keeps the small diagonal entry (~e^{-2ρ}) accurate
  w.full = w.zero_hop + w.hop;

  if (!dw) return;
  const Eigen::Index f = d.grad_v0.size();
  dw->resize(f);
  const double h = detail::scaled_h(rho);
  // derivatives of the auxiliary functions
  const double dsig = -sig + 0.5 * x_eta * x_eta;                // σ'(η)
  const double dqa = -qa + 0.5 * (1.0 - e2a) - (da > 0.0 ? qa / da : 0.0);  // Q'(|dl|)
  for (Eigen::Index i = 0; i < f; ++i) {
    const double vbar_d = 0.5 * b * (d.grad_v0(i) + d.grad_v1(i));
    const double dl_d = 0.5 * b * (d.grad_v0(i) - d.grad_v1(i));
    const double cp_d = b * d.grad_delta(i);
    const double s = dl * dl_d + cp * cp_d;

    Mat2 zero;
    zero << -(vbar_d + dl_d) * ep, 0.0, 0.0, -(vbar_d - dl_d) * em;

    // off-diagonal from the closed-form derivative of the exponential
    const double off = -vbar_d * w.full(0, 1) - h * s * cp - g * cp_d;

    double hop00 = 0.0, hop11 = 0.0;
    if (rho > 0.0) {
      const double rho_d = s / rho;
      const double da_d = sg * dl_d;
      const double eta_d = (cp * cp_d - eta * da_d) / rho;
      // ρ' ± dl' without cancellation
      const double rp = dl < 0.0 ? eta_d : rho_d + dl_d;
      const double rm = dl > 0.0 ? eta_d : rho_d - dl_d;
      const double sym_d = 0.5 * (-ep * rp * xm - xp * em * rm);
      const double a1_d = 0.5 * e2a * da_d * x_eta * x_eta - 0.5 * (1.0 - e2a) * x_eta * e_eta * eta_d;
      const double a2_d = -e2a * da_d * sig + 0.5 * (1.0 + e2a) * dsig * eta_d;
      const double a3_d = (1.0 - eta) * e_eta * eta_d * qa + eta * e_eta * dqa * da_d;
      const double a_d = a1_d + a2_d + a3_d;
      const double odd_d = (dl_d * big_a + dl * a_d) / rho - dl * big_a * rho_d / (rho * rho);
      // the scale is held fixed: d/dx of e^{ρ−vbar}·(scaled hop)
      const double lead = rho_d - vbar_d;
      hop00 = lead * w.hop(0, 0) + sym_d - odd_d;
      hop11 = lead * w.hop(1, 1) + sym_d + odd_d;
    }
    Mat2 hop;
    hop << hop00, off, off, hop11;
    dw->zero_hop[i] = zero;
    dw->hop[i] = hop;
    dw->full[i] = zero + hop;
  }
}

}  // namespace nimf
