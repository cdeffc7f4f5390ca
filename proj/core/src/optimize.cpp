#include "nimf/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nimf/errors.hpp"
#include "nimf/parallel.hpp"

namespace nimf {

Mat fd_hessian(const GradientFn& fn, const Vec& x, const Vec& masses, double step, int workers) {
  const Eigen::Index n = x.size();
  Mat h(n, n);
  parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t col) {
    const auto c = static_cast<Eigen::Index>(col);
    const double dx = step / std::sqrt(masses(c));
    Vec xp = x, xm = x, gp(n), gm(n);
    xp(c) += dx;
    xm(c) -= dx;
    fn(xp, gp);
    fn(xm, gm);
    h.col(c) = (gp - gm) / (2.0 * dx);
  });
  return 0.5 * (h + h.transpose());
}

namespace {

// lowest root of mu = sum g^2/(mu - lam) below min(lam, 0)
double rfo_shift(const std::vector<double>& lam, const std::vector<double>& g) {
  if (lam.empty()) return 0.0;
  double gg = 0.0, lmin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < lam.size(); ++k) {
    gg += g[k] * g[k];
    lmin = std::min(lmin, lam[k]);
  }
  double hi = std::min(lmin, 0.0);
  double lo = hi - std::sqrt(gg) - 1.0;
  auto f = [&](double mu) {
    double s = 0.0;
    for (std::size_t k = 0; k < lam.size(); ++k) s += g[k] * g[k] / (mu - lam[k]);
    return mu - s;
  };
  if (gg == 0.0) return hi < 0.0 ? hi : 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (f(mid) < 0.0) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

OptimizeResult eigenvector_follow(const GradientFn& fn, const HessianFn& hess, const Vec& x0,
                                  const Vec& masses, int n_uphill, const OptimizerSettings& s) {
  const Eigen::Index n = x0.size();
  const Vec sm = masses.cwiseSqrt();
  const Mat scale = sm * sm.transpose();
  const double r_max = 10.0 * s.trust_radius;

  OptimizeResult out;
  Vec x = x0, g(n);
  double e = fn(x, g);
  Mat hy = hess(x).cwiseQuotient(scale);
  bool exact_at_x = true;
  double radius = s.trust_radius;
  int since_exact = 0;

  for (int it = 0;; ++it) {
    out.iterations = it;
    const double gn = g.cwiseAbs().maxCoeff();
    if (!std::isfinite(e) || !std::isfinite(gn)) {
      out.message = "non-finite energy or gradient";
      break;
    }
    if (gn < s.g_tol) {
      out.converged = true;
      break;
    }
    if (it >= s.max_iter) {
      out.message = "max_iter reached";
      break;
    }

    Eigen::SelfAdjointEigenSolver<Mat> es(hy);
    if (es.info() != Eigen::Success) fail(ErrorKind::numerical, "eigensolver failed in optimizer");
    const Vec lam = es.eigenvalues();
    const Mat& vec = es.eigenvectors();
    const Vec gy = g.cwiseQuotient(sm);
    const Vec gk = vec.transpose() * gy;
    const double lmax = lam.cwiseAbs().maxCoeff();
    const double floor = std::max(s.zero_tol * lmax, 1e-300);

    Vec step = Vec::Zero(n);
    std::vector<double> dl, dg;
    std::vector<Eigen::Index> down;
    int uphill_left = n_uphill;
    for (Eigen::Index k = 0; k < n; ++k) {
      // symmetry directions (the cyclic bead shift of an instanton) are left alone
      if (std::abs(lam(k)) < floor) continue;
      if (uphill_left > 0) {
        --uphill_left;
        const double mu = 0.5 * (lam(k) + std::sqrt(lam(k) * lam(k) + 4.0 * gk(k) * gk(k)));
        const double den = lam(k) - mu;
        step(k) = den == 0.0 ? 0.0 : -gk(k) / den;
      } else {
        down.push_back(k);
        dl.push_back(lam(k));
        dg.push_back(gk(k));
      }
    }
    const double mu_n = rfo_shift(dl, dg);
    for (std::size_t j = 0; j < down.size(); ++j)
      step(down[j]) = -dg[j] / std::max(dl[j] - mu_n, 1e-14 * lmax);

    Vec dy = vec * step;
    const double len = dy.norm();
    if (len > radius) dy *= radius / len;
    const double pred = gy.dot(dy) + 0.5 * dy.dot(hy * dy);

    const Vec x_new = x + dy.cwiseQuotient(sm);
    Vec g_new(n);
    const double e_new = fn(x_new, g_new);
    const double actual = e_new - e;
    // below the rounding level of the energy the model comparison carries no information
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(e));
    const double ratio = std::abs(pred) > noise ? actual / pred : 1.0;
    const bool at_edge = len > 0.9 * radius;

    bool reject = !std::isfinite(e_new);
    if (n_uphill == 0 && actual > 1e-12 * std::max(1.0, std::abs(e))) reject = true;
    if (n_uphill > 0 && (ratio < -1.0 || ratio > 3.0) && at_edge) reject = true;
    if (reject) {
      radius *= 0.25;
      if (radius < 1e-10) {
        out.message = "trust radius collapsed";
        break;
      }
      continue;
    }
    if (ratio < 0.25 || ratio > 1.75) radius *= 0.5;
    else if (ratio > 0.75 && ratio < 1.33 && at_edge) radius = std::min(2.0 * radius, r_max);

    const Vec dgy = (g_new - g).cwiseQuotient(sm);
    x = x_new;
    g = g_new;
    e = e_new;
    ++since_exact;
    if (since_exact >= s.hessian_refresh) {
      hy = hess(x).cwiseQuotient(scale);
      since_exact = 0;
      exact_at_x = true;
    } else {
      // Bofill update in mass-weighted coordinates
      const Vec xi = dgy - hy * dy;
      const double ss = dy.dot(dy), xs = xi.dot(dy), xx = xi.dot(xi);
      if (ss > 0.0 && xx > 0.0) {
        const double phi = xs * xs / (xx * ss);
        Mat upd = (1.0 - phi) * ((xi * dy.transpose() + dy * xi.transpose()) / ss -
                                 xs * (dy * dy.transpose()) / (ss * ss));
        if (std::abs(xs) > 1e-300) upd += phi * (xi * xi.transpose()) / xs;
        hy += upd;
      }
      exact_at_x = false;
    }
  }

  if (!exact_at_x) hy = hess(x).cwiseQuotient(scale);
  out.x = x;
  out.energy = e;
  out.gradient = g;
  out.grad_norm = g.cwiseAbs().maxCoeff();
  out.hessian = hy.cwiseProduct(scale);
  return out;
}

}  // namespace nimf
