#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "nimf/errors.hpp"
#include "nimf/oracles.hpp"
#include "nimf/parallel.hpp"

namespace nimf {

namespace {

using Mat2 = Eigen::Matrix2d;
using CMat2 = Eigen::Matrix2cd;
using cd = std::complex<double>;

struct Local {
  Mat2 basis;  // columns: eigenvectors
  double eps[2];
};

Local local_channels(const DiabaticModel& model, double x) {
  DiabaticValues d(1);
  eval_diabatic(model, &x, d);
  const double vbar = 0.5 * (d.v0 + d.v1);
  const double r = std::hypot(0.5 * (d.v0 - d.v1), d.delta);
  const double th = 0.5 * std::atan2(2.0 * d.delta, d.v0 - d.v1);
  Local l;
  l.basis << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  l.eps[0] = vbar + r;
  l.eps[1] = vbar - r;
  return l;
}

// log-derivative imbedding of one sector: ψ'(a) = y1 ψ(a) + y2 ψ(b), ψ'(b) = −y2 ψ(a) − y1 ψ(b)
void sector_coeffs(double w, double h, double& y1, double& y2) {
  const double wh2 = w * h * h;
  if (std::abs(wh2) < 1e-6) {
    y1 = -(1.0 + wh2 / 3.0) / h;
    y2 = (1.0 - wh2 / 6.0) / h;
  } else if (w > 0.0) {
    const double q = std::sqrt(w), e = std::exp(-q * h);
    y1 = -q * (1.0 + e * e) / (1.0 - e * e);
    y2 = 2.0 * q * e / (1.0 - e * e);
  } else {
    const double k = std::sqrt(-w);
    y1 = -k / std::tan(k * h);
    y2 = k / std::sin(k * h);
  }
}

struct Imbedding {
  Mat2 y1, y2, y3, y4;
};

Imbedding propagate(const DiabaticModel& model, double energy, double a, double b, double step,
                    double two_m) {
  const int n = std::max(1, static_cast<int>(std::ceil((b - a) / step)));
  const double h = (b - a) / n;
  Imbedding acc;
  for (int s = 0; s < n; ++s) {
    const Local l = local_channels(model, a + (s + 0.5) * h);
    double c1[2], c2[2];
    for (int j = 0; j < 2; ++j) sector_coeffs(two_m * (l.eps[j] - energy), h, c1[j], c2[j]);
    const Mat2 z1 = l.basis * Eigen::Vector2d(c1[0], c1[1]).asDiagonal() * l.basis.transpose();
    const Mat2 z2 = l.basis * Eigen::Vector2d(c2[0], c2[1]).asDiagonal() * l.basis.transpose();
    if (s == 0) {
      acc = {z1, z2, -z2, -z1};
      continue;
    }
    const Mat2 m = (z1 - acc.y4).inverse();
    acc.y1 += acc.y2 * m * acc.y3;
    acc.y2 = (-acc.y2 * m * z2).eval();
    acc.y3 = (-z2 * m * acc.y3).eval();
    acc.y4 = -z1 + z2 * m * z2;
  }
  return acc;
}

struct Asymptote {
  Mat2 basis;
  double eps[2];
  bool open[2];
  double k[2];  // wavenumber (open) or decay constant (closed)
};

Asymptote asymptote(const DiabaticModel& model, double x, double energy, double two_m, double hbar) {
  const Local l = local_channels(model, x);
  Asymptote as;
  as.basis = l.basis;
  for (int j = 0; j < 2; ++j) {
    as.eps[j] = l.eps[j];
    as.open[j] = energy > l.eps[j];
    as.k[j] = std::sqrt(two_m * std::abs(energy - l.eps[j])) / hbar;
  }
  return as;
}

TransmissionPoint log_derivative(const DiabaticModel& model, double energy, double a, double b,
                                 double step, double hbar) {
  const double two_m = 2.0 * model.masses()(0) / (hbar * hbar);
  const Imbedding y = propagate(model, energy, a, b, step, two_m * hbar * hbar);
  const Asymptote L = asymptote(model, a, energy, 2.0 * model.masses()(0), hbar);
  const Asymptote R = asymptote(model, b, energy, 2.0 * model.masses()(0), hbar);
  const Mat2 t1 = L.basis.transpose() * y.y1 * L.basis;
  const Mat2 t2 = L.basis.transpose() * y.y2 * R.basis;
  const Mat2 t3 = R.basis.transpose() * y.y3 * L.basis;
  const Mat2 t4 = R.basis.transpose() * y.y4 * R.basis;
  const cd i(0.0, 1.0);
  Eigen::Matrix4cd sys = Eigen::Matrix4cd::Zero();
  sys.topLeftCorner<2, 2>() = -t1.cast<cd>();
  sys.topRightCorner<2, 2>() = -t2.cast<cd>();
  sys.bottomLeftCorner<2, 2>() = -t3.cast<cd>();
  sys.bottomRightCorner<2, 2>() = -t4.cast<cd>();
  for (int j = 0; j < 2; ++j) {
    sys(j, j) += L.open[j] ? -i * L.k[j] : cd(L.k[j]);
    sys(2 + j, 2 + j) += R.open[j] ? i * R.k[j] : cd(-R.k[j]);
  }
  const Eigen::PartialPivLU<Eigen::Matrix4cd> lu(sys);
  TransmissionPoint tp;
  tp.energy = energy;
  for (int ic = 0; ic < 2; ++ic) {
    if (!L.open[ic]) continue;
    Eigen::Vector4cd rhs = Eigen::Vector4cd::Zero();
    rhs.head<2>() = t1.col(ic).cast<cd>();
    rhs(ic) -= i * L.k[ic];
    rhs.tail<2>() = t3.col(ic).cast<cd>();
    const Eigen::Vector4cd sol = lu.solve(rhs);
    ChannelFlux cf;
    for (int j = 0; j < 2; ++j) {
      if (R.open[j]) cf.transmission += R.k[j] / L.k[ic] * std::norm(sol(2 + j));
      if (L.open[j]) cf.reflection += L.k[j] / L.k[ic] * std::norm(sol(j));
    }
    tp.cumulative += cf.transmission;
    tp.channels.push_back(cf);
  }
  return tp;
}

// retarded self-energy of a semi-infinite uniform lead, in the diabatic basis
CMat2 lead_self_energy(const Asymptote& as, double energy, double t) {
  Eigen::Vector2cd sig;
  for (int j = 0; j < 2; ++j) {
    const double c = 1.0 - (energy - as.eps[j]) / (2.0 * t);
    cd e;
    if (std::abs(c) <= 1.0) e = cd(c, std::sqrt(1.0 - c * c));
    else if (c > 1.0) e = c - std::sqrt(c * c - 1.0);
    else e = c + std::sqrt(c * c - 1.0);
    sig(j) = -t * e;
  }
  const Eigen::Matrix2cd b = as.basis.cast<cd>();
  return b * sig.asDiagonal() * b.transpose();
}

TransmissionPoint green_function(const DiabaticModel& model, double energy, double a, double b,
                                 double step, double hbar) {
  const int n = std::max(1, static_cast<int>(std::ceil((b - a) / step)));
  const double h = (b - a) / n;
  const double t = hbar * hbar / (2.0 * model.masses()(0) * h * h);
  const Asymptote L = asymptote(model, a, energy, 2.0 * model.masses()(0), hbar);
  const Asymptote R = asymptote(model, b, energy, 2.0 * model.masses()(0), hbar);
  const CMat2 sl = lead_self_energy(L, energy, t), sr = lead_self_energy(R, energy, t);
  const cd i(0.0, 1.0);
  auto onsite = [&](double x) {
    DiabaticValues d(1);
    eval_diabatic(model, &x, d);
    CMat2 m;
    m << energy - d.v0 - 2.0 * t, -d.delta, -d.delta, energy - d.v1 - 2.0 * t;
    return m;
  };
  CMat2 g = (onsite(a) - sl).inverse();
  CMat2 g_n0 = g;
  for (int k = 1; k <= n; ++k) {
    CMat2 m = onsite(a + k * h) - t * t * g;
    if (k == n) m -= sr;
    g = m.inverse();
    g_n0 = t * g * g_n0;
  }
  const CMat2 gl = i * (sl - sl.adjoint()), gr = i * (sr - sr.adjoint());
  TransmissionPoint tp;
  tp.energy = energy;
  tp.cumulative = (gr * g_n0 * gl * g_n0.adjoint()).trace().real();
  return tp;
}

// outward search until the lower channel is open across [e_lo, e_hi] by `depth` and the upper
// channel is either open or closed by the same margin over the whole window
double boundary(const DiabaticModel& model, double centre, double dir, double e_lo, double e_hi,
                double depth) {
  double w = 1.0;
  for (int it = 0; it < 200; ++it, w *= 1.25) {
    const double x = centre + dir * w;
    const Local l = local_channels(model, x);
    const bool upper_ok = l.eps[0] <= e_lo - depth || l.eps[0] >= e_hi + depth;
    if (l.eps[1] <= e_lo - depth && upper_ok) return x;
  }
  fail(ErrorKind::numerical, "no asymptotic region found for scattering boundaries");
}

struct Window {
  double e_lo, e_hi, x_min, x_max;
};

}  // namespace

TransmissionPoint transmission(const DiabaticModel& model, double energy, double x_min,
                               double x_max, double step, ScatteringSolver solver) {
  if (model.dimension() != 1) fail(ErrorKind::unsupported_model, "scattering needs a 1D model");
  if (!(x_max > x_min) || !(step > 0.0)) fail(ErrorKind::invalid_input, "bad scattering grid");
  return solver == ScatteringSolver::log_derivative
             ? log_derivative(model, energy, x_min, x_max, step, 1.0)
             : green_function(model, energy, x_min, x_max, step, 1.0);
}

ScatteringResult exact_rate_1d(const DiabaticModel& model, double beta,
                               const ScatteringNumerics& num, ScatteringSolver solver) {
  if (model.dimension() != 1) fail(ErrorKind::unsupported_model, "exact rates need a 1D model");
  if (model.bound_reactant()) fail(ErrorKind::unsupported_model, "exact rates need a scattering model");
  if (!(beta > 0.0)) fail(ErrorKind::invalid_input, "beta must be positive");
  const double mass = model.masses()(0);
  ScatteringResult res;
  if (model.coupling_sign() == 0) return res;

  const AdiabatInfo info = barrier_top(model);
  const double xb = info.x_barrier(0), vb = info.v_barrier;

  auto range = [&](double e_lo, double e_hi) {
    Window w;
    w.x_min = num.x_min ? *num.x_min : boundary(model, xb, -1.0, e_lo, e_hi, num.asymptotic_kinetic);
    w.x_max = num.x_max ? *num.x_max : boundary(model, xb, 1.0, e_lo, e_hi, num.asymptotic_kinetic);
    return w;
  };
  auto log_integrand = [&](const Window& w, double e, double step) {
    const double n = transmission(model, e, w.x_min, w.x_max, step, solver).cumulative;
    return n > 0.0 ? std::log(n) - beta * e : -std::numeric_limits<double>::infinity();
  };

  // locate the window where N(E) e^{-βE} is within e^{-window} of its peak
  Window w{vb - 20.0 / beta, vb + 20.0 / beta, 0.0, 0.0};
  const int probes = 64;
  for (int it = 0;; ++it) {
    const Window r = range(w.e_lo, w.e_hi);
    w.x_min = r.x_min;
    w.x_max = r.x_max;
    std::vector<double> g(probes);
    const double de = (w.e_hi - w.e_lo) / (probes - 1);
    parallel_for(probes, num.workers, [&](std::size_t k) { g[k] = log_integrand(w, w.e_lo + k * de, num.step); });
    const double gmax = *std::max_element(g.begin(), g.end());
    if (!std::isfinite(gmax)) return res;  // no transmission at all
    const bool lo_open = g.front() > gmax - num.window, hi_open = g.back() > gmax - num.window;
    if (!lo_open && !hi_open) {
      int first = 0, last = probes - 1;
      while (g[first + 1] < gmax - num.window) ++first;
      while (g[last - 1] < gmax - num.window) --last;
      const double lo = w.e_lo + first * de, hi = w.e_lo + last * de;
      w.e_lo = lo;
      w.e_hi = hi;
      break;
    }
    if (it > 12) fail(ErrorKind::numerical, "energy window for the exact rate did not close");
    const double width = w.e_hi - w.e_lo;
    if (lo_open) w.e_lo -= width;
    if (hi_open) w.e_hi += width;
  }
  const Window fin = range(w.e_lo, w.e_hi);
  w.x_min = fin.x_min;
  w.x_max = fin.x_max;
  res.x_min = w.x_min;
  res.x_max = w.x_max;

  using GL = boost::math::quadrature::gauss<double, 10>;
  const double log_zr = 0.5 * std::log(mass / (2.0 * std::numbers::pi * beta));
  auto rate_at = [&](double step, bool record) {
    double prev = 0.0, shift = 0.0;
    bool have_shift = false;
    for (int panels = 16; panels <= 1024; panels *= 2) {
      const double pw = (w.e_hi - w.e_lo) / panels;
      std::vector<double> nodes, weights;
      for (int p = 0; p < panels; ++p) {
        const double c = w.e_lo + (p + 0.5) * pw;
        for (std::size_t q = 0; q < GL::abscissa().size(); ++q) {
          const double x = GL::abscissa()[q], wt = GL::weights()[q] * 0.5 * pw;
          nodes.push_back(c + 0.5 * pw * x);
          weights.push_back(wt);
          if (x != 0.0) {
            nodes.push_back(c - 0.5 * pw * x);
            weights.push_back(wt);
          }
        }
      }
      std::vector<TransmissionPoint> tps(nodes.size());
      parallel_for(nodes.size(), num.workers, [&](std::size_t k) {
        tps[k] = transmission(model, nodes[k], w.x_min, w.x_max, step, solver);
      });
      if (!have_shift) {
        shift = -std::numeric_limits<double>::infinity();
        for (const auto& tp : tps)
          if (tp.cumulative > 0.0) shift = std::max(shift, std::log(tp.cumulative) - beta * tp.energy);
        have_shift = true;
      }
      double sum = 0.0;
      for (std::size_t k = 0; k < tps.size(); ++k)
        if (tps[k].cumulative > 0.0)
          sum += weights[k] * std::exp(std::log(tps[k].cumulative) - beta * tps[k].energy - shift);
      if (record) {
        res.energy.clear();
        res.cumulative.clear();
        std::vector<std::size_t> order(nodes.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::sort(order.begin(), order.end(), [&](auto x, auto y) { return nodes[x] < nodes[y]; });
        res.unitarity_error = 0.0;
        for (auto k : order) {
          res.energy.push_back(tps[k].energy);
          res.cumulative.push_back(tps[k].cumulative);
          for (const auto& c : tps[k].channels)
            res.unitarity_error = std::max(res.unitarity_error, std::abs(c.transmission + c.reflection - 1.0));
        }
      }
      if (panels > 16 && std::abs(sum - prev) <= 1e-7 * sum) {
        return std::exp(std::log(sum) + shift - log_zr) / (2.0 * std::numbers::pi);
      }
      prev = sum;
    }
    fail(ErrorKind::numerical, "energy quadrature for the exact rate did not converge");
  };

  double step = num.step;
  double k_prev = rate_at(step, false);
  res.step_history.emplace_back(step, k_prev);
  for (int h = 0; h < num.max_halvings; ++h) {
    step *= 0.5;
    const bool last = h + 1 == num.max_halvings;
    const double k = rate_at(step, true);
    res.step_history.emplace_back(step, k);
    res.rel_change = std::abs(k - k_prev) / k;
    if (res.rel_change < num.rel_tol || last) {
      if (res.rel_change >= num.rel_tol)
        fail(ErrorKind::numerical, "exact rate not converged in the grid spacing: relative change " +
                                       std::to_string(res.rel_change));
      // both propagators are second order in the spacing
      res.rate = (4.0 * k - k_prev) / 3.0;
      res.step = step;
      return res;
    }
    k_prev = k;
  }
  res.rate = k_prev;
  res.step = step;
  return res;
}

}  // namespace nimf
