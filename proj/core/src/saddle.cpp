#include "nimf/saddle.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "nimf/errors.hpp"

namespace nimf {

std::string to_string(PointClass c) {
  switch (c) {
    case PointClass::minimum: return "minimum";
    case PointClass::instanton: return "instanton";
    case PointClass::collapsed_barrier: return "collapsed_barrier";
  }
  return "unknown";
}

double path_b_n(const BeadPath& path, const Vec& masses) {
  const int n = path.n_beads();
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto d = path.coords().row((i + 1) % n) - path.coords().row(i);
    s += (d.array().square() * masses.transpose().array()).sum();
  }
  return s;
}

namespace {

GradientFn path_fn(const RingPolymerGrid& grid, const DiabaticModel& model, SurfaceKind kind) {
  return [&grid, &model, kind](const Vec& x, Vec& g) {
    const EnergyGradient eg =
        rp_energy_gradient(BeadPath::from_flat(x, grid.n_beads()), grid, model, kind);
    g = Eigen::Map<const Vec>(eg.gradient.data(), eg.gradient.size());
    return eg.energy;
  };
}

GradientFn collapsed_fn(double beta, const DiabaticModel& model, SurfaceKind kind) {
  return [beta, &model, kind](const Vec& x, Vec& g) {
    return collapsed_potential(x, beta, model, kind, &g);
  };
}

double thermal_length(const RingPolymerGrid& grid) { return std::sqrt(grid.beta_n()) * grid.hbar(); }

StationaryPoint describe(BeadPath path, const RingPolymerGrid& grid, const DiabaticModel& model,
                         SurfaceKind kind) {
  StationaryPoint sp;
  const EnergyGradient eg = rp_energy_gradient(path, grid, model, kind);
  sp.energy = eg.energy;
  sp.grad_norm = eg.gradient.cwiseAbs().maxCoeff();
  sp.kind = kind;
  sp.beta = grid.beta();
  sp.b_n = path_b_n(path, model.masses());
  sp.path = std::move(path);
  return sp;
}

// tangent of the bead sequence in mass-weighted coordinates, normalized
Vec path_tangent(const BeadPath& path, const Vec& masses) {
  const int n = path.n_beads();
  RowMat t(n, path.dimension());
  for (int i = 0; i < n; ++i)
    t.row(i) = 0.5 * (path.coords().row((i + 1) % n) - path.coords().row((i + n - 1) % n))
                         .cwiseProduct(masses.cwiseSqrt().transpose());
  Vec v = Eigen::Map<const Vec>(t.data(), t.size());
  const double nv = v.norm();
  return nv > 0.0 ? Vec(v / nv) : v;
}

Vec collapse_point_1d(const DiabaticModel& model, double beta, SurfaceKind kind,
                      std::optional<Vec> guess) {
  auto [lo, hi] = model.barrier_bracket();
  if (guess) {
    const double w = 0.5 * (hi - lo);
    lo = std::min(lo, (*guess)(0) - w);
    hi = std::max(hi, (*guess)(0) + w);
  }
  auto neg = [&](double x) {
    return -collapsed_potential(Vec::Constant(1, x), beta, model, kind);
  };
  for (int expand = 0; expand < 40; ++expand) {
    const auto [xb, nv] = boost::math::tools::brent_find_minima(neg, lo, hi, 52);
    const double w = hi - lo, edge = 1e-6 * w;
    if (xb - lo < edge) lo -= w;
    else if (hi - xb < edge) hi += w;
    else return Vec::Constant(1, xb);
  }
  fail(ErrorKind::search_failure, "no maximum of the collapsed potential found");
}

constexpr int kCoarsestLadder = 32;

int lowest_index(const Vec& lam) {
  Eigen::Index k = 0;
  lam.minCoeff(&k);
  return static_cast<int>(k);
}

}  // namespace

Vec collapse_point(const DiabaticModel& model, double beta, SurfaceKind kind,
                   const OptimizerSettings& settings, std::optional<Vec> guess) {
  if (!(beta > 0.0)) fail(ErrorKind::invalid_input, "beta must be positive");
  const GradientFn fn = collapsed_fn(beta, model, kind);
  auto hess = [&](const Vec& x) { return fd_hessian(fn, x, model.masses(), settings.fd_step, 1); };
  Vec x0 = model.dimension() == 1 ? collapse_point_1d(model, beta, kind, guess)
                                  : (guess ? *guess : model.barrier_guess());
  OptimizerSettings s = settings;
  s.workers = 1;
  const OptimizeResult r = eigenvector_follow(fn, hess, x0, model.masses(), 1, s);
  if (!r.converged)
    fail(ErrorKind::search_failure, "collapse-point search failed: " + r.message);
  const Vec lam = mass_weighted_eigenvalues(r.hessian, model.masses());
  if (!(lam(0) < 0.0) || (lam.size() > 1 && !(lam(1) > 0.0)))
    fail(ErrorKind::search_failure, "collapse point is not a first-order saddle of the collapsed potential");
  return r.x;
}

StationaryPoint collapsed_at(const DiabaticModel& model, const RingPolymerGrid& grid,
                             SurfaceKind kind, const Vec& x, const OptimizerSettings& settings) {
  StationaryPoint sp = describe(BeadPath::collapsed(x, grid.n_beads()), grid, model, kind);
  sp.spectrum =
      collapsed_mode_spectrum(sp.path, grid, model, kind, settings.zero_tol, settings.fd_step);
  sp.classification =
      sp.spectrum.n_negative == 0 ? PointClass::minimum : PointClass::collapsed_barrier;
  return sp;
}

StationaryPoint find_collapsed_barrier(const DiabaticModel& model, const RingPolymerGrid& grid,
                                       SurfaceKind kind, const OptimizerSettings& settings,
                                       std::optional<Vec> guess) {
  const Vec x = collapse_point(model, grid.beta(), kind, settings, std::move(guess));
  StationaryPoint sp = collapsed_at(model, grid, kind, x, settings);
  sp.classification = PointClass::collapsed_barrier;
  return sp;
}

StationaryPoint minimize_reactant(const DiabaticModel& model, const RingPolymerGrid& grid,
                                  SurfaceKind kind, const Vec& x_init,
                                  const OptimizerSettings& settings) {
  if (x_init.size() != model.dimension())
    fail(ErrorKind::invalid_input, "reactant start point has the wrong dimension");
  const GradientFn fn = collapsed_fn(grid.beta(), model, kind);
  auto hess = [&](const Vec& x) { return fd_hessian(fn, x, model.masses(), settings.fd_step, 1); };
  const OptimizeResult r = eigenvector_follow(fn, hess, x_init, model.masses(), 0, settings);
  if (r.converged) {
    StationaryPoint sp = collapsed_at(model, grid, kind, r.x, settings);
    sp.iterations = r.iterations;
    if (sp.spectrum.n_negative == 0 && sp.spectrum.n_zero == 0) return sp;
  }
  // the collapsed minimum is not a minimum of the full path space
  const GradientFn pf = path_fn(grid, model, kind);
  const Vec masses = bead_masses(model, grid.n_beads());
  auto phess = [&](const Vec& x) { return fd_hessian(pf, x, masses, settings.fd_step, settings.workers); };
  const Vec start = BeadPath::collapsed(r.converged ? r.x : x_init, grid.n_beads()).flat();
  const OptimizeResult full = eigenvector_follow(pf, phess, start, masses, 0, settings);
  if (!full.converged)
    fail(ErrorKind::optimization_failure,
         "reactant minimization failed: " + full.message + ", |g| = " + std::to_string(full.grad_norm));
  StationaryPoint sp = describe(BeadPath::from_flat(full.x, grid.n_beads()), grid, model, kind);
  sp.iterations = r.iterations + full.iterations;
  sp.spectrum = mode_spectrum(full.hessian, masses, settings.zero_tol);
  sp.classification = PointClass::minimum;
  if (sp.spectrum.n_negative != 0)
    fail(ErrorKind::optimization_failure, "reactant optimization ended on a saddle");
  return sp;
}

StationaryPoint find_instanton(const DiabaticModel& model, const RingPolymerGrid& grid,
                               SurfaceKind kind, const InstantonGuess& guess,
                               const OptimizerSettings& settings) {
  const int n = grid.n_beads();
  const Eigen::Index f = model.dimension();
  const Vec masses = bead_masses(model, n);
  const double collapse_len = settings.collapse_tol * thermal_length(grid);

  BeadPath start;
  Vec centre;
  if (guess.path) {
    start = guess.path->n_beads() == n ? *guess.path : guess.path->resampled(n);
    if (start.dimension() != f) fail(ErrorKind::invalid_input, "guess path has the wrong dimension");
    centre = start.centroid();
  } else if (n / 2 >= kCoarsestLadder) {
    // converge a ring with half the beads first
    try {
      const StationaryPoint coarse =
          find_instanton(model, RingPolymerGrid(grid.beta(), n / 2, grid.hbar()), kind, guess, settings);
      if (coarse.classification == PointClass::instanton) {
        start = coarse.path.resampled(n);
        centre = start.centroid();
      }
    } catch (const Error&) {
    }
  }
  if (start.n_beads() == 0) {
    centre = guess.centre ? *guess.centre : collapse_point(model, grid.beta(), kind, settings);
    // spread the beads along the unstable direction of the collapsed potential
    const GradientFn cf = collapsed_fn(grid.beta(), model, kind);
    const Mat h = fd_hessian(cf, centre, model.masses(), settings.fd_step, 1);
    const Vec is = model.masses().cwiseSqrt().cwiseInverse();
    Eigen::SelfAdjointEigenSolver<Mat> es(is.asDiagonal() * h * is.asDiagonal());
    const Vec dir = is.cwiseProduct(es.eigenvectors().col(lowest_index(es.eigenvalues())));
    auto trial = [&](double a, double c) {
      BeadPath p(n, f);
      for (int i = 0; i < n; ++i)
        p.coords().row(i) =
            (centre + (c + a * std::cos(2.0 * std::numbers::pi * (i + 0.5) / n)) * dir).transpose();
      return p;
    };
    const double base = thermal_length(grid);
    // instantons are minimax points: highest energy over the shift along dir, lowest over the stretch
    auto ridge = [&](double a, double c_guess) {
      auto neg = [&](double c) { return -rp_energy(trial(a, c), grid, model, kind); };
      double w = a + base, lo = c_guess - w, hi = c_guess + w;
      for (int expand = 0; expand < 40; ++expand) {
        const auto [c, nu] = boost::math::tools::brent_find_minima(neg, lo, hi, 40);
        const double edge = 1e-6 * (hi - lo);
        if (c - lo < edge) lo -= hi - lo;
        else if (hi - c < edge) hi += hi - lo;
        else return std::make_pair(c, -nu);
      }
      fail(ErrorKind::search_failure, "no maximum along the unstable direction for the instanton guess");
    };
    const double u0 = rp_energy(trial(0.0, 0.0), grid, model, kind);
    double best_a = 0.0, best_c = 0.0, best_u = u0, c_prev = 0.0;
    for (double a = 1e-3 * base; a < 1e6 * base; a *= 1.2) {
      std::pair<double, double> top;
      try {
        top = ridge(a, c_prev);
      } catch (const DomainError&) {
        break;
      }
      c_prev = top.first;
      if (top.second < best_u) {
        best_u = top.second;
        best_a = a;
        best_c = top.first;
      } else if (top.second > u0) {
        break;
      }
    }
    if (best_a == 0.0) {
      StationaryPoint sp = collapsed_at(model, grid, kind, centre, settings);
      sp.classification = PointClass::collapsed_barrier;
      return sp;
    }
    start = trial(best_a, best_c);
  }

  const GradientFn pf = path_fn(grid, model, kind);
  auto phess = [&](const Vec& x) { return fd_hessian(pf, x, masses, settings.fd_step, settings.workers); };
  const OptimizeResult r = eigenvector_follow(pf, phess, start.flat(), masses, 1, settings);
  BeadPath path = BeadPath::from_flat(r.x, n);
  if (path.spread(model.masses()) < collapse_len) {
    StationaryPoint sp = find_collapsed_barrier(model, grid, kind, settings, path.centroid());
    sp.iterations = r.iterations;
    return sp;
  }
  if (!r.converged)
    fail(ErrorKind::optimization_failure,
         "instanton search failed: " + r.message + ", |g| = " + std::to_string(r.grad_norm) +
             " after " + std::to_string(r.iterations) + " iterations");

  StationaryPoint sp = describe(std::move(path), grid, model, kind);
  sp.iterations = r.iterations;
  sp.spectrum = mode_spectrum(r.hessian, masses, settings.zero_tol, true);
  const Vec t = path_tangent(sp.path, model.masses());
  Eigen::Index best = 0;
  (sp.spectrum.eigenvectors.transpose() * t).cwiseAbs().maxCoeff(&best);
  sp.zero_mode = static_cast<int>(best);
  sp.zero_mode_overlap = std::abs(sp.spectrum.eigenvectors.col(best).dot(t));
  sp.spectrum.eigenvectors.resize(0, 0);
  sp.classification = PointClass::instanton;
  return sp;
}

double tracked_eigenvalue(const DiabaticModel& model, double beta, int n_beads, SurfaceKind kind,
                          const OptimizerSettings& settings) {
  const RingPolymerGrid grid(beta, n_beads);
  const Vec x = collapse_point(model, beta, kind, settings);
  const ModeSpectrum s = collapsed_mode_spectrum(BeadPath::collapsed(x, n_beads), grid, model,
                                                 kind, settings.zero_tol, settings.fd_step);
  return s.eigenvalues(1);
}

CrossoverResult crossover_beta(const DiabaticModel& model, SurfaceKind kind,
                               const CrossoverOptions& opts, const OptimizerSettings& settings) {
  CrossoverResult res;
  res.kind = kind;
  double lo = 0.0, hi = 0.0;
  if (opts.bracket) {
    std::tie(lo, hi) = *opts.bracket;
    if (!(lo > 0.0 && hi > lo)) fail(ErrorKind::invalid_input, "crossover bracket must satisfy 0 < lo < hi");
  } else {
    double g = 1.0;
    try {
      g = 2.0 * std::numbers::pi / barrier_top(model, std::nullopt, settings).omega_b;
    } catch (const Error&) {
    }
    lo = g;
    hi = 2.0 * g;
  }
  const int n = opts.n_beads > 0 ? opts.n_beads
                                 : RingPolymerGrid::beads_for(hi, opts.beta_n_max, 64);
  res.n_beads = n;
  // a collapsed potential without a barrier (hot golden-rule regime) counts as above crossover
  auto eval = [&](double b) {
    double l = std::numeric_limits<double>::infinity();
    try {
      l = tracked_eigenvalue(model, b, n, kind, settings);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::search_failure) throw;
    }
    res.trace.emplace_back(b, l);
    return l;
  };

  double f_lo = eval(lo), f_hi = eval(hi);
  if (!opts.bracket) {
    for (int k = 0; k < 40 && f_lo <= 0.0; ++k) {
      hi = lo;
      f_hi = f_lo;
      lo *= 0.5;
      f_lo = eval(lo);
    }
    for (int k = 0; k < 40 && f_hi >= 0.0; ++k) {
      lo = hi;
      f_lo = f_hi;
      hi *= 2.0;
      f_hi = eval(hi);
    }
  }
  if (!(f_lo > 0.0 && f_hi < 0.0))
    fail(ErrorKind::bracketing, "tracked eigenvalue does not change sign across the bracket");
  while (hi - lo > opts.rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (eval(mid) > 0.0) lo = mid;
    else hi = mid;
  }
  res.lo = lo;
  res.hi = hi;
  res.beta_c = 0.5 * (lo + hi);
  return res;
}

}  // namespace nimf
