#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "nimf/bead_matrix.hpp"
#include "nimf/errors.hpp"
#include "nimf/rp_potential.hpp"
#include "support.hpp"

using namespace nimf;
using testing_support::random_path;

TEST_CASE("spring energy") {
  const RingPolymerGrid g(2.0, 2);  // β_N = 1
  BeadPath p(2, 1);
  p.coords()(1, 0) = 1.0;
  const Vec m = Vec::Ones(1);
  CHECK(spring_energy(p, g, m).energy == doctest::Approx(1.0));
  CHECK(spring_energy(BeadPath::collapsed(Vec::Constant(1, 0.3), 2), g, m).energy == 0.0);

  std::mt19937_64 rng(3);
  const RingPolymerGrid g8(3.0, 8);
  const BeadPath r = random_path(rng, 8, 2, 0.0, 1.0);
  Vec m2(2);
  m2 << 1.0, 2.5;
  const EnergyGradient e = spring_energy(r, g8, m2);
  RowMat fd(8, 2);
  for (int i = 0; i < 8; ++i)
    for (int d = 0; d < 2; ++d) {
      BeadPath a = r, b = r;
      a.coords()(i, d) += 1e-5;
      b.coords()(i, d) -= 1e-5;
      fd(i, d) = (spring_energy(a, g8, m2).energy - spring_energy(b, g8, m2).energy) / 2e-5;
    }
  CHECK(testing_support::rel_err(e.gradient, fd) < 1e-8);
}

TEST_CASE("single-bead closed forms") {
  const LinearCrossingModel m(1.0, -1.0, 1.0);
  const RingPolymerGrid g(1.0, 1);
  const BeadPath p = BeadPath::collapsed(Vec::Zero(1), 1);
  CHECK(surface_energy(p, g, m, SurfaceKind::mf) ==
        doctest::Approx(-std::log(2 * std::cosh(1.0))).epsilon(1e-14));
  CHECK(surface_energy(p, g, m, SurfaceKind::nimf) ==
        doctest::Approx(-std::log(2 * std::cosh(1.0) - 2)).epsilon(1e-14));
}

TEST_CASE("zero coupling mean-field surface is diagonal") {
  const LinearCrossingModel m(1.0, -2.0, 0.0, 0.3);
  std::mt19937_64 rng(5);
  const RingPolymerGrid g(4.0, 10);
  const BeadPath p = random_path(rng, 10, 1, 0.0, 1.0);
  double s0 = 0.0, s1 = 0.0;
  for (int i = 0; i < 10; ++i) {
    s0 += 0.3 + p.coords()(i, 0);
    s1 += 0.3 - 2.0 * p.coords()(i, 0);
  }
  const double b = g.beta_n();
  CHECK(surface_energy(p, g, m, SurfaceKind::mf) ==
        doctest::Approx(-std::log(std::exp(-b * s0) + std::exp(-b * s1)) / b).epsilon(1e-13));
  CHECK_THROWS_AS(surface_energy(p, g, m, SurfaceKind::nimf), DomainError);
}

namespace {
struct Case {
  std::unique_ptr<DiabaticModel> model;
  double beta;
  int n;
  double centre, width;
  double fd_step;
};

std::vector<Case> cases() {
  std::vector<Case> c;
  c.push_back({std::make_unique<LinearCrossingModel>(1.0, -1.0, 0.1), 11.0, 16, 0.0, 1.5, 1e-4});
  c.push_back({std::make_unique<LinearCrossingModel>(1.0, -10.0, 1e-3), 4.0, 12, 0.0, 0.5, 2e-6});
  c.push_back({std::make_unique<LinearCrossingModel>(1.0, -1.0, 10.0), 11.0, 16, 0.0, 8.0, 1e-3});
  c.push_back({std::make_unique<SystemBathModel>(discretize_bath(BathSpec{}, 1.0)), 1.0, 8, 0.0, 0.6, 1e-4});
  return c;
}
}  // namespace

TEST_CASE("analytic gradients match finite differences") {
  std::mt19937_64 rng(11);
  for (const auto& c : cases()) {
    const RingPolymerGrid g(c.beta, c.n);
    for (SurfaceKind k : {SurfaceKind::bo, SurfaceKind::mf, SurfaceKind::nimf}) {
      double worst = 0.0;
      for (int probe = 0; probe < 25; ++probe) {
        const BeadPath p = random_path(rng, c.n, c.model->dimension(), c.centre, c.width);
        const RowMat an = rp_gradient(p, g, *c.model, k);
        const RowMat fd = testing_support::fd_gradient(p, g, *c.model, k, c.fd_step);
        worst = std::max(worst, testing_support::rel_err(an, fd));
      }
      INFO(c.model->name(), " ", to_string(k));
      CHECK(worst < 1e-6);
    }
  }
}

TEST_CASE("cyclic and reversal invariance") {
  std::mt19937_64 rng(13);
  for (const auto& c : cases()) {
    const RingPolymerGrid g(c.beta, c.n);
    for (SurfaceKind k : {SurfaceKind::bo, SurfaceKind::mf, SurfaceKind::nimf}) {
      const BeadPath p = random_path(rng, c.n, c.model->dimension(), c.centre, c.width);
      const double e = surface_energy(p, g, *c.model, k);
      const double tol = 1e-13 * std::max(1.0, std::abs(e));
      for (int s : {1, 3, c.n - 1}) CHECK(std::abs(surface_energy(p.shifted(s), g, *c.model, k) - e) < tol);
      CHECK(std::abs(surface_energy(p.reversed(), g, *c.model, k) - e) < tol);
      const RowMat gr = rp_gradient(p, g, *c.model, k);
      const RowMat gs = rp_gradient(p.shifted(2), g, *c.model, k);
      for (int i = 0; i < c.n; ++i)
        CHECK((gs.row((i + 2) % c.n) - gr.row(i)).cwiseAbs().maxCoeff() <
              1e-10 * std::max(1.0, gr.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("stable and direct zero-hop forms agree") {
  std::mt19937_64 rng(17);
  int compared = 0;
  for (const auto& c : cases()) {
    const RingPolymerGrid g(c.beta, c.n);
    for (int probe = 0; probe < 20; ++probe) {
      const BeadPath p = random_path(rng, c.n, c.model->dimension(), c.centre, c.width);
      const double stable = surface_energy(p, g, *c.model, SurfaceKind::nimf);
      const double mf = surface_energy(p, g, *c.model, SurfaceKind::mf);
      CHECK(stable >= mf);
      // fraction of the full trace left after removing the zero-hop term
      const double frac = std::exp(-g.beta_n() * (stable - mf));
      const double direct = surface_energy_nimf_direct(p, g, *c.model);
      if (-std::expm1(-g.beta_n() * (direct - mf)) > 1e-12) CHECK(stable > mf);
      if (frac < 1e-4) continue;
      // compare the trace arguments, relative
      CHECK(std::abs(std::expm1(-g.beta_n() * (direct - stable))) < 1e-10);
      ++compared;
    }
  }
  CHECK(compared > 20);
}

TEST_CASE("hop remainder keeps full precision at tiny coupling") {
  // exp(-β_N U_NIMF)/Δ² becomes Δ-independent as Δ → 0
  std::mt19937_64 rng(19);
  const RingPolymerGrid g(11.0, 16);
  const BeadPath p = random_path(rng, 16, 1, 0.0, 1.0);
  auto scaled = [&](double d) {
    const LinearCrossingModel m(1.0, -1.0, d);
    return std::exp(-g.beta_n() * surface_energy(p, g, m, SurfaceKind::nimf)) / (d * d);
  };
  const double a = scaled(1e-4), b = scaled(1e-6), c = scaled(1e-8);
  CHECK(std::abs(b / c - 1.0) < 1e-8);
  CHECK(std::abs(a / c - 1.0) < 1e-4);
  // corrections shrink like Δ²
  const double d2 = std::abs(scaled(1e-2) / c - 1.0), d3 = std::abs(scaled(1e-3) / c - 1.0);
  CHECK(d2 / d3 == doctest::Approx(100.0).epsilon(0.05));
}

TEST_CASE("free ring-polymer spectrum") {
  const ParabolicModel free(0.0, 0.0, 0.5, 2.0);
  const int n = 12;
  const RingPolymerGrid g(3.0, n);
  const BeadPath p = BeadPath::collapsed(Vec::Constant(1, 0.2), n);
  for (SurfaceKind k : {SurfaceKind::bo, SurfaceKind::mf, SurfaceKind::nimf}) {
    const ModeSpectrum s = mode_spectrum(rp_hessian(p, g, free, k), bead_masses(free, n));
    std::vector<double> exact;
    for (int j = 0; j < n; ++j) {
      const double w = 2.0 * std::sin(std::numbers::pi * j / n) / g.beta_n();
      exact.push_back(w * w);
    }
    std::sort(exact.begin(), exact.end());
    for (int j = 1; j < n; ++j) CHECK(s.eigenvalues(j) == doctest::Approx(exact[j]).epsilon(1e-6));
    CHECK(std::abs(s.eigenvalues(0)) < 1e-6);
  }
}

TEST_CASE("BO Hessian equals direct assembly") {
  const LinearCrossingModel m(1.0, -1.0, 0.8);
  const int n = 10;
  const RingPolymerGrid g(7.0, n);
  std::mt19937_64 rng(23);
  const BeadPath p = random_path(rng, n, 1, 0.0, 1.0);
  Mat direct = Mat::Zero(n, n);
  const double k = 1.0 / (g.beta_n() * g.beta_n());
  for (int i = 0; i < n; ++i) {
    direct(i, i) += 2 * k;
    direct(i, (i + 1) % n) -= k;
    direct(i, (i + n - 1) % n) -= k;
    const double x = p.coords()(i, 0);
    direct(i, i) += -0.8 * 0.8 / std::pow(x * x + 0.64, 1.5);  // d²/dx² of -sqrt(x²+Δ²)
  }
  const Mat h = rp_hessian(p, g, m, SurfaceKind::bo);
  CHECK((h - direct).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("finite-difference Hessian is symmetric before symmetrization") {
  const LinearCrossingModel m(1.0, -10.0, 0.3);
  const int n = 8;
  const RingPolymerGrid g(4.0, n);
  std::mt19937_64 rng(29);
  const BeadPath p = random_path(rng, n, 1, 0.0, 0.3);
  // rebuild columns manually
  Mat h(n, n);
  for (int c = 0; c < n; ++c) {
    BeadPath a = p, b = p;
    a.coords()(c, 0) += 1e-5;
    b.coords()(c, 0) -= 1e-5;
    const RowMat d = (rp_gradient(a, g, m, SurfaceKind::nimf) - rp_gradient(b, g, m, SurfaceKind::nimf)) / 2e-5;
    h.col(c) = Eigen::Map<const Vec>(d.data(), n);
  }
  CHECK((h - h.transpose()).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, h.cwiseAbs().maxCoeff()) * 1e3);
}

TEST_CASE("collapsed Hessian structure") {
  const SystemBathModel m = discretize_bath(BathSpec{}, 1.0);
  const int n = 6;
  const RingPolymerGrid g(1.0, n);
  const BeadPath p = BeadPath::collapsed(m.reactant_guess(), n);
  for (SurfaceKind k : {SurfaceKind::bo, SurfaceKind::nimf}) {
    const Mat full = rp_hessian(p, g, m, k);
    const Mat circ = rp_hessian_collapsed(p, g, m, k);
    CHECK((full - circ).cwiseAbs().maxCoeff() < 1e-5 * full.cwiseAbs().maxCoeff());
    const ModeSpectrum a = mode_spectrum(full, bead_masses(m, n));
    const ModeSpectrum b = collapsed_mode_spectrum(p, g, m, k);
    CHECK((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff() < 1e-5 * a.eigenvalues.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("collapsed gradient components are equal") {
  const LinearCrossingModel m(1.0, -10.0, 0.1);
  const RingPolymerGrid g(2.0, 9);
  const BeadPath p = BeadPath::collapsed(Vec::Constant(1, 0.05), 9);
  const RowMat gr = rp_gradient(p, g, m, SurfaceKind::nimf);
  Vec ge;
  collapsed_potential(Vec::Constant(1, 0.05), 2.0, m, SurfaceKind::nimf, &ge);
  for (int i = 0; i < 9; ++i) CHECK(gr(i, 0) == doctest::Approx(ge(0)).epsilon(1e-10));
}

TEST_CASE("bead electronics") {
  const LinearCrossingModel m(1.0, -1.0, 0.1);
  const int n = 16;
  const RingPolymerGrid g(11.0, n);
  const BeadPath c = BeadPath::collapsed(Vec::Constant(1, 0.4), n);
  const BeadElectronics e = bead_electronics(c, g, m, SurfaceKind::nimf);
  for (int i = 1; i < n; ++i) {
    CHECK(e.weights(i, 0) == doctest::Approx(e.weights(0, 0)));
    CHECK(e.gap(i) == e.gap(0));
  }
  CHECK(e.weights.row(0).sum() == doctest::Approx(1.0));
}

TEST_CASE("bead weight derivatives at small coupling") {
  // hop-block derivative keeps relative accuracy as Δ → 0
  for (double delta : {1e-2, 1e-4, 1e-6}) {
    for (double x : {-0.7, -0.05, 0.0, 0.3, 2.0}) {
      const LinearCrossingModel m(1.0, -10.0, delta);
      DiabaticValues dv(1);
      BeadWeights w, wp, wm;
      BeadWeightDerivs dw;
      eval_diabatic(m, &x, dv);
      bead_weights(dv, 0.5, w, &dw);
      const double h = 1e-6;
      double xp = x + h, xm = x - h;
      eval_diabatic(m, &xp, dv);
      bead_weights(dv, 0.5, wp);
      eval_diabatic(m, &xm, dv);
      bead_weights(dv, 0.5, wm);
      // rescale neighbours to the centre's fixed scale
      const Mat2 fd = (wp.hop * std::exp(wp.log_scale - w.log_scale) -
                       wm.hop * std::exp(wm.log_scale - w.log_scale)) / (2 * h);
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
          INFO("delta=", delta, " x=", x, " entry ", r, c);
          CHECK(std::abs(dw.hop[0](r, c) - fd(r, c)) <= 1e-5 * std::abs(fd(r, c)) + 1e-22);
        }
    }
  }
}
