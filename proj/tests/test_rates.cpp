#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nimf/errors.hpp"
#include "nimf/oracles.hpp"
#include "nimf/rates.hpp"

using namespace nimf;
using std::numbers::pi;

namespace {

bool has_warning(const RateResult& r, const std::string& needle) {
  return std::any_of(r.warnings.begin(), r.warnings.end(),
                     [&](const std::string& w) { return w.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("reactant partition functions") {
  // bound harmonic well: lower adiabat 0.1 + ½x²
  const ParabolicModel well(1.0, 0.3, 0.2);
  const double beta = 5.0;
  const RingPolymerGrid grid(beta, 128);
  const PartitionFactors z = reactant_partition(well, grid, SurfaceKind::bo);
  CHECK(z.origin == PartitionOrigin::steepest_descent);
  CHECK(z.n_modes == 128);
  const double exact = -0.1 * beta - std::log(2.0 * std::sinh(0.5 * beta));
  CHECK(std::abs(std::exp(z.log_z - exact) - 1.0) < 5e-3);

  const LinearCrossingModel scatter(1.0, -1.0, 0.1);
  const double a = reactant_partition(scatter, RingPolymerGrid(3.0, 16), SurfaceKind::nimf).log_z;
  const double b = reactant_partition(scatter, RingPolymerGrid(3.0, 256), SurfaceKind::nimf).log_z;
  CHECK(a == b);
  CHECK(a == doctest::Approx(0.5 * std::log(1.0 / (6.0 * pi))));
  CHECK_THROWS_AS(free_particle_log_z(-1.0, 1.0), Error);
}

TEST_CASE("parabolic barrier above crossover") {
  const double beta = 3.0, delta = 5.0;
  const ParabolicModel barrier(-1.0, 0.0, delta);
  RateOptions o;
  const RateResult r = compute_rate(barrier, RingPolymerGrid(beta, 128), SurfaceKind::bo, o);
  CHECK(r.regime == Regime::high_temperature);
  CHECK(r.above_crossover);
  CHECK(has_warning(r, "*"));
  CHECK(r.beta_c == doctest::Approx(2.0 * pi).epsilon(1e-3));
  CHECK(r.components.form == PrefactorForm::affleck);
  // k·Z_R = (1/2πβħ)·(βħω/2)/sin(βħω/2)·e^{-βV}
  const double closed = std::log(0.5 / std::sin(0.5 * beta) / (2.0 * pi)) + beta * delta -
                        free_particle_log_z(1.0, beta);
  CHECK(std::abs(r.log_k() - closed) < std::log(1.01));
  CHECK(reconstruct_log10_k(r) == doctest::Approx(r.log10_k).epsilon(1e-14));
  REQUIRE(r.saddle);
  CHECK(r.saddle->classification == PointClass::collapsed_barrier);
}

TEST_CASE("symmetric crossing deep tunnelling") {
  const LinearCrossingModel m(1.0, -1.0, 0.1);
  RateOptions o;
  o.crossover.n_beads = 64;
  const RateResult r128 = compute_rate(m, RingPolymerGrid(11.0, 128), SurfaceKind::nimf, o);
  const RateResult r256 = compute_rate(m, RingPolymerGrid(11.0, 256), SurfaceKind::nimf, o);
  CHECK(r128.regime == Regime::deep_tunnelling);
  CHECK_FALSE(r128.above_crossover);
  CHECK(r128.warnings.empty());
  CHECK(std::abs(r256.log_k() - r128.log_k()) < std::log(1.01));
  // exact scattering rate 3.369453e4 (frozen in the oracle tests)
  CHECK(std::abs(r256.log_k() - std::log(3.369453e4)) < std::log(1.3));
  CHECK(reconstruct_log10_k(r128) == doctest::Approx(r128.log10_k).epsilon(1e-14));
  CHECK(r128.components.b_n > 0.0);
  REQUIRE(r128.saddle);
  CHECK(r128.saddle->spectrum.n_negative == 1);
  CHECK(r128.saddle->spectrum.n_zero == 1);
}

TEST_CASE("ImZ factors reject the wrong stationary point") {
  const LinearCrossingModel m(1.0, -1.0, 0.1);
  const RingPolymerGrid deep(11.0, 64), hot(2.0, 64);
  const StationaryPoint inst = find_instanton(m, deep, SurfaceKind::nimf);
  const StationaryPoint flat = find_collapsed_barrier(m, hot, SurfaceKind::nimf);
  CHECK_THROWS_AS(im_z_collapsed(inst, deep), Error);
  CHECK_THROWS_AS(im_z_instanton(flat, hot), Error);
  StationaryPoint forged = flat;
  forged.classification = PointClass::instanton;
  CHECK_THROWS_AS(im_z_instanton(forged, hot), Error);

  const ImZFactors f = im_z_instanton(inst, deep);
  CHECK(f.log_im_z == doctest::Approx(f.log_zero_mode - f.log_mode_product - f.action).epsilon(1e-14));
  CHECK(f.log_zero_mode ==
        doctest::Approx(std::log(32.0) + 0.5 * std::log(inst.b_n / (2.0 * pi * deep.beta_n()))).epsilon(1e-14));
}

TEST_CASE("crossover continuity on the adiabatic surface") {
  const LinearCrossingModel m(1.0, -1.0, 10.0);
  const int n = 128;
  CrossoverOptions co;
  co.n_beads = n;
  const CrossoverResult cr = crossover_beta(m, SurfaceKind::bo, co);
  // both prefactors applied to the same collapsed polymer at the crossover
  const RingPolymerGrid grid(cr.lo, n);
  const StationaryPoint sp = find_collapsed_barrier(m, grid, SurfaceKind::bo);
  const ImZFactors imz = im_z_collapsed(sp, grid);
  const PartitionFactors zr = reactant_partition(m, grid, SurfaceKind::bo);
  const double deep = rate_deep_tunnelling(imz, zr, grid).log_k();
  const double hot = rate_high_t_bo(imz, zr, grid, imz.omega_unstable).log_k();
  CHECK(std::abs(deep - hot) < std::log(1.01));

  // the instanton rate has a finite limit from the cold side
  RateOptions o;
  o.beta_c = cr.beta_c;
  auto cold = [&](double f) {
    const double b = cr.beta_c * f;
    const RateResult r = compute_rate(m, RingPolymerGrid(b, n), SurfaceKind::bo, o);
    CHECK(r.regime == Regime::deep_tunnelling);
    return r.log10_k - b * 10.0 / std::numbers::ln10;
  };
  CHECK(std::abs(cold(1.0 + 1e-4) - cold(1.0 + 1e-3)) < 0.01);
}

TEST_CASE("high-temperature prefactors coincide in the adiabatic limit") {
  ImZFactors imz;
  imz.log_im_z = -3.0;
  PartitionFactors zr;
  zr.log_z = 0.5;
  const double omega = 1.7;
  const double beta_c = 2.0 * pi / omega;
  const RingPolymerGrid grid(0.8 * beta_c, 32);
  const double affleck = rate_high_t_bo(imz, zr, grid, omega).log10_k;
  const RateResult nimf = rate_high_t_nimf(imz, zr, grid, beta_c, omega);
  CHECK(nimf.log10_k == doctest::Approx(affleck).epsilon(1e-13));
  CHECK(nimf.components.eta == -2.0);
  CHECK_THROWS_AS(rate_high_t_nimf(imz, zr, grid, beta_c, 0.0), Error);
  CHECK_THROWS_AS(rate_high_t_bo(imz, zr, grid, -1.0), Error);
}

TEST_CASE("mean-field surface above crossover") {
  const LinearCrossingModel m(1.0, -1.0, 1e-2);
  RateOptions o;
  o.crossover.n_beads = 64;
  CHECK_THROWS_AS(compute_rate(m, RingPolymerGrid(11.0, 64), SurfaceKind::mf, o), Error);
  o.mf_high_t = MfHighT::affleck;
  const RateResult r = compute_rate(m, RingPolymerGrid(11.0, 64), SurfaceKind::mf, o);
  CHECK(r.above_crossover);
  CHECK(has_warning(r, "adiabatic prefactor"));
  CHECK(std::isfinite(r.log10_k));
}

TEST_CASE("crossover cache and near-crossover warning") {
  const LinearCrossingModel m(1.0, -1.0, 1.0);
  CrossoverCache cache;
  RateOptions o;
  o.crossover.n_beads = 64;
  o.cache = &cache;
  const RateResult a = compute_rate(m, RingPolymerGrid(11.0, 64), SurfaceKind::nimf, o);
  const RateResult b = compute_rate(m, RingPolymerGrid(12.0, 64), SurfaceKind::nimf, o);
  CHECK(a.beta_c == b.beta_c);
  CHECK(a.beta_c == crossover_beta(m, SurfaceKind::nimf, o.crossover).beta_c);
  o.beta_c = 10.5;
  o.cache = nullptr;
  CHECK(has_warning(compute_rate(m, RingPolymerGrid(11.0, 64), SurfaceKind::nimf, o), "within 10%"));
}
