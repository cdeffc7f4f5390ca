#include "nimf/models.hpp"

#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <numbers>

#include "nimf/errors.hpp"

namespace nimf {

namespace {
int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

Vec vec1(double v) { return Vec::Constant(1, v); }
}  // namespace

DiabaticModel::DiabaticModel(Vec masses, int coupling_sign)
    : masses_(std::move(masses)), coupling_sign_(coupling_sign) {
  if (masses_.size() < 1) fail(ErrorKind::invalid_input, "model needs at least one coordinate");
  for (Eigen::Index i = 0; i < masses_.size(); ++i)
    if (!(masses_(i) > 0.0) || !std::isfinite(masses_(i)))
      fail(ErrorKind::invalid_input, "masses must be positive and finite");
}

Vec DiabaticModel::reactant_guess() const {
  fail(ErrorKind::invalid_state, name() + " has no bound reactant");
}

Vec DiabaticModel::barrier_guess() const { return Vec::Zero(dimension()); }

std::pair<double, double> DiabaticModel::barrier_bracket() const {
  fail(ErrorKind::invalid_state, name() + " declares no barrier bracket");
}

// ---- linear crossing

LinearCrossingModel::LinearCrossingModel(double kappa0, double kappa1, double delta,
                                         double v_cross, double mass)
    : LinearCrossingModel(kappa0, kappa1, delta, v_cross, mass, kappa0 > kappa1 ? -1 : 1) {}

LinearCrossingModel::LinearCrossingModel(double kappa0, double kappa1, double delta,
                                         double v_cross, double mass, int reactant_side)
    : DiabaticModel(vec1(mass), sign_of(delta)),
      kappa0_(kappa0), kappa1_(kappa1), delta_(delta), v_cross_(v_cross), side_(reactant_side) {
  if (!std::isfinite(kappa0) || !std::isfinite(kappa1) || !std::isfinite(delta) ||
      !std::isfinite(v_cross))
    fail(ErrorKind::invalid_input, "linear crossing parameters must be finite");
  if (kappa0 == kappa1) fail(ErrorKind::invalid_input, "linear crossing needs kappa0 != kappa1");
  if (reactant_side != -1 && reactant_side != 1)
    fail(ErrorKind::invalid_input, "reactant side must be -1 or +1");
}

std::map<std::string, double> LinearCrossingModel::parameters() const {
  return {{"kappa0", kappa0_}, {"kappa1", kappa1_}, {"delta", delta_},
          {"v_cross", v_cross_}, {"mass", mass()}, {"reactant_side", double(side_)}};
}

void LinearCrossingModel::evaluate(const double* x, DiabaticValues& out) const {
  out.v0 = v_cross_ + kappa0_ * x[0];
  out.v1 = v_cross_ + kappa1_ * x[0];
  out.delta = delta_;
  out.grad_v0(0) = kappa0_;
  out.grad_v1(0) = kappa1_;
  out.grad_delta(0) = 0.0;
}

Vec LinearCrossingModel::barrier_guess() const { return Vec::Zero(1); }

std::pair<double, double> LinearCrossingModel::barrier_bracket() const {
  const double b = 100.0 * std::abs(delta_) / std::abs(kappa0_ - kappa1_) + 1.0;
  return {-b, b};
}

std::unique_ptr<DiabaticModel> LinearCrossingModel::with_delta(double delta) const {
  return std::make_unique<LinearCrossingModel>(kappa0_, kappa1_, delta, v_cross_, mass(), side_);
}

// ---- parabolic

ParabolicModel::ParabolicModel(double curvature, double offset, double delta, double mass)
    : DiabaticModel(vec1(mass), sign_of(delta)), curvature_(curvature), offset_(offset),
      delta_(delta) {
  if (!std::isfinite(curvature) || !std::isfinite(offset) || !std::isfinite(delta))
    fail(ErrorKind::invalid_input, "parabolic model parameters must be finite");
}

std::map<std::string, double> ParabolicModel::parameters() const {
  return {{"curvature", curvature_}, {"offset", offset_}, {"delta", delta_}, {"mass", masses_(0)}};
}

void ParabolicModel::evaluate(const double* x, DiabaticValues& out) const {
  const double v = offset_ + 0.5 * curvature_ * x[0] * x[0];
  out.v0 = v;
  out.v1 = v;
  out.delta = delta_;
  out.grad_v0(0) = curvature_ * x[0];
  out.grad_v1(0) = curvature_ * x[0];
  out.grad_delta(0) = 0.0;
}

std::unique_ptr<DiabaticModel> ParabolicModel::with_delta(double delta) const {
  return std::make_unique<ParabolicModel>(curvature_, offset_, delta, masses_(0));
}

// ---- system-bath

double BathSpec::cutoff() const {
  return omega_max > 0.0 ? omega_max : 10.0 * std::max(omega, gamma);
}

void BathSpec::validate() const {
  if (!(reorganisation > 0.0) || !(omega > 0.0) || !(gamma >= 0.0) || omega_max < 0.0 ||
      !std::isfinite(reorganisation + omega + gamma + omega_max))
    fail(ErrorKind::invalid_input, "bath spec needs positive reorganisation, omega, omega_max");
  if (bath_size < 1) fail(ErrorKind::invalid_input, "bath needs at least one oscillator");
}

SystemBathModel::SystemBathModel(BathSpec spec, Vec couplings, Vec frequencies, double delta)
    : DiabaticModel(Vec::Ones(spec.dimension()), sign_of(delta)),
      spec_(spec), c_(std::move(couplings)), w_(std::move(frequencies)), delta_(delta) {
  spec_.validate();
  if (c_.size() != spec_.bath_size || w_.size() != spec_.bath_size)
    fail(ErrorKind::invalid_input, "bath coupling/frequency count mismatch");
  if (!std::isfinite(delta)) fail(ErrorKind::invalid_input, "delta must be finite");
  // reorganisation energy 2Ω²Q0² = Λ
  q0_ = std::sqrt(spec_.reorganisation / 2.0) / spec_.omega;
}

std::map<std::string, double> SystemBathModel::parameters() const {
  return {{"reorganisation", spec_.reorganisation}, {"omega", spec_.omega},
          {"gamma", spec_.gamma}, {"f", double(spec_.dimension())},
          {"omega_max", spec_.cutoff()}, {"delta", delta_}};
}

void SystemBathModel::evaluate(const double* x, DiabaticValues& out) const {
  const double q = x[0];
  const double om2 = spec_.omega * spec_.omega;
  double bath = 0.0, dq_bath = 0.0;
  for (Eigen::Index j = 0; j < w_.size(); ++j) {
    const double u = x[j + 1] - c_(j) * q / w_(j);
    const double w2u = w_(j) * w_(j) * u;
    bath += 0.5 * w2u * u;
    dq_bath -= w2u * c_(j) / w_(j);
    out.grad_v0(j + 1) = w2u;
    out.grad_v1(j + 1) = w2u;
    out.grad_delta(j + 1) = 0.0;
  }
  out.v0 = 0.5 * om2 * (q + q0_) * (q + q0_) + bath;
  out.v1 = 0.5 * om2 * (q - q0_) * (q - q0_) + bath;
  out.grad_v0(0) = om2 * (q + q0_) + dq_bath;
  out.grad_v1(0) = om2 * (q - q0_) + dq_bath;
  out.grad_delta(0) = 0.0;
  out.delta = delta_;
}

Vec SystemBathModel::reactant_guess() const {
  Vec x(dimension());
  x(0) = -q0_;
  for (Eigen::Index j = 0; j < w_.size(); ++j) x(j + 1) = c_(j) * x(0) / w_(j);
  return x;
}

std::unique_ptr<DiabaticModel> SystemBathModel::with_delta(double delta) const {
  return std::make_unique<SystemBathModel>(spec_, c_, w_, delta);
}

double SystemBathModel::friction_kernel(double t) const {
  double k = 0.0;
  for (Eigen::Index j = 0; j < w_.size(); ++j) k += c_(j) * c_(j) * std::cos(w_(j) * t);
  return k;
}

double ohmic_kernel(double gamma, double omega_max, double t) {
  // (2/π) γ ∫_0^ωmax cos(ωt) dω
  const double s = t == 0.0 ? omega_max : std::sin(omega_max * t) / t;
  return 2.0 / std::numbers::pi * gamma * s;
}

SystemBathModel discretize_bath(const BathSpec& spec, double delta) {
  spec.validate();
  const int nb = spec.bath_size;
  const double dw = spec.cutoff() / nb;
  Vec w(nb), c(nb);
  for (int j = 0; j < nb; ++j) {
    w(j) = dw * (j + 0.5);
    c(j) = std::sqrt(2.0 * spec.gamma * dw / std::numbers::pi);
  }
  return SystemBathModel(spec, c, w, delta);
}

// ---- evaluation

void eval_diabatic(const DiabaticModel& model, const double* x, DiabaticValues& out) {
  const Eigen::Index f = model.dimension();
  for (Eigen::Index d = 0; d < f; ++d)
    if (!std::isfinite(x[d])) fail(ErrorKind::invalid_input, "non-finite coordinate");
  if (out.grad_v0.size() != f) out = DiabaticValues(f);
  model.evaluate(x, out);
  const int s = sign_of(out.delta);
  if (s != 0 && s != model.coupling_sign())
    fail(ErrorKind::unsupported_model, "coupling changes sign (geometric phase not supported)");
}

DiabaticValues eval_diabatic(const DiabaticModel& model, std::span<const double> x) {
  if (static_cast<Eigen::Index>(x.size()) != model.dimension())
    fail(ErrorKind::invalid_input, "coordinate length does not match model dimension");
  DiabaticValues out(model.dimension());
  eval_diabatic(model, x.data(), out);
  return out;
}

double lower_adiabat_value(const DiabaticValues& d) {
  const double half = 0.5 * (d.v0 - d.v1);
  return 0.5 * (d.v0 + d.v1) - std::hypot(half, d.delta);
}

void lower_adiabat_gradient(const DiabaticValues& d, Eigen::Ref<Vec> grad) {
  const double half = 0.5 * (d.v0 - d.v1);
  const double r = std::hypot(half, d.delta);
  grad = 0.5 * (d.grad_v0 + d.grad_v1);
  if (r > 0.0) grad -= (half * 0.5 * (d.grad_v0 - d.grad_v1) + d.delta * d.grad_delta) / r;
}

AdiabatValue lower_adiabat(const DiabaticModel& model, std::span<const double> x) {
  const DiabaticValues d = eval_diabatic(model, x);
  AdiabatValue out;
  out.value = lower_adiabat_value(d);
  out.gradient.resize(model.dimension());
  lower_adiabat_gradient(d, out.gradient);
  return out;
}

namespace {

GradientFn adiabat_fn(const DiabaticModel& model) {
  return [&model](const Vec& x, Vec& g) {
    DiabaticValues d(model.dimension());
    eval_diabatic(model, x.data(), d);
    g.resize(model.dimension());
    lower_adiabat_gradient(d, g);
    return lower_adiabat_value(d);
  };
}

}  // namespace

Mat lower_adiabat_hessian(const DiabaticModel& model, const Vec& x, double step) {
  return fd_hessian(adiabat_fn(model), x, model.masses(), step, 1);
}

Vec mass_weighted_eigenvalues(const Mat& hessian, const Vec& masses) {
  const Vec is = masses.cwiseSqrt().cwiseInverse();
  const Mat hw = is.asDiagonal() * hessian * is.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> es(hw, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorKind::numerical, "eigensolver failed");
  return es.eigenvalues();
}

AdiabatInfo barrier_top(const DiabaticModel& model,
                        std::optional<std::pair<double, double>> bracket,
                        const OptimizerSettings& settings) {
  AdiabatInfo info;
  const Eigen::Index f = model.dimension();
  const GradientFn fn = adiabat_fn(model);
  auto hess = [&](const Vec& x) { return fd_hessian(fn, x, model.masses(), settings.fd_step, 1); };

  if (f == 1) {
    const auto [lo, hi] = bracket ? *bracket : model.barrier_bracket();
    if (!(hi > lo)) fail(ErrorKind::invalid_input, "barrier bracket must satisfy lo < hi");
    auto neg = [&](double x) {
      Vec xv = vec1(x), g;
      return -fn(xv, g);
    };
    const auto [xb, negv] = boost::math::tools::brent_find_minima(neg, lo, hi, 52);
    const double edge = 1e-6 * (hi - lo);
    if (xb - lo < edge || hi - xb < edge)
      fail(ErrorKind::search_failure, "no barrier of the lower adiabat inside the bracket");
    info.x_barrier = vec1(xb);
    info.v_barrier = -negv;
  } else {
    OptimizerSettings s = settings;
    const OptimizeResult r = eigenvector_follow(fn, hess, model.barrier_guess(), model.masses(), 1, s);
    if (!r.converged) fail(ErrorKind::search_failure, "barrier saddle search failed: " + r.message);
    info.x_barrier = r.x;
    info.v_barrier = r.energy;
  }
  const Vec lam = mass_weighted_eigenvalues(hess(info.x_barrier), model.masses());
  if (!(lam(0) < 0.0) || (f > 1 && !(lam(1) > 0.0)))
    fail(ErrorKind::search_failure, "barrier point is not a first-order saddle of the lower adiabat");
  info.omega_b = std::sqrt(-lam(0));
  info.omega_barrier = lam.tail(f - 1).cwiseSqrt();

  if (model.bound_reactant()) {
    const OptimizeResult r =
        eigenvector_follow(fn, hess, model.reactant_guess(), model.masses(), 0, settings);
    if (!r.converged) fail(ErrorKind::search_failure, "reactant minimum search failed: " + r.message);
    const Vec lr = mass_weighted_eigenvalues(r.hessian, model.masses());
    if (!(lr(0) > 0.0)) fail(ErrorKind::invalid_state, "reactant minimum has imaginary frequencies");
    info.has_reactant = true;
    info.x_reactant = r.x;
    info.v_reactant = r.energy;
    info.omega_reactant = lr.cwiseSqrt();
  }
  return info;
}

}  // namespace nimf
