#include "nimf/rp_potential.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <numbers>

#include "nimf/bead_matrix.hpp"
#include "nimf/errors.hpp"

namespace nimf {

std::string to_string(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::bo: return "BO";
    case SurfaceKind::mf: return "MF";
    case SurfaceKind::nimf: return "NIMF";
  }
  return "?";
}

SurfaceKind parse_surface_kind(const std::string& s) {
  std::string u;
  for (char c : s)
    if (c != '-' && c != '_') u += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (u == "BO") return SurfaceKind::bo;
  if (u == "MF") return SurfaceKind::mf;
  if (u == "NIMF") return SurfaceKind::nimf;
  fail(ErrorKind::invalid_input, "unknown surface kind '" + s + "'");
}

// ---- grid and path

RingPolymerGrid::RingPolymerGrid(double beta, int n_beads, double hbar)
    : beta_(beta), n_(n_beads), hbar_(hbar) {
  if (!(beta > 0.0) || !std::isfinite(beta)) fail(ErrorKind::invalid_input, "beta must be positive");
  if (n_beads < 1) fail(ErrorKind::invalid_input, "need at least one bead");
  if (!(hbar > 0.0)) fail(ErrorKind::invalid_input, "hbar must be positive");
}

int RingPolymerGrid::beads_for(double beta, double beta_n_max, int n_min) {
  if (!(beta_n_max > 0.0)) fail(ErrorKind::invalid_input, "beta_n_max must be positive");
  const int n = static_cast<int>(std::ceil(beta / beta_n_max - 1e-12));
  return std::max(n, n_min);
}

BeadPath::BeadPath(int n_beads, Eigen::Index dim) : x_(RowMat::Zero(n_beads, dim)) {}

BeadPath::BeadPath(RowMat coords) : x_(std::move(coords)) {}

BeadPath BeadPath::collapsed(const Vec& point, int n_beads) {
  BeadPath p(n_beads, point.size());
  for (int i = 0; i < n_beads; ++i) p.x_.row(i) = point.transpose();
  return p;
}

BeadPath BeadPath::from_flat(const Vec& flat, int n_beads) {
  const Eigen::Index f = flat.size() / n_beads;
  return BeadPath(Eigen::Map<const RowMat>(flat.data(), n_beads, f));
}

Vec BeadPath::flat() const { return Eigen::Map<const Vec>(x_.data(), x_.size()); }

Vec BeadPath::centroid() const { return x_.colwise().mean().transpose(); }

double BeadPath::spread(const Vec& masses) const {
  const Vec c = centroid();
  double s = 0.0;
  for (int i = 0; i < n_beads(); ++i)
    s = std::max(s, ((x_.row(i).transpose() - c).array() * masses.array().sqrt()).matrix().norm());
  return s;
}

BeadPath BeadPath::shifted(int k) const {
  const int n = n_beads();
  RowMat y(n, dimension());
  for (int i = 0; i < n; ++i) y.row(((i + k) % n + n) % n) = x_.row(i);
  return BeadPath(std::move(y));
}

BeadPath BeadPath::reversed() const {
  const int n = n_beads();
  RowMat y(n, dimension());
  for (int i = 0; i < n; ++i) y.row(i) = x_.row((n - i) % n);
  return BeadPath(std::move(y));
}

BeadPath BeadPath::resampled(int n_new) const {
  const int n = n_beads();
  RowMat y(n_new, dimension());
  for (int i = 0; i < n_new; ++i) {
    const double t = static_cast<double>(i) * n / n_new;
    const int i0 = static_cast<int>(std::floor(t));
    const double a = t - i0;
    y.row(i) = (1.0 - a) * x_.row(i0 % n) + a * x_.row((i0 + 1) % n);
  }
  return BeadPath(std::move(y));
}

Vec bead_masses(const DiabaticModel& model, int n_beads) {
  return model.masses().replicate(n_beads, 1);
}

// ---- springs

EnergyGradient spring_energy(const BeadPath& path, const RingPolymerGrid& grid, const Vec& masses) {
  const int n = path.n_beads();
  const RowMat& x = path.coords();
  const double k = 1.0 / (grid.beta_n() * grid.beta_n() * grid.hbar() * grid.hbar());
  EnergyGradient out;
  out.gradient = RowMat::Zero(n, path.dimension());
  if (n == 1) return out;
  for (int i = 0; i < n; ++i) {
    const int im = (i + n - 1) % n;
    const int ip = (i + 1) % n;
    const Eigen::RowVectorXd dx = x.row(i) - x.row(im);
    out.energy += 0.5 * k * (dx.array().square() * masses.transpose().array()).sum();
    out.gradient.row(i) =
        k * masses.transpose().array() * (2.0 * x.row(i) - x.row(im) - x.row(ip)).array();
  }
  return out;
}

// ---- ordered products

namespace {

template <int K>
using MatK = Eigen::Matrix<double, K, K>;

template <int K>
void renormalize(MatK<K>& a, double& lg) {
  const double s = a.cwiseAbs().maxCoeff();
  if (s > 0.0 && std::isfinite(s)) {
    a /= s;
    lg += std::log(s);
  }
}

template <int K>
struct BeadBlocks {
  std::vector<MatK<K>> a;
  std::vector<std::vector<MatK<K>>> da;  // [bead][coord]
  double log_scale = 0.0;                // Σ over beads
};

template <int K>
BeadBlocks<K> assemble(const BeadPath& path, double b, const DiabaticModel& model, bool grad) {
  const int n = path.n_beads();
  const Eigen::Index f = path.dimension();
  if (f != model.dimension()) fail(ErrorKind::invalid_input, "path dimension does not match model");
  BeadBlocks<K> out;
  out.a.resize(n);
  if (grad) out.da.assign(n, std::vector<MatK<K>>(f));
  DiabaticValues dv(f);
  BeadWeights w;
  BeadWeightDerivs dw;
  for (int i = 0; i < n; ++i) {
    eval_diabatic(model, path.coords().row(i).data(), dv);
    bead_weights(dv, b, w, grad ? &dw : nullptr);
    out.log_scale += w.log_scale;
    if constexpr (K == 2) {
      out.a[i] = w.full;
      if (grad)
        for (Eigen::Index d = 0; d < f; ++d) out.da[i][d] = dw.full[d];
    } else {
      MatK<4> a = MatK<4>::Zero();
      a.template topLeftCorner<2, 2>() = w.zero_hop;
      a.template topRightCorner<2, 2>() = w.hop;
      a.template bottomRightCorner<2, 2>() = w.full;
      out.a[i] = a;
      if (grad)
        for (Eigen::Index d = 0; d < f; ++d) {
          MatK<4> g = MatK<4>::Zero();
          g.template topLeftCorner<2, 2>() = dw.zero_hop[d];
          g.template topRightCorner<2, 2>() = dw.hop[d];
          g.template bottomRightCorner<2, 2>() = dw.full[d];
          out.da[i][d] = g;
        }
    }
  }
  return out;
}

// weight matrix that turns a product into the trace we want
template <int K>
MatK<K> closing() {
  if constexpr (K == 2) {
    return MatK<2>::Identity();
  } else {
    MatK<4> j = MatK<4>::Zero();
    j.template bottomLeftCorner<2, 2>() = Eigen::Matrix2d::Identity();
    return j;
  }
}

template <int K>
struct Chains {
  std::vector<MatK<K>> left, right;  // left[k] = A_0..A_{k-1}, right[k] = A_k..A_{N-1}
  std::vector<double> lg_left, lg_right;
};

template <int K>
Chains<K> chains(const std::vector<MatK<K>>& a) {
  const int n = static_cast<int>(a.size());
  Chains<K> c;
  c.left.resize(n + 1);
  c.right.resize(n + 1);
  c.lg_left.assign(n + 1, 0.0);
  c.lg_right.assign(n + 1, 0.0);
  c.left[0].setIdentity();
  for (int k = 1; k <= n; ++k) {
    c.left[k] = c.left[k - 1] * a[k - 1];
    c.lg_left[k] = c.lg_left[k - 1];
    renormalize<K>(c.left[k], c.lg_left[k]);
  }
  c.right[n].setIdentity();
  for (int k = n - 1; k >= 0; --k) {
    c.right[k] = a[k] * c.right[k + 1];
    c.lg_right[k] = c.lg_right[k + 1];
    renormalize<K>(c.right[k], c.lg_right[k]);
  }
  return c;
}

template <int K>
EnergyGradient trace_surface(const BeadPath& path, const RingPolymerGrid& grid,
                             const DiabaticModel& model, bool grad) {
  const double b = grid.beta_n();
  const int n = path.n_beads();
  const Eigen::Index f = path.dimension();
  const BeadBlocks<K> blocks = assemble<K>(path, b, model, grad);
  const MatK<K> j = closing<K>();
  EnergyGradient out;

  if (!grad) {
    MatK<K> p = MatK<K>::Identity();
    double lg = 0.0;
    for (int i = 0; i < n; ++i) {
      p = p * blocks.a[i];
      renormalize<K>(p, lg);
    }
    const double t = (j * p).trace();
    if (!(t > 0.0) || !std::isfinite(t))
      throw DomainError("non-positive argument of the surface logarithm", t);
    out.energy = -(blocks.log_scale + lg + std::log(t)) / b;
    return out;
  }

  const Chains<K> c = chains<K>(blocks.a);
  const double t = (j * c.left[n]).trace();
  if (!(t > 0.0) || !std::isfinite(t))
    throw DomainError("non-positive argument of the surface logarithm", t);
  const double lg_total = c.lg_left[n];
  out.energy = -(blocks.log_scale + lg_total + std::log(t)) / b;
  out.gradient.resize(n, f);
  for (int i = 0; i < n; ++i) {
    const MatK<K> env = c.right[i + 1] * j * c.left[i];
    const double fac = std::exp(c.lg_right[i + 1] + c.lg_left[i] - lg_total) / t;
    for (Eigen::Index d = 0; d < f; ++d)
      out.gradient(i, d) = -fac * blocks.da[i][d].cwiseProduct(env.transpose()).sum() / b;
  }
  return out;
}

EnergyGradient bo_surface(const BeadPath& path, const DiabaticModel& model, bool grad) {
  const int n = path.n_beads();
  const Eigen::Index f = path.dimension();
  if (f != model.dimension()) fail(ErrorKind::invalid_input, "path dimension does not match model");
  EnergyGradient out;
  if (grad) out.gradient.resize(n, f);
  DiabaticValues dv(f);
  Vec g(f);
  for (int i = 0; i < n; ++i) {
    eval_diabatic(model, path.coords().row(i).data(), dv);
    out.energy += lower_adiabat_value(dv);
    if (grad) {
      lower_adiabat_gradient(dv, g);
      out.gradient.row(i) = g.transpose();
    }
  }
  return out;
}

EnergyGradient surface(const BeadPath& path, const RingPolymerGrid& grid,
                       const DiabaticModel& model, SurfaceKind kind, bool grad) {
  if (path.n_beads() != grid.n_beads())
    fail(ErrorKind::invalid_input, "path bead count does not match grid");
  switch (kind) {
    case SurfaceKind::bo: return bo_surface(path, model, grad);
    case SurfaceKind::mf: return trace_surface<2>(path, grid, model, grad);
    case SurfaceKind::nimf: return trace_surface<4>(path, grid, model, grad);
  }
  fail(ErrorKind::invalid_input, "unknown surface kind");
}

}  // namespace

double surface_energy(const BeadPath& path, const RingPolymerGrid& grid, const DiabaticModel& model,
                      SurfaceKind kind) {
  return surface(path, grid, model, kind, false).energy;
}

EnergyGradient surface_energy_gradient(const BeadPath& path, const RingPolymerGrid& grid,
                                       const DiabaticModel& model, SurfaceKind kind) {
  return surface(path, grid, model, kind, true);
}

double surface_energy_nimf_direct(const BeadPath& path, const RingPolymerGrid& grid,
                                  const DiabaticModel& model) {
  const double b = grid.beta_n();
  const int n = path.n_beads();
  const Eigen::Index f = path.dimension();
  DiabaticValues dv(f);
  BeadWeights w;
  Mat2 p = Mat2::Identity(), p0 = Mat2::Identity();
  double lg = 0.0, lg0 = 0.0, scale = 0.0;
  for (int i = 0; i < n; ++i) {
    eval_diabatic(model, path.coords().row(i).data(), dv);
    bead_weights(dv, b, w);
    scale += w.log_scale;
    p = p * w.full;
    p0 = p0 * w.zero_hop;
    renormalize<2>(p, lg);
    renormalize<2>(p0, lg0);
  }
  const double t = p.trace() - p0.trace() * std::exp(lg0 - lg);
  if (!(t > 0.0) || !std::isfinite(t))
    throw DomainError("non-positive argument of the surface logarithm", t);
  return -(scale + lg + std::log(t)) / b;
}

double rp_energy(const BeadPath& path, const RingPolymerGrid& grid, const DiabaticModel& model,
                 SurfaceKind kind) {
  return spring_energy(path, grid, model.masses()).energy + surface_energy(path, grid, model, kind);
}

EnergyGradient rp_energy_gradient(const BeadPath& path, const RingPolymerGrid& grid,
                                  const DiabaticModel& model, SurfaceKind kind) {
  EnergyGradient s = spring_energy(path, grid, model.masses());
  const EnergyGradient v = surface(path, grid, model, kind, true);
  s.energy += v.energy;
  s.gradient += v.gradient;
  return s;
}

RowMat rp_gradient(const BeadPath& path, const RingPolymerGrid& grid, const DiabaticModel& model,
                   SurfaceKind kind) {
  return rp_energy_gradient(path, grid, model, kind).gradient;
}

namespace {
GradientFn flat_fn(const RingPolymerGrid& grid, const DiabaticModel& model, SurfaceKind kind) {
  return [&grid, &model, kind](const Vec& x, Vec& g) {
    const BeadPath p = BeadPath::from_flat(x, grid.n_beads());
    const EnergyGradient eg = rp_energy_gradient(p, grid, model, kind);
    g = Eigen::Map<const Vec>(eg.gradient.data(), eg.gradient.size());
    return eg.energy;
  };
}
}  // namespace

Mat rp_hessian(const BeadPath& path, const RingPolymerGrid& grid, const DiabaticModel& model,
               SurfaceKind kind, double step, int workers) {
  return fd_hessian(flat_fn(grid, model, kind), path.flat(), bead_masses(model, grid.n_beads()),
                    step, workers);
}

namespace {
// H(j) blocks, H(j)_{e,d} = ∂²U/∂x_{j,e}∂x_{0,d}
std::vector<Mat> circulant_blocks(const BeadPath& path, const RingPolymerGrid& grid,
                                  const DiabaticModel& model, SurfaceKind kind, double step) {
  const int n = path.n_beads();
  const Eigen::Index f = path.dimension();
  std::vector<Mat> blocks(n, Mat(f, f));
  for (Eigen::Index d = 0; d < f; ++d) {
    const double h = step / std::sqrt(model.masses()(d));
    BeadPath pp = path, pm = path;
    pp.coords()(0, d) += h;
    pm.coords()(0, d) -= h;
    const RowMat col = (rp_gradient(pp, grid, model, kind) - rp_gradient(pm, grid, model, kind)) /
                       (2.0 * h);
    for (int jb = 0; jb < n; ++jb) blocks[jb].col(d) = col.row(jb).transpose();
  }
  return blocks;
}
}  // namespace

Mat rp_hessian_collapsed(const BeadPath& path, const RingPolymerGrid& grid,
                         const DiabaticModel& model, SurfaceKind kind, double step) {
  const int n = path.n_beads();
  const Eigen::Index f = path.dimension();
  const std::vector<Mat> blocks = circulant_blocks(path, grid, model, kind, step);
  Mat h(n * f, n * f);
  for (int i = 0; i < n; ++i)
    for (int jb = 0; jb < n; ++jb) h.block(i * f, jb * f, f, f) = blocks[((i - jb) % n + n) % n];
  return 0.5 * (h + h.transpose());
}

bool ModeSpectrum::is_zero(Eigen::Index k) const {
  return std::abs(eigenvalues(k)) < zero_tol * eigenvalues.cwiseAbs().maxCoeff();
}

namespace {
void classify(ModeSpectrum& s) {
  const Eigen::Index n = s.eigenvalues.size();
  s.frequencies.resize(n);
  s.n_negative = s.n_zero = s.n_positive = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double l = s.eigenvalues(k);
    s.frequencies(k) = (l < 0.0 ? -1.0 : 1.0) * std::sqrt(std::abs(l));
    if (s.is_zero(k)) ++s.n_zero;
    else if (l < 0.0) ++s.n_negative;
    else ++s.n_positive;
  }
}
}  // namespace

ModeSpectrum mode_spectrum(const Mat& hessian, const Vec& masses_per_dof, double zero_tol,
                           bool keep_vectors) {
  if (hessian.rows() != hessian.cols() || hessian.rows() != masses_per_dof.size())
    fail(ErrorKind::invalid_input, "Hessian and mass vector sizes disagree");
  const Vec is = masses_per_dof.cwiseSqrt().cwiseInverse();
  const Mat hw = is.asDiagonal() * hessian * is.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> es(
      hw, keep_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorKind::numerical, "eigensolver failed");
  ModeSpectrum s;
  s.zero_tol = zero_tol;
  s.eigenvalues = es.eigenvalues();
  if (keep_vectors) s.eigenvectors = es.eigenvectors();
  classify(s);
  return s;
}

ModeSpectrum collapsed_mode_spectrum(const BeadPath& path, const RingPolymerGrid& grid,
                                     const DiabaticModel& model, SurfaceKind kind,
                                     double zero_tol, double step) {
  const int n = path.n_beads();
  const Eigen::Index f = path.dimension();
  const std::vector<Mat> blocks = circulant_blocks(path, grid, model, kind, step);
  const Vec is = model.masses().cwiseSqrt().cwiseInverse();
  Vec all(n * f);
  for (int k = 0; k < n; ++k) {
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(f, f);
    for (int jb = 0; jb < n; ++jb) {
      const double ph = -2.0 * std::numbers::pi * double(jb) * k / n;
      b += (is.asDiagonal() * blocks[jb] * is.asDiagonal()).cast<std::complex<double>>() *
           std::complex<double>(std::cos(ph), std::sin(ph));
    }
    b = 0.5 * (b + b.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(b, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) fail(ErrorKind::numerical, "eigensolver failed");
    all.segment(k * f, f) = es.eigenvalues();
  }
  std::sort(all.data(), all.data() + all.size());
  ModeSpectrum s;
  s.zero_tol = zero_tol;
  s.eigenvalues = all;
  classify(s);
  return s;
}

BeadElectronics bead_electronics(const BeadPath& path, const RingPolymerGrid& grid,
                                 const DiabaticModel& model, SurfaceKind kind) {
  const int n = path.n_beads();
  const Eigen::Index f = path.dimension();
  BeadElectronics out;
  out.gap.resize(n);
  out.weights.resize(n, 2);
  DiabaticValues dv(f);
  for (int i = 0; i < n; ++i) {
    eval_diabatic(model, path.coords().row(i).data(), dv);
    out.gap(i) = dv.v0 - dv.v1;
    const double half = 0.5 * (dv.v0 - dv.v1);
    const double r = std::hypot(half, dv.delta);
    const double p0 = r > 0.0 ? 0.5 * (1.0 - half / r) : 0.5;
    out.weights(i, 0) = p0;
    out.weights(i, 1) = 1.0 - p0;
  }
  if (kind == SurfaceKind::bo) return out;

  auto fill = [&](const auto& c, auto pick) {
    for (int i = 0; i < n; ++i) {
      const Mat2 blk = pick(c.right[i] * c.left[i]);
      const double t = blk.trace();
      out.weights(i, 0) = blk(0, 0) / t;
      out.weights(i, 1) = blk(1, 1) / t;
    }
  };
  const double b = grid.beta_n();
  if (kind == SurfaceKind::mf) {
    const auto c = chains<2>(assemble<2>(path, b, model, false).a);
    fill(c, [](const MatK<2>& m) { return Mat2(m); });
  } else {
    const auto c = chains<4>(assemble<4>(path, b, model, false).a);
    fill(c, [](const MatK<4>& m) { return Mat2(m.topRightCorner<2, 2>()); });
  }
  return out;
}

double collapsed_potential(const Vec& x, double beta, const DiabaticModel& model, SurfaceKind kind,
                           Vec* grad) {
  const RingPolymerGrid g1(beta, 1);
  const BeadPath p = BeadPath::collapsed(x, 1);
  if (!grad) return surface_energy(p, g1, model, kind);
  const EnergyGradient eg = surface_energy_gradient(p, g1, model, kind);
  *grad = eg.gradient.row(0).transpose();
  return eg.energy;
}

}  // namespace nimf
