#pragma once

#include <Eigen/Dense>
#include <string>

#include "nimf/models.hpp"

namespace nimf {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class SurfaceKind { bo, mf, nimf };

std::string to_string(SurfaceKind k);
SurfaceKind parse_surface_kind(const std::string& s);

class RingPolymerGrid {
 public:
  RingPolymerGrid(double beta, int n_beads, double hbar = 1.0);
  double beta() const { return beta_; }
  int n_beads() const { return n_; }
  double beta_n() const { return beta_ / n_; }
  double hbar() const { return hbar_; }
  // smallest N with β/N <= beta_n_max (at least n_min)
  static int beads_for(double beta, double beta_n_max, int n_min = 1);

 private:
  double beta_;
  int n_;
  double hbar_;
};

// N×f bead coordinates, cyclic (bead N wraps to bead 0)
class BeadPath {
 public:
  BeadPath() = default;
  BeadPath(int n_beads, Eigen::Index dim);
  explicit BeadPath(RowMat coords);
  static BeadPath collapsed(const Vec& point, int n_beads);
  static BeadPath from_flat(const Vec& flat, int n_beads);

  int n_beads() const { return static_cast<int>(x_.rows()); }
  Eigen::Index dimension() const { return x_.cols(); }
  const RowMat& coords() const { return x_; }
  RowMat& coords() { return x_; }
  Vec flat() const;
  Vec centroid() const;
  // largest distance of a bead from the centroid, mass-weighted
  double spread(const Vec& masses) const;
  BeadPath shifted(int k) const;
  BeadPath reversed() const;
  // cyclic linear interpolation to a different bead count
  BeadPath resampled(int n_beads) const;

 private:
  RowMat x_;
};

struct EnergyGradient {
  double energy = 0.0;
  RowMat gradient;
};

EnergyGradient spring_energy(const BeadPath& path, const RingPolymerGrid& grid, const Vec& masses);

double surface_energy(const BeadPath& path, const RingPolymerGrid& grid, const DiabaticModel& model,
                      SurfaceKind kind);
EnergyGradient surface_energy_gradient(const BeadPath& path, const RingPolymerGrid& grid,
                                       const DiabaticModel& model, SurfaceKind kind);
// zero-hop-corrected surface by direct subtraction Tr∏M − Tr∏M⁰ (loses precision when Δ is small)
double surface_energy_nimf_direct(const BeadPath& path, const RingPolymerGrid& grid,
                                  const DiabaticModel& model);

// springs + surface
double rp_energy(const BeadPath& path, const RingPolymerGrid& grid, const DiabaticModel& model,
                 SurfaceKind kind);
EnergyGradient rp_energy_gradient(const BeadPath& path, const RingPolymerGrid& grid,
                                  const DiabaticModel& model, SurfaceKind kind);
RowMat rp_gradient(const BeadPath& path, const RingPolymerGrid& grid, const DiabaticModel& model,
                   SurfaceKind kind);
// central differences of the analytic gradient; rows/cols ordered bead-major (i*f + d)
Mat rp_hessian(const BeadPath& path, const RingPolymerGrid& grid, const DiabaticModel& model,
               SurfaceKind kind, double step = 1e-5, int workers = 1);
// exact Hessian structure of a collapsed path: only the f columns of bead 0 are differenced
Mat rp_hessian_collapsed(const BeadPath& path, const RingPolymerGrid& grid,
                         const DiabaticModel& model, SurfaceKind kind, double step = 1e-5);

Vec bead_masses(const DiabaticModel& model, int n_beads);

struct ModeSpectrum {
  Vec eigenvalues;   // ascending, mass-weighted (1/time²)
  Vec frequencies;   // sign(λ)·sqrt|λ|
  Mat eigenvectors;  // columns, mass-weighted coordinates; empty unless requested
  int n_negative = 0;
  int n_zero = 0;
  int n_positive = 0;
  double zero_tol = 1e-8;
  bool is_zero(Eigen::Index k) const;
};

ModeSpectrum mode_spectrum(const Mat& hessian, const Vec& masses_per_dof, double zero_tol = 1e-8,
                           bool keep_vectors = false);
// spectrum of a collapsed path from its block-circulant structure, O(N f³)
ModeSpectrum collapsed_mode_spectrum(const BeadPath& path, const RingPolymerGrid& grid,
                                     const DiabaticModel& model, SurfaceKind kind,
                                     double zero_tol = 1e-8, double step = 1e-5);

// per-bead diabatic gap V0 − V1 and electronic populations (N×2)
struct BeadElectronics {
  Vec gap;
  RowMat weights;
};
BeadElectronics bead_electronics(const BeadPath& path, const RingPolymerGrid& grid,
                                 const DiabaticModel& model, SurfaceKind kind);

// effective potential of the collapsed polymer, U_RP(x,…,x)/N; N-independent
double collapsed_potential(const Vec& x, double beta, const DiabaticModel& model, SurfaceKind kind,
                           Vec* grad = nullptr);

}  // namespace nimf
