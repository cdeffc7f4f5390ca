#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace nimf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct OptimizerSettings {
  double g_tol = 1e-9;         // max-norm of the gradient, natural units
  int max_iter = 200;
  double trust_radius = 0.3;   // mass-weighted step length
  double collapse_tol = 1e-4;  // fraction of the thermal length
  double zero_tol = 1e-8;      // relative to max |eigenvalue|
  double fd_step = 1e-5;       // Hessian step, mass-weighted units
  int hessian_refresh = 1;     // exact Hessian every k iterations, Bofill updates between
  int workers = 1;
};

// energy and gradient at x
using GradientFn = std::function<double(const Vec& x, Vec& grad)>;
using HessianFn = std::function<Mat(const Vec& x)>;

struct OptimizeResult {
  Vec x;
  double energy = 0.0;
  Vec gradient;
  Mat hessian;  // natural units, last exact evaluation at x
  int iterations = 0;
  bool converged = false;
  double grad_norm = 0.0;
  std::string message;
};

// Central differences of an analytic gradient, symmetrized. step is in
// mass-weighted units so coordinate d moves by step/sqrt(m_d).
Mat fd_hessian(const GradientFn& fn, const Vec& x, const Vec& masses, double step, int workers);

// Eigenvector following (P-RFO). n_uphill = 0 for minima, 1 for first-order saddles.
OptimizeResult eigenvector_follow(const GradientFn& fn, const HessianFn& hess, const Vec& x0,
                                  const Vec& masses, int n_uphill, const OptimizerSettings& s);

}  // namespace nimf
