#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nimf/models.hpp"

namespace nimf {

using Mat2 = Eigen::Matrix2d;

// exp(-b V) for one bead, stored relative to exp(-b V_BO):
//   full = exp(-b V) e^{b V_BO}, zero_hop = diag part, hop = full - zero_hop
// evaluated without cancellation even when Δ is tiny
struct BeadWeights {
  Mat2 full;
  Mat2 zero_hop;
  Mat2 hop;
  double log_scale = 0.0;  // -b V_BO
};

// derivative of the scaled weights per coordinate (the scale itself is held fixed)
struct BeadWeightDerivs {
  std::vector<Mat2> full;
  std::vector<Mat2> zero_hop;
  std::vector<Mat2> hop;
  void resize(Eigen::Index f) {
    full.resize(f);
    zero_hop.resize(f);
    hop.resize(f);
  }
};

void bead_weights(const DiabaticValues& d, double b, BeadWeights& w, BeadWeightDerivs* dw = nullptr);

namespace detail {
// e^{-y}(y cosh y - sinh y)/y
double scaled_q(double y);
// e^{-y}(sinh y - y)
double scaled_sinh_minus(double y);
// e^{-y}(y cosh y - sinh y)/y^3
double scaled_h(double y);
}  // namespace detail

}  // namespace nimf
