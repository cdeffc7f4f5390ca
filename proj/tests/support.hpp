#pragma once

#include <random>

#include "nimf/rp_potential.hpp"

namespace testing_support {

inline nimf::BeadPath random_path(std::mt19937_64& rng, int n, Eigen::Index f, double centre,
                                  double width) {
  std::uniform_real_distribution<double> u(-width, width);
  nimf::BeadPath p(n, f);
  for (int i = 0; i < n; ++i)
    for (Eigen::Index d = 0; d < f; ++d) p.coords()(i, d) = centre + u(rng);
  return p;
}

// max over entries of |a-b| / max(|b|_inf, floor)
inline double rel_err(const nimf::RowMat& a, const nimf::RowMat& b, double floor = 1e-8) {
  const double s = std::max(b.cwiseAbs().maxCoeff(), floor);
  return (a - b).cwiseAbs().maxCoeff() / s;
}

inline nimf::RowMat fd_gradient(const nimf::BeadPath& p, const nimf::RingPolymerGrid& g,
                                const nimf::DiabaticModel& m, nimf::SurfaceKind k, double h = 1e-5) {
  nimf::RowMat out(p.n_beads(), p.dimension());
  for (int i = 0; i < p.n_beads(); ++i)
    for (Eigen::Index d = 0; d < p.dimension(); ++d) {
      nimf::BeadPath a = p, b = p;
      a.coords()(i, d) += h;
      b.coords()(i, d) -= h;
      nimf::BeadPath a2 = p, b2 = p;
      a2.coords()(i, d) += 2 * h;
      b2.coords()(i, d) -= 2 * h;
      out(i, d) = (8 * (nimf::rp_energy(a, g, m, k) - nimf::rp_energy(b, g, m, k)) -
                   (nimf::rp_energy(a2, g, m, k) - nimf::rp_energy(b2, g, m, k))) /
                  (12 * h);
    }
  return out;
}

}  // namespace testing_support
