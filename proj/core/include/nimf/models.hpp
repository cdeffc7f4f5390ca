#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "nimf/optimize.hpp"

namespace nimf {

struct DiabaticValues {
  double v0 = 0.0;
  double v1 = 0.0;
  double delta = 0.0;
  Vec grad_v0;
  Vec grad_v1;
  Vec grad_delta;

  explicit DiabaticValues(Eigen::Index f = 0)
      : grad_v0(Vec::Zero(f)), grad_v1(Vec::Zero(f)), grad_delta(Vec::Zero(f)) {}
};

class DiabaticModel {
 public:
  virtual ~DiabaticModel() = default;

  Eigen::Index dimension() const { return masses_.size(); }
  const Vec& masses() const { return masses_; }
  // +1 or -1; 0 only for a model with Δ identically zero
  int coupling_sign() const { return coupling_sign_; }

  virtual std::string name() const = 0;
  virtual std::map<std::string, double> parameters() const = 0;

  // unchecked; out must be sized to dimension()
  virtual void evaluate(const double* x, DiabaticValues& out) const = 0;

  virtual bool bound_reactant() const = 0;
  // a point in the reactant well (bound models) and a starting point for the barrier search
  virtual Vec reactant_guess() const;
  virtual Vec barrier_guess() const;
  // 1D models: interval known to contain the barrier of the lower adiabat
  virtual std::pair<double, double> barrier_bracket() const;
  // scattering models: side (-1 left, +1 right) from which reactants approach
  virtual int reactant_side() const { return -1; }

  // copy with a different constant coupling
  virtual std::unique_ptr<DiabaticModel> with_delta(double delta) const = 0;

 protected:
  DiabaticModel(Vec masses, int coupling_sign);
  Vec masses_;
  int coupling_sign_ = 1;
};

// V0 = V‡ + κ0 x, V1 = V‡ + κ1 x, constant Δ
class LinearCrossingModel final : public DiabaticModel {
 public:
  LinearCrossingModel(double kappa0, double kappa1, double delta, double v_cross = 0.0,
                      double mass = 1.0);
  LinearCrossingModel(double kappa0, double kappa1, double delta, double v_cross, double mass,
                      int reactant_side);

  std::string name() const override { return "linear_crossing"; }
  std::map<std::string, double> parameters() const override;
  void evaluate(const double* x, DiabaticValues& out) const override;
  bool bound_reactant() const override { return false; }
  Vec barrier_guess() const override;
  std::pair<double, double> barrier_bracket() const override;
  int reactant_side() const override { return side_; }
  std::unique_ptr<DiabaticModel> with_delta(double delta) const override;

  double kappa0() const { return kappa0_; }
  double kappa1() const { return kappa1_; }
  double delta() const { return delta_; }
  double v_cross() const { return v_cross_; }
  double mass() const { return masses_(0); }

 private:
  double kappa0_, kappa1_, delta_, v_cross_;
  int side_;
};

// V0 = V1 = offset + ½ k x², constant Δ. k > 0 is a bound well, k < 0 a parabolic barrier.
class ParabolicModel final : public DiabaticModel {
 public:
  ParabolicModel(double curvature, double offset, double delta, double mass = 1.0);

  std::string name() const override { return "parabolic"; }
  std::map<std::string, double> parameters() const override;
  void evaluate(const double* x, DiabaticValues& out) const override;
  bool bound_reactant() const override { return curvature_ > 0.0; }
  Vec reactant_guess() const override { return Vec::Zero(1); }
  std::pair<double, double> barrier_bracket() const override { return {-1.0, 1.0}; }
  std::unique_ptr<DiabaticModel> with_delta(double delta) const override;

  double curvature() const { return curvature_; }
  double offset() const { return offset_; }
  double delta() const { return delta_; }

 private:
  double curvature_, offset_, delta_;
};

struct BathSpec {
  double reorganisation = 60.0;  // Λ
  double omega = 4.0;            // Ω
  double gamma = 4.0;            // γ
  int bath_size = 13;            // f - 1
  double omega_max = 0.0;        // 0 selects 10·max(Ω, γ)

  int dimension() const { return bath_size + 1; }
  double cutoff() const;
  void validate() const;
};

// Two harmonic wells mirrored about Q = 0, linearly coupled to a harmonic bath.
// Coordinates (Q, q_1..q_{f-1}), mass-weighted (all masses 1).
class SystemBathModel final : public DiabaticModel {
 public:
  SystemBathModel(BathSpec spec, Vec couplings, Vec frequencies, double delta);

  std::string name() const override { return "spin_boson"; }
  std::map<std::string, double> parameters() const override;
  void evaluate(const double* x, DiabaticValues& out) const override;
  bool bound_reactant() const override { return true; }
  Vec reactant_guess() const override;
  Vec barrier_guess() const override { return Vec::Zero(dimension()); }
  std::unique_ptr<DiabaticModel> with_delta(double delta) const override;

  const BathSpec& spec() const { return spec_; }
  const Vec& couplings() const { return c_; }
  const Vec& frequencies() const { return w_; }
  double displacement() const { return q0_; }  // reactant well at Q = -displacement
  double delta() const { return delta_; }
  // Σ_j c_j² cos(ω_j t)
  double friction_kernel(double t) const;

 private:
  BathSpec spec_;
  Vec c_, w_;
  double delta_, q0_;
};

SystemBathModel discretize_bath(const BathSpec& spec, double delta);

// continuum Ohmic counterpart of SystemBathModel::friction_kernel
double ohmic_kernel(double gamma, double omega_max, double t);

// Checked evaluation: length, finiteness and sign of Δ.
DiabaticValues eval_diabatic(const DiabaticModel& model, std::span<const double> x);
void eval_diabatic(const DiabaticModel& model, const double* x, DiabaticValues& out);

struct AdiabatValue {
  double value = 0.0;
  Vec gradient;
};

AdiabatValue lower_adiabat(const DiabaticModel& model, std::span<const double> x);
// V_BO from already evaluated diabatic values
double lower_adiabat_value(const DiabaticValues& d);
void lower_adiabat_gradient(const DiabaticValues& d, Eigen::Ref<Vec> grad);
Mat lower_adiabat_hessian(const DiabaticModel& model, const Vec& x, double step = 1e-5);

struct AdiabatInfo {
  Vec x_barrier;
  double v_barrier = 0.0;
  double omega_b = 0.0;
  bool has_reactant = false;
  Vec x_reactant;
  double v_reactant = 0.0;
  Vec omega_reactant;   // ascending
  Vec omega_barrier;    // real frequencies of the stable barrier modes, ascending
};

AdiabatInfo barrier_top(const DiabaticModel& model,
                        std::optional<std::pair<double, double>> bracket = std::nullopt,
                        const OptimizerSettings& settings = {});

// sorted mass-weighted eigenvalues of a natural-units Hessian
Vec mass_weighted_eigenvalues(const Mat& hessian, const Vec& masses);

}  // namespace nimf
