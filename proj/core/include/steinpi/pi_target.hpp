#pragma once

#include <memory>

#include "steinpi/stein_kernel.hpp"
#include "steinpi/targets.hpp"

namespace steinpi {

// The sampling target pi(x) ∝ p(x) sqrt(k_P(x)). Its normalising constant
// is C2 = ∫ sqrt(k_P) dP, which MALA never needs.
class PiTarget final : public LogDensity {
 public:
  PiTarget(TargetPtr base, KernelPtr kernel);

  Eigen::Index dim() const override { return base_->dim(); }
  double log_density(const Vector& x) const override;
  Vector grad_log_density(const Vector& x) const override;
  double log_density_and_grad(const Vector& x, Vector& grad) const override;

  // log dP/dPi(x) up to an additive constant, i.e. -1/2 log k_P(x).
  double log_density_ratio(const Vector& x) const;

  const TargetModel& base() const { return *base_; }
  const Kernel& kernel() const { return *kernel_; }

 private:
  TargetPtr base_;
  KernelPtr kernel_;
};

// pi_r(x) ∝ p(x)^(d / (d + r)), optimal for r-Wasserstein quantisation.
// No integrability check: for heavy-tailed p the tilt may be improper.
class PowerTilt final : public TargetModel {
 public:
  PowerTilt(TargetPtr base, double r);

  Eigen::Index dim() const override { return base_->dim(); }
  std::string name() const override { return "power_tilt"; }
  double log_density(const Vector& x) const override;
  Vector grad_log_density(const Vector& x) const override;
  double log_density_and_grad(const Vector& x, Vector& grad) const override;
  Matrix hessian_log_density(const Vector& x) const override;

  double exponent() const { return exponent_; }
  double r() const { return r_; }

 private:
  TargetPtr base_;
  double r_;
  double exponent_;
};

std::shared_ptr<const PiTarget> make_pi(TargetPtr base, KernelPtr kernel);
std::shared_ptr<const PowerTilt> make_power_tilt(TargetPtr base, double r);

struct C2Estimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

// Monte Carlo estimate of C2 = E_P[sqrt(k_P(X))] from exact draws of P.
// Throws NoExactSampler when the target has none.
C2Estimate estimate_c2(const TargetModel& target, const Kernel& kernel, std::size_t n, Rng& rng);

// Exact-up-to-discretisation sampler for a density in one or two dimensions:
// the density is tabulated at cell midpoints of a regular grid, a cell is
// drawn by inverse CDF and the point is uniform within it.
class GridSampler {
 public:
  GridSampler(const LogDensity& density, Vector lower, Vector upper, int cells_per_axis);

  Vector sample(Rng& rng) const;
  Matrix sample(std::size_t n, Rng& rng) const;

  Eigen::Index dim() const { return lower_.size(); }

 private:
  Vector lower_;
  Vector upper_;
  int cells_;
  std::vector<double> cumulative_;
};

}  // namespace steinpi
