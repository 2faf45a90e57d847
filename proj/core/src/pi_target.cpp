#include "steinpi/pi_target.hpp"

#include <algorithm>
#include <cmath>

#include "steinpi/error.hpp"

namespace steinpi {

PiTarget::PiTarget(TargetPtr base, KernelPtr kernel)
    : base_(std::move(base)), kernel_(std::move(kernel)) {
  if (!base_ || !kernel_) throw InvalidArgument("pi target: null base or kernel");
  if (base_->dim() != kernel_->dim()) {
    throw DimensionMismatch("pi target: kernel and target dimensions differ");
  }
}

double PiTarget::log_density(const Vector& x) const {
  return base_->log_density(x) + 0.5 * std::log(kernel_->diag_value(x));
}

Vector PiTarget::grad_log_density(const Vector& x) const {
  Vector grad;
  log_density_and_grad(x, grad);
  return grad;
}

double PiTarget::log_density_and_grad(const Vector& x, Vector& grad) const {
  const double log_p = base_->log_density_and_grad(x, grad);
  const KernelDiagonal kd = kernel_->diag(x);
  grad += (0.5 / kd.value) * kd.grad;
  return log_p + 0.5 * std::log(kd.value);
}

double PiTarget::log_density_ratio(const Vector& x) const {
  return -0.5 * std::log(kernel_->diag_value(x));
}

PowerTilt::PowerTilt(TargetPtr base, double r) : base_(std::move(base)), r_(r) {
  if (!base_) throw InvalidArgument("power tilt: null base");
  if (!(r > 0.0)) throw InvalidArgument("power tilt: r must be positive");
  const double d = static_cast<double>(base_->dim());
  exponent_ = d / (d + r);
}

double PowerTilt::log_density(const Vector& x) const {
  return exponent_ * base_->log_density(x);
}

Vector PowerTilt::grad_log_density(const Vector& x) const {
  return exponent_ * base_->grad_log_density(x);
}

double PowerTilt::log_density_and_grad(const Vector& x, Vector& grad) const {
  const double value = base_->log_density_and_grad(x, grad);
  grad *= exponent_;
  return exponent_ * value;
}

Matrix PowerTilt::hessian_log_density(const Vector& x) const {
  return exponent_ * base_->hessian_log_density(x);
}

std::shared_ptr<const PiTarget> make_pi(TargetPtr base, KernelPtr kernel) {
  return std::make_shared<PiTarget>(std::move(base), std::move(kernel));
}

std::shared_ptr<const PowerTilt> make_power_tilt(TargetPtr base, double r) {
  return std::make_shared<PowerTilt>(std::move(base), r);
}

C2Estimate estimate_c2(const TargetModel& target, const Kernel& kernel, std::size_t n,
                       Rng& rng) {
  if (!target.has_exact_sampler()) {
    throw NoExactSampler("estimate_c2: target '" + target.name() + "' has no exact sampler");
  }
  if (n < 2) throw InvalidArgument("estimate_c2: need at least two samples");
  // Welford accumulation of sqrt(k_P(X)).
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::sqrt(kernel.diag_value(target.sample_exact(rng)));
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  const double variance = m2 / static_cast<double>(n - 1);
  return {mean, std::sqrt(variance / static_cast<double>(n)), n};
}

GridSampler::GridSampler(const LogDensity& density, Vector lower, Vector upper,
                         int cells_per_axis)
    : lower_(std::move(lower)), upper_(std::move(upper)), cells_(cells_per_axis) {
  const Eigen::Index d = lower_.size();
  if (d != density.dim() || upper_.size() != d) {
    throw DimensionMismatch("grid sampler: bounds do not match density dimension");
  }
  if (d < 1 || d > 2) throw InvalidArgument("grid sampler: only one or two dimensions");
  if (cells_ < 2) throw InvalidArgument("grid sampler: need at least two cells per axis");
  if (!((upper_ - lower_).minCoeff() > 0.0)) throw InvalidArgument("grid sampler: empty box");

  const std::size_t total = d == 1 ? static_cast<std::size_t>(cells_)
                                   : static_cast<std::size_t>(cells_) * cells_;
  const Vector width = (upper_ - lower_) / cells_;
  std::vector<double> log_mass(total);
  double max_log = -std::numeric_limits<double>::infinity();
  Vector x(d);
  for (std::size_t k = 0; k < total; ++k) {
    const std::size_t i0 = k % static_cast<std::size_t>(cells_);
    x[0] = lower_[0] + (static_cast<double>(i0) + 0.5) * width[0];
    if (d == 2) {
      const std::size_t i1 = k / static_cast<std::size_t>(cells_);
      x[1] = lower_[1] + (static_cast<double>(i1) + 0.5) * width[1];
    }
    const double lp = density.log_density(x);
    log_mass[k] = std::isfinite(lp) ? lp : -std::numeric_limits<double>::infinity();
    max_log = std::max(max_log, log_mass[k]);
  }
  if (!std::isfinite(max_log)) throw InvalidArgument("grid sampler: density vanishes on grid");
  cumulative_.resize(total);
  double acc = 0.0;
  for (std::size_t k = 0; k < total; ++k) {
    acc += std::exp(log_mass[k] - max_log);
    cumulative_[k] = acc;
  }
}

Vector GridSampler::sample(Rng& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                              cumulative_.size() - 1);
  const Vector width = (upper_ - lower_) / cells_;
  Vector x(dim());
  const std::size_t i0 = k % static_cast<std::size_t>(cells_);
  x[0] = lower_[0] + (static_cast<double>(i0) + rng.uniform()) * width[0];
  if (dim() == 2) {
    const std::size_t i1 = k / static_cast<std::size_t>(cells_);
    x[1] = lower_[1] + (static_cast<double>(i1) + rng.uniform()) * width[1];
  }
  return x;
}

Matrix GridSampler::sample(std::size_t n, Rng& rng) const {
  Matrix out(static_cast<Eigen::Index>(n), dim());
  for (std::size_t i = 0; i < n; ++i) out.row(static_cast<Eigen::Index>(i)) = sample(rng).transpose();
  return out;
}

}  // namespace steinpi
