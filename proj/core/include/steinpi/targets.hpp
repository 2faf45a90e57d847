#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "steinpi/random.hpp"

namespace steinpi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Unnormalised log-density with gradient. This is all MALA needs, so the
// tilted sampling targets implement only this much.
class LogDensity {
 public:
  virtual ~LogDensity() = default;

  virtual Eigen::Index dim() const = 0;
  virtual double log_density(const Vector& x) const = 0;
  virtual Vector grad_log_density(const Vector& x) const = 0;

  // Value and gradient in one pass. Overridden where the two share work.
  virtual double log_density_and_grad(const Vector& x, Vector& grad) const {
    grad = grad_log_density(x);
    return log_density(x);
  }
};

// A differentiable target P. Evaluation is pure, so a single instance may be
// shared between threads.
class TargetModel : public LogDensity {
 public:
  virtual Matrix hessian_log_density(const Vector& x) const = 0;
  virtual std::string name() const = 0;

  virtual bool has_exact_sampler() const { return false; }
  // Throws NoExactSampler unless has_exact_sampler().
  virtual Vector sample_exact(Rng& rng) const;
};

using TargetPtr = std::shared_ptr<const TargetModel>;

TargetPtr make_gaussian(Vector mean, Matrix covariance);
TargetPtr make_standard_gaussian(Eigen::Index dim);

// Isotropic Gaussian mixture: component k is N(means[k], scales[k]^2 I).
// Components are stored in a canonical order so that the result does not
// depend on the order in which they were supplied.
TargetPtr make_gaussian_mixture(std::vector<double> weights,
                                std::vector<Vector> means,
                                std::vector<double> scales);

// The trimodal 1D mixture used by the illustration experiments:
// weights (0.3, 0.4, 0.3), means (-3, 0, 3), scales (0.8, 1.0, 0.8).
TargetPtr make_default_mixture();

// Posterior of y_i = x_1 (1 + t_i x_2) + N(0, 1) noise under a N(0, I) prior.
TargetPtr make_regression_posterior(Vector t, Vector y);

struct RegressionData {
  Vector t;
  Vector y;
};

inline constexpr std::uint64_t kRegressionDataSeed = 20230601;

// t_i = i - 5 for i = 1..10 and y simulated at x = (0, 0), i.e. y_i are
// standard normal draws from Rng(seed).
RegressionData simulate_regression_data(std::uint64_t seed = kRegressionDataSeed);

// p(x) = 4 phi(x1) Phi(6 x1) phi(x2) Phi(-3 x2).
TargetPtr make_skew_normal_2d();

// GARCH(1,1) posterior in the unconstrained parameterisation
//   phi1 = theta1, phi2 = exp(theta2),
//   phi3 = logistic(theta3), phi4 = (1 - phi3) logistic(theta4),
// with a flat prior on theta, sigma_0^2 set to the sample variance of y
// (divisor n - 1) and a_0 = 0.
TargetPtr make_garch_posterior(Vector y);

struct GarchParameters {
  double mean;      // phi1
  double omega;     // phi2 > 0
  double alpha;     // phi3 > 0
  double beta;      // phi4 > 0, alpha + beta < 1
};

GarchParameters garch_from_unconstrained(const Vector& theta);
Vector garch_to_unconstrained(const GarchParameters& phi);
double garch_log_jacobian(const Vector& theta);
Vector simulate_garch(const GarchParameters& phi, int length, std::uint64_t seed);

namespace normal {

double log_pdf(double z);
// log Phi(z), accurate in both tails (finite down to z of order -1e150).
double log_cdf(double z);
// phi(z) / Phi(z).
double inverse_mills(double z);

}  // namespace normal

}  // namespace steinpi
