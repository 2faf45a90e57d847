#include <gtest/gtest.h>

#include <cmath>

#include "steinpi/error.hpp"
#include "steinpi/mode.hpp"
#include "steinpi/pi_target.hpp"
#include "steinpi/quantise.hpp"
#include "steinpi/stein_kernel.hpp"
#include "steinpi/targets.hpp"

using namespace steinpi;

namespace {

// k(x, y) = c for all x, y.
class ConstantKernel final : public Kernel {
 public:
  explicit ConstantKernel(double c, Eigen::Index d) : c_(c), d_(d) {}
  Eigen::Index dim() const override { return d_; }
  double eval(const Vector&, const Vector&) const override { return c_; }
  KernelDiagonal diag(const Vector&) const override { return {c_, Vector::Zero(d_)}; }

 private:
  double c_;
  Eigen::Index d_;
};

std::shared_ptr<const SteinKernel> gaussian_langevin() {
  return make_stein_kernel(make_standard_gaussian(1), make_mode_info(Vector::Zero(1), Matrix::Identity(1, 1)),
                           KernelSpec::langevin());
}

}  // namespace

TEST(PiTarget, StandardGaussianLangevin) {
  const auto pi = make_pi(make_standard_gaussian(1), gaussian_langevin());
  const double ref = pi->log_density(Vector::Zero(1));
  for (double x : {-2.0, -0.5, 0.7, 3.0}) {
    const Vector v = Vector::Constant(1, x);
    EXPECT_NEAR(pi->log_density(v) - ref, -x * x / 2 + 0.5 * std::log1p(x * x), 1e-13);
    EXPECT_NEAR(pi->grad_log_density(v)[0], -x + x / (1 + x * x), 1e-14);
  }
}

TEST(PiTarget, HeavierTailsThanP) {
  // Variance of Pi on a fine grid against the quadrature value
  // int x^2 phi(x) sqrt(1+x^2) / int phi(x) sqrt(1+x^2) = 1.417038021241527.
  const auto pi = make_pi(make_standard_gaussian(1), gaussian_langevin());
  double z = 0, m2 = 0;
  const double h = 1e-3;
  for (double x = -12; x <= 12; x += h) {
    const double w = std::exp(pi->log_density(Vector::Constant(1, x)));
    z += w;
    m2 += w * x * x;
  }
  EXPECT_NEAR(m2 / z, 1.417038021241527, 1e-6);
  EXPECT_GT(m2 / z, 1.0);
}

TEST(PiTarget, ConstantKernelLeavesTargetUnchanged) {
  const auto p = make_skew_normal_2d();
  const auto pi = make_pi(p, std::make_shared<ConstantKernel>(4.0, 2));
  const Vector x{{0.4, -0.3}};
  EXPECT_EQ(pi->grad_log_density(x), p->grad_log_density(x));
}

TEST(PiTarget, GradientDecomposition) {
  Rng rng(1);
  const auto p = make_skew_normal_2d();
  const auto k = make_stein_kernel(p, find_mode(*p, Vector::Zero(2)), KernelSpec::kgm(3));
  const auto pi = make_pi(p, k);
  for (int i = 0; i < 50; ++i) {
    const Vector x = rng.normal_vector(2);
    const KernelDiagonal d = k->diag(x);
    const Vector expected = p->grad_log_density(x) + 0.5 * d.grad / d.value;
    EXPECT_LT((pi->grad_log_density(x) - expected).norm(), 1e-12 * std::max(1.0, expected.norm()));
    EXPECT_NEAR(pi->log_density_ratio(x), -0.5 * std::log(d.value), 1e-14);
  }
}

TEST(PiTarget, SnisWeightsAreDensityRatios) {
  Rng rng(2);
  const auto p = make_default_mixture();
  const auto k = make_stein_kernel(p, find_mode(*p, Vector::Zero(1)), KernelSpec::langevin());
  const auto pi = make_pi(p, k);
  Matrix pts(30, 1);
  for (int i = 0; i < 30; ++i) pts(i, 0) = 4 * rng.normal();
  Vector w(30);
  for (int i = 0; i < 30; ++i) w[i] = std::exp(pi->log_density_ratio(pts.row(i).transpose()));
  w /= w.sum();
  const WeightedSample s = snis_weights(pts, *k);
  EXPECT_LT(((s.weights - w).array() / w.array()).abs().maxCoeff(), 1e-12);
}

TEST(PowerTilt, Exponents) {
  const auto p = make_standard_gaussian(1);
  const auto tilt = make_power_tilt(p, 1.0);
  const Vector x = Vector::Ones(1);
  EXPECT_EQ(tilt->grad_log_density(x)[0], 0.5 * p->grad_log_density(x)[0]);
  EXPECT_DOUBLE_EQ(tilt->grad_log_density(x)[0], -0.5);

  const auto flat = make_power_tilt(make_standard_gaussian(2), 1e8);
  EXPECT_LT(flat->exponent(), 1e-7);
  EXPECT_THROW(make_power_tilt(p, 0.0), InvalidArgument);
}

TEST(EstimateC2, StandardGaussianLangevin) {
  // Quadrature: E sqrt(1 + X^2) = 1.354530806481315.
  Rng rng(3);
  const C2Estimate e = estimate_c2(*make_standard_gaussian(1), *gaussian_langevin(), 200000, rng);
  EXPECT_NEAR(e.value, 1.354530806481315, 3 * e.standard_error);
}

TEST(EstimateC2, ConstantKernel) {
  Rng rng(4);
  const C2Estimate e = estimate_c2(*make_standard_gaussian(1), ConstantKernel(4.0, 1), 100, rng);
  EXPECT_EQ(e.value, 2.0);
}

TEST(EstimateC2, MixtureStableAcrossSeeds) {
  const auto p = make_default_mixture();
  const auto k = make_stein_kernel(p, find_mode(*p, Vector::Zero(1)), KernelSpec::langevin());
  Rng a(5), b(6);
  const C2Estimate ea = estimate_c2(*p, *k, 1000000, a);
  const C2Estimate eb = estimate_c2(*p, *k, 1000000, b);
  EXPECT_LT(std::abs(ea.value - eb.value), 4 * std::hypot(ea.standard_error, eb.standard_error));
}

TEST(EstimateC2, NeedsExactSampler) {
  Rng rng(7);
  const auto p = make_garch_posterior(Vector::Zero(20));
  const auto k = make_stein_kernel(p, make_mode_info(Vector::Zero(4), Matrix::Identity(4, 4)),
                                   KernelSpec::langevin());
  EXPECT_THROW(estimate_c2(*p, *k, 10, rng), NoExactSampler);
}

TEST(GridSampler, MatchesStandardGaussianMoments) {
  Rng rng(8);
  const Matrix x = GridSampler(*make_standard_gaussian(1), Vector::Constant(1, -10), Vector::Constant(1, 10), 20000)
                       .sample(100000, rng);
  EXPECT_NEAR(x.mean(), 0.0, 0.015);
  EXPECT_NEAR(x.squaredNorm() / 100000, 1.0, 0.02);
}
