#include <gtest/gtest.h>

#include "steinpi/error.hpp"
#include "steinpi/mode.hpp"
#include "steinpi/targets.hpp"

using namespace steinpi;

namespace {

// p(x) ∝ exp(-x^4): the mode has zero curvature.
class Quartic final : public TargetModel {
 public:
  Eigen::Index dim() const override { return 1; }
  std::string name() const override { return "quartic"; }
  double log_density(const Vector& x) const override { return -std::pow(x[0], 4); }
  Vector grad_log_density(const Vector& x) const override { return Vector::Constant(1, -4 * std::pow(x[0], 3)); }
  Matrix hessian_log_density(const Vector& x) const override { return Matrix::Constant(1, 1, -12 * x[0] * x[0]); }
};

}  // namespace

TEST(FindMode, StandardGaussian) {
  Vector init(2);
  init << 3.0, -1.0;
  const ModeInfo m = find_mode(*make_standard_gaussian(2), init);
  EXPECT_LT(m.x_star.norm(), 1e-12);
  EXPECT_LT((m.sigma - Matrix::Identity(2, 2)).norm(), 1e-12);
}

TEST(FindMode, CholeskyFactorInvariant) {
  const RegressionData data = simulate_regression_data();
  const auto t = make_regression_posterior(data.t, data.y);
  const ModeInfo m = find_mode(*t, Vector::Zero(2));
  EXPECT_LT((m.chol_sigma_inv * m.chol_sigma_inv.transpose() - m.sigma_inv).norm() / m.sigma_inv.norm(), 1e-10);
  EXPECT_LT((m.sigma_inv + t->hessian_log_density(m.x_star)).norm(), 1e-10 * m.sigma_inv.norm());
  EXPECT_LT(t->grad_log_density(m.x_star).norm(), 1e-8);
}

TEST(FindMode, InvariantToInitialisation) {
  const auto t = make_skew_normal_2d();
  Vector a(2), b(2);
  a << 0.1, -0.1;
  b << 1.5, -1.2;
  EXPECT_LT((find_mode(*t, a).x_star - find_mode(*t, b).x_star).norm(), 1e-7);
}

TEST(FindMode, DegenerateCurvature) {
  // Newton steps shrink geometrically towards 0 where the curvature vanishes.
  EXPECT_THROW(find_mode(Quartic(), Vector::Constant(1, 1.0), 200, 1e-8), NotPositiveDefinite);
}

TEST(FindMode, NonConvergence) {
  EXPECT_THROW(find_mode(*make_regression_posterior(Vector::LinSpaced(10, -4, 5), Vector::LinSpaced(10, 1, 3)),
                         Vector::Constant(2, 3.0), 1),
               NonConvergence);
}

TEST(FindMode, MakeModeInfo) {
  Matrix s(2, 2);
  s << 4.0, 1.0, 1.0, 3.0;
  const ModeInfo m = make_mode_info(Vector::Zero(2), s);
  EXPECT_LT((m.sigma * s - Matrix::Identity(2, 2)).norm(), 1e-14);
  EXPECT_THROW(make_mode_info(Vector::Zero(2), -s), NotPositiveDefinite);
}
