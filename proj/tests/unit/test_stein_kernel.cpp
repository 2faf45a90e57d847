#include <gtest/gtest.h>

#include <cmath>

#include "steinpi/mode.hpp"
#include "steinpi/stein_kernel.hpp"
#include "steinpi/targets.hpp"

using namespace steinpi;

namespace {

std::shared_ptr<const SteinKernel> gaussian_kernel(Eigen::Index d, KernelSpec spec) {
  return make_stein_kernel(make_standard_gaussian(d), make_mode_info(Vector::Zero(d), Matrix::Identity(d, d)), spec);
}

std::shared_ptr<const SteinKernel> regression_kernel(KernelSpec spec) {
  const RegressionData data = simulate_regression_data();
  const auto t = make_regression_posterior(data.t, data.y);
  return make_stein_kernel(t, find_mode(*t, Vector::Zero(2)), spec);
}

class QuarticTarget final : public TargetModel {
 public:
  Eigen::Index dim() const override { return 1; }
  std::string name() const override { return "quartic"; }
  double log_density(const Vector& x) const override { return -std::pow(x[0], 4); }
  Vector grad_log_density(const Vector& x) const override { return Vector::Constant(1, -4 * std::pow(x[0], 3)); }
  Matrix hessian_log_density(const Vector& x) const override { return Matrix::Constant(1, 1, -12 * x[0] * x[0]); }
};

std::vector<KernelSpec> all_specs() {
  return {KernelSpec::langevin(), KernelSpec::kgm(1), KernelSpec::kgm(2), KernelSpec::kgm(3), KernelSpec::kgm(4)};
}

}  // namespace

TEST(BaseKappa, LangevinOnDiagonal) {
  const auto k = regression_kernel(KernelSpec::langevin());
  const Vector x = Vector{{0.3, -0.2}};
  const BaseKernelValue v = k->base_kappa(x, x);
  EXPECT_EQ(v.value, 1.0);
  EXPECT_EQ(v.grad_x.norm(), 0.0);
  EXPECT_NEAR(v.div_xy, 2 * 0.5 * k->mode().sigma_inv.trace(), 1e-12);
}

TEST(BaseKappa, KgmAtMode) {
  const auto k = regression_kernel(KernelSpec::kgm(3));
  const Vector x = k->mode().x_star;
  EXPECT_DOUBLE_EQ(k->base_kappa(x, x).value, 2.0);
}

TEST(BaseKappa, DerivativesMatchFiniteDifferences) {
  Rng rng(1);
  for (const KernelSpec& spec : all_specs()) {
    const auto k = regression_kernel(spec);
    for (int i = 0; i < 20; ++i) {
      const Vector x = k->mode().x_star + 0.7 * rng.normal_vector(2);
      const Vector y = k->mode().x_star + 0.7 * rng.normal_vector(2);
      const BaseKernelValue v = k->base_kappa(x, y);
      const double h = 1e-5;
      Vector gx(2), gy(2);
      double div = 0.0;
      for (int j = 0; j < 2; ++j) {
        Vector e = Vector::Zero(2);
        e[j] = h;
        gx[j] = (k->base_kappa(x + e, y).value - k->base_kappa(x - e, y).value) / (2 * h);
        gy[j] = (k->base_kappa(x, y + e).value - k->base_kappa(x, y - e).value) / (2 * h);
        div += (k->base_kappa(x, y + e).grad_x[j] - k->base_kappa(x, y - e).grad_x[j]) / (2 * h);
      }
      EXPECT_LT((v.grad_x - gx).norm() / std::max(1.0, gx.norm()), 1e-6) << to_string(spec);
      EXPECT_LT((v.grad_y - gy).norm() / std::max(1.0, gy.norm()), 1e-6) << to_string(spec);
      EXPECT_LT(std::abs(v.div_xy - div) / std::max(1.0, std::abs(div)), 1e-6) << to_string(spec);
    }
  }
}

TEST(SteinKernel, StandardGaussianLangevinValues) {
  const auto k = gaussian_kernel(1, KernelSpec::langevin());
  EXPECT_DOUBLE_EQ(k->eval(Vector::Zero(1), Vector::Zero(1)), 1.0);
  const KernelDiagonal d = k->diag(Vector::Ones(1));
  EXPECT_DOUBLE_EQ(d.value, 2.0);
  EXPECT_DOUBLE_EQ(d.grad[0], 2.0);
}

TEST(SteinKernel, KgmAtModeOfStandardGaussian) {
  for (Eigen::Index d : {1, 2, 5}) {
    const auto k = gaussian_kernel(d, KernelSpec::kgm(3));
    EXPECT_NEAR(k->diag_value(Vector::Zero(d)), 2.0 * static_cast<double>(d), 1e-12);
    EXPECT_NEAR(k->eval(Vector::Zero(d), Vector::Zero(d)), 2.0 * static_cast<double>(d), 1e-12);
  }
}

TEST(SteinKernel, BitwiseSymmetric) {
  Rng rng(2);
  for (const KernelSpec& spec : all_specs()) {
    const auto k = regression_kernel(spec);
    for (int i = 0; i < 50; ++i) {
      const Vector x = rng.normal_vector(2), y = rng.normal_vector(2);
      ASSERT_EQ(k->eval(x, y), k->eval(y, x));
    }
  }
}

TEST(SteinKernel, DiagonalMatchesEval) {
  Rng rng(3);
  for (const KernelSpec& spec : all_specs()) {
    const auto k = regression_kernel(spec);
    for (int i = 0; i < 100; ++i) {
      const Vector x = k->mode().x_star + rng.normal_vector(2);
      const double a = k->diag(x).value;
      ASSERT_NEAR(a, k->eval(x, x), 1e-10 * std::abs(a));
      ASSERT_EQ(a, k->diag_value(x));
    }
  }
}

TEST(SteinKernel, LangevinClosedForm) {
  Rng rng(4);
  const auto k = regression_kernel(KernelSpec::langevin());
  const double c = 2 * 0.5 * k->mode().sigma_inv.trace();
  for (int i = 0; i < 100; ++i) {
    const Vector x = rng.normal_vector(2);
    const double expected = c + k->target().grad_log_density(x).squaredNorm();
    EXPECT_NEAR(k->diag_value(x), expected, 1e-12 * expected);
  }
  EXPECT_DOUBLE_EQ(*k->analytic_diagonal_lower_bound(), c);
  EXPECT_FALSE(regression_kernel(KernelSpec::kgm(3))->analytic_diagonal_lower_bound());
}

TEST(SteinKernel, DiagonalGradientMatchesFiniteDifferences) {
  Rng rng(5);
  for (const KernelSpec& spec : all_specs()) {
    const auto k = regression_kernel(spec);
    for (int i = 0; i < 100; ++i) {
      const Vector x = k->mode().x_star + rng.normal_vector(2);
      const KernelDiagonal d = k->diag(x);
      Vector fd(2);
      for (int j = 0; j < 2; ++j) {
        Vector e = Vector::Zero(2);
        e[j] = 1e-5;
        fd[j] = (k->diag_value(x + e) - k->diag_value(x - e)) / 2e-5;
      }
      ASSERT_LT((d.grad - fd).norm() / std::max(1.0, fd.norm()), 1e-6) << to_string(spec);
    }
  }
}

TEST(SteinKernel, GramIsPositiveSemidefinite) {
  Rng rng(6);
  for (int set = 0; set < 30; ++set) {
    const auto k = regression_kernel(set % 2 ? KernelSpec::kgm(3) : KernelSpec::langevin());
    Matrix pts(20, 2);
    for (int i = 0; i < 20; ++i) pts.row(i) = (k->mode().x_star + rng.normal_vector(2)).transpose();
    const Matrix g = k->gram(pts);
    ASSERT_EQ(g, g.transpose());
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(g).eigenvalues();
    EXPECT_GE(ev.minCoeff(), -1e-8 * ev.maxCoeff());
  }
}

TEST(SteinKernel, KgmGrowthRate) {
  for (int s : {1, 2, 3}) {
    const auto k = gaussian_kernel(1, KernelSpec::kgm(s));
    std::vector<double> ratios;
    for (double t : {1e2, 1e3, 1e4}) ratios.push_back(k->diag_value(Vector::Constant(1, t)) / std::pow(t, 2 * s));
    // For N(0,1) the diagonal grows like x^(2s).
    EXPECT_NEAR(ratios[2] / ratios[1], 1.0, 0.05);
    EXPECT_NEAR(ratios[1] / ratios[0], 1.0, 0.05);
  }
}

TEST(SteinKernel, BoundKernelIsBitwiseEqual) {
  Rng rng(7);
  for (const KernelSpec& spec : all_specs()) {
    const auto k = regression_kernel(spec);
    Matrix pts(15, 2);
    for (int i = 0; i < 15; ++i) pts.row(i) = rng.normal_vector(2).transpose();
    const auto bound = k->bind(pts);
    const Matrix g = k->gram(pts);
    for (int i = 0; i < 15; ++i) {
      ASSERT_EQ(bound->diag_value(i), k->diag_value(pts.row(i).transpose()));
      for (int j = 0; j < 15; ++j) {
        ASSERT_EQ(bound->eval(i, j), k->eval(pts.row(i).transpose(), pts.row(j).transpose()));
        ASSERT_EQ(bound->eval(i, j), g(i, j));
      }
      ASSERT_EQ(bound->column(i), g.col(i));
    }
    const Vector y = pts.row(3).transpose();
    EXPECT_EQ(k->cross(pts, y), g.col(3));
  }
}

TEST(Assumptions, GaussianLangevin) {
  const AssumptionReport r = check_consistency_assumptions(*gaussian_kernel(2, KernelSpec::langevin()), {});
  EXPECT_TRUE(r.within_scope);
  EXPECT_NEAR(r.b1, 1.0, 1e-9);
  EXPECT_NEAR(r.b2, 2.0, 1e-3);
  EXPECT_NEAR(r.c1_squared, 2.0, 1e-12);
  EXPECT_FALSE(r.inequality.empty());
}

TEST(Assumptions, HigherOrderKgmOutOfScope) {
  const AssumptionReport r = check_consistency_assumptions(*gaussian_kernel(1, KernelSpec::kgm(3)), {});
  EXPECT_FALSE(r.within_scope);
  EXPECT_NE(r.to_string().find("outside"), std::string::npos);
}

TEST(Assumptions, QuarticRadius) {
  const auto k = make_stein_kernel(std::make_shared<QuarticTarget>(), make_mode_info(Vector::Zero(1), Matrix::Identity(1, 1)),
                                   KernelSpec::langevin());
  AssumptionProbe probe;
  probe.b1_target = 3.0;
  const AssumptionReport r = check_consistency_assumptions(*k, probe);
  ASSERT_TRUE(r.b1_radius);
  EXPECT_NEAR(*r.b1_radius, 0.5, 1e-3);
}
