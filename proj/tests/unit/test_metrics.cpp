#include <gtest/gtest.h>

#include <cmath>

#include "steinpi/error.hpp"
#include "steinpi/metrics.hpp"
#include "steinpi/quantise.hpp"
#include "steinpi/stein_kernel.hpp"

using namespace steinpi;

namespace {

WeightedSample sample_1d(std::vector<double> x, std::vector<double> w) {
  WeightedSample s;
  s.points = Eigen::Map<Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
  s.weights = Eigen::Map<Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
  return s;
}

WeightedSample random_sample(Rng& rng, int n, int d) {
  Matrix pts(n, d);
  for (int i = 0; i < n; ++i) pts.row(i) = rng.normal_vector(d).transpose();
  Vector w(n);
  for (int i = 0; i < n; ++i) w[i] = rng.uniform();
  return {pts, w / w.sum()};
}

void check_plan(const TransportPlan& plan, const WeightedSample& a, const WeightedSample& b) {
  Vector rows = Vector::Zero(a.size()), cols = Vector::Zero(b.size());
  for (const TransportEntry& e : plan.plan) {
    EXPECT_GT(e.mass, 0.0);
    rows[e.source] += e.mass;
    cols[e.target] += e.mass;
  }
  EXPECT_LT((rows - a.weights).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((cols - b.weights).cwiseAbs().maxCoeff(), 1e-10);
}

}  // namespace

TEST(Wasserstein1d, Trivial) {
  const WeightedSample a = sample_1d({0.3, -1.0, 2.0}, {0.2, 0.5, 0.3});
  EXPECT_EQ(wasserstein1_1d(a, a), 0.0);
  EXPECT_DOUBLE_EQ(wasserstein1_1d(sample_1d({0.0}, {1.0}), sample_1d({-2.5}, {1.0})), 2.5);
}

TEST(Wasserstein1d, MatchesLinearProgram) {
  // scipy.optimize.linprog on the 5 x 5 transport problem.
  const WeightedSample a = sample_1d({-1.3, 0.2, 0.7, 2.5, 4.0}, {0.1, 0.3, 0.2, 0.25, 0.15});
  const WeightedSample b = sample_1d({-0.5, 0.0, 1.1, 1.9, 3.3}, {0.2, 0.2, 0.2, 0.2, 0.2});
  EXPECT_NEAR(wasserstein1_1d(a, b), 0.535, 1e-10);
  EXPECT_NEAR(wasserstein1_exact(a, b).cost, 0.535, 1e-10);
}

TEST(Wasserstein1d, DimensionMismatch) {
  Rng rng(1);
  EXPECT_THROW(wasserstein1_1d(random_sample(rng, 3, 2), random_sample(rng, 3, 2)), DimensionMismatch);
}

TEST(WassersteinExact, TwoDimensionalLinearProgram) {
  WeightedSample a, b;
  a.points = Matrix(4, 2);
  a.points << -0.8019314252534474, -1.324358995628145, -0.24836162209524854, 0.4204452380655215,
      1.1360465324896427, 0.10970639932180819, -0.5526473205362324, -0.7847803553442784;
  a.weights = Vector{{0.1, 0.2, 0.3, 0.4}};
  b.points = Matrix(6, 2);
  b.points << 1.2487457707345913, 2.1347830429585777, 0.7727687758447217, -0.7333286640307717,
      -0.45826520543608873, 2.1000190889991117, 0.7028824405086084, -1.2321348424395848, 0.4163038071829742,
      -0.6632259734447485, -0.1292880940615545, 0.011994176723142569;
  b.weights = Vector::Constant(6, 1.0 / 6.0);
  const TransportPlan plan = wasserstein1_exact(a, b);
  EXPECT_NEAR(plan.cost, 1.323613770098198, 1e-10);
  check_plan(plan, a, b);
}

TEST(WassersteinExact, PermutationCostsNothing) {
  Rng rng(2);
  WeightedSample a = random_sample(rng, 8, 3);
  a.weights = Vector::Constant(8, 1.0 / 8);
  WeightedSample b = a;
  b.points = a.points.colwise().reverse();
  EXPECT_NEAR(wasserstein1_exact(a, b).cost, 0.0, 1e-12);
}

TEST(WassersteinExact, DegenerateTie) {
  // Every pair is at distance 1, so every plan costs 1.
  WeightedSample a, b;
  a.points = Matrix(2, 2);
  a.points << 0, 0, 1, 1;
  b.points = Matrix(2, 2);
  b.points << 1, 0, 0, 1;
  a.weights = b.weights = Vector::Constant(2, 0.5);
  const TransportPlan plan = wasserstein1_exact(a, b);
  EXPECT_NEAR(plan.cost, 1.0, 1e-15);
  check_plan(plan, a, b);
}

TEST(WassersteinExact, AgreesWithOneDimensional) {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const WeightedSample a = random_sample(rng, 5 + i, 1);
    const WeightedSample b = random_sample(rng, 30 - i, 1);
    EXPECT_NEAR(wasserstein1_exact(a, b).cost, wasserstein1_1d(a, b), 1e-9);
  }
}

TEST(WassersteinExact, MetricAxioms) {
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    const WeightedSample a = random_sample(rng, 12, 2), b = random_sample(rng, 9, 2), c = random_sample(rng, 15, 2);
    const double ab = wasserstein1_exact(a, b).cost;
    EXPECT_NEAR(wasserstein1_exact(a, a).cost, 0.0, 1e-12);
    EXPECT_NEAR(ab, wasserstein1_exact(b, a).cost, 1e-10);
    EXPECT_LE(wasserstein1_exact(a, c).cost, ab + wasserstein1_exact(b, c).cost + 1e-8);
  }
}

TEST(WassersteinExact, SizeGuard) {
  Rng rng(5);
  EXPECT_THROW(wasserstein1_exact(random_sample(rng, 20, 1), random_sample(rng, 20, 1), 399), SizeGuard);
}

TEST(Transport, RejectsUnbalancedMarginals) {
  EXPECT_ANY_THROW(solve_transport(Matrix::Ones(2, 2), Vector{{0.5, 0.5}}, Vector{{0.5, 0.6}}));
}

TEST(DimensionEffect, Predictions) {
  EXPECT_DOUBLE_EQ(dimension_effect(1, 10, KernelSpec::langevin(), 1).predicted, 2.0);
  EXPECT_DOUBLE_EQ(dimension_effect(10, 10, KernelSpec::langevin(), 1).predicted, 0.2);
  EXPECT_DOUBLE_EQ(dimension_effect(100, 10, KernelSpec::langevin(), 1).predicted, 0.02);
  EXPECT_ANY_THROW(dimension_effect(2, 10, KernelSpec::kgm(3), 1));
}

TEST(DimensionEffect, OneDimensionWithinFivePercent) {
  const DimensionEffect e = dimension_effect(1, 1000000, KernelSpec::langevin(), 2);
  EXPECT_NEAR(e.estimate / e.predicted, 1.0, 0.05);
}

TEST(DimensionEffect, ImprovesWithMoreSamples) {
  double err_small = 0, err_large = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const DimensionEffect a = dimension_effect(5, 10000, KernelSpec::langevin(), 10 + s);
    const DimensionEffect b = dimension_effect(5, 1000000, KernelSpec::langevin(), 20 + s);
    err_small += std::abs(a.estimate / a.predicted - 1);
    err_large += std::abs(b.estimate / b.predicted - 1);
  }
  EXPECT_LT(err_large, err_small);
}
