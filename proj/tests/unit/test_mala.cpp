#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "steinpi/mala.hpp"
#include "steinpi/mode.hpp"
#include "steinpi/pi_target.hpp"
#include "steinpi/stein_kernel.hpp"
#include "steinpi/targets.hpp"

using namespace steinpi;

namespace {

double log_normal_density(double x, double mean, double var) {
  return -0.5 * std::log(2 * std::numbers::pi * var) - 0.5 * (x - mean) * (x - mean) / var;
}

// Integrated autocorrelation time by Geyer's initial positive sequence.
double ess_factor(const Vector& x) {
  const Vector c = x.array() - x.mean();
  const double v = c.squaredNorm() / x.size();
  double tau = 1.0;
  for (Eigen::Index lag = 1; lag < x.size() / 2; lag += 2) {
    const double r1 = c.head(x.size() - lag).dot(c.tail(x.size() - lag)) / (x.size() * v);
    const double r2 = c.head(x.size() - lag - 1).dot(c.tail(x.size() - lag - 1)) / (x.size() * v);
    if (r1 + r2 <= 0) break;
    tau += 2 * (r1 + r2);
  }
  return tau;
}

}  // namespace

TEST(MalaStep, TinyStepAlwaysAccepts) {
  const auto p = make_standard_gaussian(1);
  MalaState s = make_mala_state(*p, Vector::Constant(1, 0.8));
  const double before = s.x[0];
  Rng rng(1);
  const StepResult r = mala_step(s, *p, 1e-12, Preconditioner::identity(1), rng);
  EXPECT_TRUE(r.accepted);
  EXPECT_NEAR(r.log_accept, 0.0, 1e-9);
  EXPECT_NEAR(s.x[0], before, 1e-5);
}

TEST(MalaStep, ReversibilityOracle) {
  const auto p = make_standard_gaussian(1);
  const double eps = 0.5;
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const MalaState a = make_mala_state(*p, Vector::Constant(1, 2 * rng.normal()));
    const MalaState b = make_mala_state(*p, Vector::Constant(1, 2 * rng.normal()));
    const double q_ab = log_normal_density(b.x[0], a.x[0] - eps * a.x[0], 2 * eps);
    const double q_ba = log_normal_density(a.x[0], b.x[0] - eps * b.x[0], 2 * eps);
    const double expected = q_ba - q_ab + b.log_density - a.log_density;
    EXPECT_NEAR(mala_log_accept(a, b, eps, Preconditioner::identity(1)), expected, 1e-12);
  }
}

TEST(MalaStep, ProposalNoiseScale) {
  // M = 4: proposal standard deviation sqrt(2 eps / 4).
  const auto p = make_standard_gaussian(1);
  const Preconditioner m(Matrix::Constant(1, 1, 4.0));
  const double eps = 0.5;
  Rng rng(3);
  double s = 0, s2 = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double z = m.scale_noise(Vector::Constant(1, rng.normal()))[0] * std::sqrt(2 * eps);
    s += z;
    s2 += z * z;
  }
  const double sd = std::sqrt(s2 / n - (s / n) * (s / n));
  EXPECT_NEAR(sd / std::sqrt(eps / 2), 1.0, 0.01);
}

TEST(MalaStep, NonFiniteProposalIsRejected) {
  class Cliff final : public LogDensity {
   public:
    Eigen::Index dim() const override { return 1; }
    double log_density(const Vector& x) const override { return x[0] > 0.5 ? std::nan("") : -0.5 * x[0] * x[0]; }
    Vector grad_log_density(const Vector& x) const override { return -x; }
  } cliff;
  ChainConfig cfg;
  cfg.epsilon = 2.0;
  cfg.n = 200;
  const ChainOutput out = run_chain(Vector::Zero(1), cliff, cfg);
  EXPECT_GT(out.nonfinite_proposals, 0u);
  EXPECT_TRUE(out.states.allFinite());
  EXPECT_LE(out.states.maxCoeff(), 0.5);
}

TEST(RunChain, SeedDeterminismAndRestart) {
  const auto p = make_skew_normal_2d();
  ChainConfig cfg;
  cfg.epsilon = 0.3;
  cfg.n = 500;
  cfg.seed = 99;
  const ChainOutput a = run_chain(Vector::Zero(2), *p, cfg);
  const ChainOutput b = run_chain(Vector::Zero(2), *p, cfg);
  EXPECT_EQ(a.states, b.states);

  const Eigen::Index k = 123;
  ChainConfig rest = cfg;
  rest.first_step = k + 1;
  rest.n = cfg.n - k - 1;
  const ChainOutput c = run_chain(a.states.row(k).transpose(), *p, rest);
  EXPECT_EQ(c.states, a.states.bottomRows(rest.n));
}

TEST(RunChain, RejectionsRepeatStates) {
  const auto p = make_standard_gaussian(2);
  ChainConfig cfg;
  cfg.epsilon = 1.5;
  cfg.n = 2000;
  const ChainOutput out = run_chain(Vector::Zero(2), *p, cfg);
  std::size_t accepted = 0;
  for (Eigen::Index t = 1; t < out.states.rows(); ++t) {
    const bool same = out.states.row(t) == out.states.row(t - 1);
    ASSERT_EQ(same, !out.accepted[static_cast<std::size_t>(t)]);
  }
  for (auto f : out.accepted) accepted += f;
  EXPECT_DOUBLE_EQ(out.accept_rate, static_cast<double>(accepted) / cfg.n);
}

TEST(RunChain, StandardGaussianMean) {
  const auto p = make_standard_gaussian(1);
  ChainConfig cfg;
  cfg.epsilon = 0.8;
  cfg.n = 100000;
  cfg.seed = 5;
  const ChainOutput out = run_chain(Vector::Zero(1), *p, cfg);
  const Vector x = out.states.col(0);
  const double se = std::sqrt(ess_factor(x) / x.size());
  EXPECT_LT(std::abs(x.mean()), 4 * se);
}

TEST(RunChain, PiChainIsOverDispersed) {
  const auto p = make_standard_gaussian(1);
  const auto k = make_stein_kernel(p, make_mode_info(Vector::Zero(1), Matrix::Identity(1, 1)), KernelSpec::langevin());
  const auto pi = make_pi(p, k);
  int wins = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    ChainConfig cfg;
    cfg.epsilon = 0.8;
    cfg.n = 20000;
    cfg.seed = s;
    const double m2_p = run_chain(Vector::Zero(1), *p, cfg).states.squaredNorm();
    const double m2_pi = run_chain(Vector::Zero(1), *pi, cfg).states.squaredNorm();
    wins += m2_pi > m2_p;
  }
  EXPECT_GE(wins, 9);
}

TEST(Adaptive, ZeroLearningLeavesStepSizeWhenAcceptanceOnTarget) {
  AdaptSchedule s = AdaptSchedule::standard(1, 3, 100, 100);
  // With a target acceptance equal to the observed one the update is exp(0).
  const AdaptResult r0 = adaptive_warmup(Vector::Zero(1), *make_standard_gaussian(1), s);
  s.target_accept = r0.accept_rates[0];
  const AdaptResult r1 = adaptive_warmup(Vector::Zero(1), *make_standard_gaussian(1), s);
  EXPECT_DOUBLE_EQ(r1.epsilons[1], r1.epsilons[0]);
}

TEST(Adaptive, LearnsAnisotropicScale) {
  Matrix cov = Matrix::Zero(2, 2);
  cov(0, 0) = 1.0;
  cov(1, 1) = 100.0;
  const auto p = make_gaussian(Vector::Zero(2), cov);
  std::vector<double> conds;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const AdaptResult r = adaptive_warmup(Vector::Zero(2), *p, AdaptSchedule::standard(s, 10, 1000, 1000));
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(r.config.preconditioner).eigenvalues();
    conds.push_back(ev.maxCoeff() / ev.minCoeff());
  }
  std::sort(conds.begin(), conds.end());
  const double median = 0.5 * (conds[4] + conds[5]);
  EXPECT_GT(median, 25.0);
  EXPECT_LT(median, 400.0);
}

TEST(Adaptive, RejectsBadSchedules) {
  AdaptSchedule s = AdaptSchedule::standard(1);
  s.learning_rates.pop_back();
  EXPECT_ANY_THROW(s.validate());
}

TEST(Helpers, RandomWindowAndCovariance) {
  Matrix states(10, 1);
  for (int i = 0; i < 10; ++i) states(i, 0) = i;
  Rng rng(1);
  const Matrix w = random_window(states, 4, rng);
  ASSERT_EQ(w.rows(), 4);
  for (int i = 1; i < 4; ++i) EXPECT_EQ(w(i, 0), w(i - 1, 0) + 1);
  EXPECT_ANY_THROW(random_window(states, 11, rng));
  EXPECT_NEAR(sample_covariance(states)(0, 0), 55.0 / 6.0, 1e-12);
}
