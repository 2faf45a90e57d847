#include <benchmark/benchmark.h>

#include "steinpi/mala.hpp"
#include "steinpi/metrics.hpp"
#include "steinpi/mode.hpp"
#include "steinpi/pi_target.hpp"
#include "steinpi/quantise.hpp"
#include "steinpi/stein_kernel.hpp"
#include "steinpi/targets.hpp"

using namespace steinpi;

namespace {

struct Fixture {
  TargetPtr target;
  std::shared_ptr<const SteinKernel> kernel;
  Matrix points;
};

Fixture regression_fixture(Eigen::Index n, KernelSpec spec) {
  const RegressionData data = simulate_regression_data();
  Fixture f;
  f.target = make_regression_posterior(data.t, data.y);
  const ModeInfo mode = find_mode(*f.target, Vector::Zero(2));
  f.kernel = make_stein_kernel(f.target, mode, spec);
  const Matrix chol = Eigen::LLT<Matrix>(mode.sigma).matrixL();
  Rng rng(1);
  f.points.resize(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) f.points.row(i) = (mode.x_star + chol * rng.normal_vector(2)).transpose();
  return f;
}

void BM_Gram(benchmark::State& state) {
  const Fixture f = regression_fixture(state.range(0), state.range(1) ? KernelSpec::kgm(3) : KernelSpec::langevin());
  for (auto _ : state) benchmark::DoNotOptimize(f.kernel->gram(f.points));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Gram)->ArgsProduct({{100, 300, 1000}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_OptimalWeights(benchmark::State& state) {
  const Fixture f = regression_fixture(state.range(0), KernelSpec::langevin());
  const Matrix gram = f.kernel->gram(f.points);
  const Vector z = Vector::Zero(gram.rows());
  for (auto _ : state) benchmark::DoNotOptimize(solve_simplex_qp(gram, z));
}
BENCHMARK(BM_OptimalWeights)->Arg(100)->Arg(300)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_GreedyThin(benchmark::State& state) {
  const Fixture f = regression_fixture(state.range(0), KernelSpec::langevin());
  for (auto _ : state) benchmark::DoNotOptimize(greedy_thin(f.points, *f.kernel, static_cast<std::size_t>(state.range(1))));
}
BENCHMARK(BM_GreedyThin)->Args({1000, 100})->Args({1000, 500})->Unit(benchmark::kMillisecond);

void BM_MalaPi(benchmark::State& state) {
  const Fixture f = regression_fixture(1, state.range(0) ? KernelSpec::kgm(3) : KernelSpec::langevin());
  const auto pi = make_pi(f.target, f.kernel);
  ChainConfig cfg;
  cfg.epsilon = 0.2;
  cfg.n = 10000;
  for (auto _ : state) benchmark::DoNotOptimize(run_chain(f.kernel->mode().x_star, *pi, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.n));
}
BENCHMARK(BM_MalaPi)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Transport(benchmark::State& state) {
  Rng rng(2);
  const auto n = state.range(0);
  WeightedSample a, b;
  a.points.resize(n, 2);
  b.points.resize(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    a.points.row(i) = rng.normal_vector(2).transpose();
    b.points.row(i) = rng.normal_vector(2).transpose();
  }
  a.weights = b.weights = Vector::Constant(n, 1.0 / static_cast<double>(n));
  for (auto _ : state) benchmark::DoNotOptimize(wasserstein1_exact(a, b));
}
BENCHMARK(BM_Transport)->Arg(50)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
