#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "steinpi/error.hpp"

namespace {

int threads_from_env(int fallback) {
  const char* env = std::getenv("STEINPI_THREADS");
  if (!env || !*env) return fallback;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw steinpi::ConfigError("STEINPI_THREADS must be a positive integer");
  return static_cast<int>(v);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace steinpi::tools;
  CLI::App app{"steinpi: samplers and Stein discrepancy post-processing"};
  app.require_subcommand(1);

  CommonOptions common;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub, bool with_config = true) {
    if (with_config) sub->add_option("--config", common.config, "Experiment JSON")->required();
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--out-dir", common.out_dir, "Override the output directory");
    sub->add_option("--threads", common.threads, "Worker threads (STEINPI_THREADS overrides)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--method", common.method, "Method label (default: the first)");
  };

  SampleOptions sample_opts;
  auto* sample = app.add_subcommand("sample", "Run the configured sampler and write chain.csv");
  add_common(sample);
  sample->add_option("--epsilon0", sample_opts.epsilon0, "Initial step size");
  sample->add_option("--epochs", sample_opts.epochs, "Number of adaptation epochs, final included");
  sample->add_option("--epoch-length", sample_opts.epoch_length, "Warm-up epoch length");
  sample->add_option("--final-length", sample_opts.final_length, "Final epoch length");

  std::string chain;
  std::string weights;
  std::size_t m = 0;
  auto* weigh = app.add_subcommand("weights", "Optimal simplex weights for a chain");
  add_common(weigh);
  weigh->add_option("--chain", chain, "Chain CSV")->required();

  auto* thin = app.add_subcommand("thin", "Greedy Stein thinning of a chain");
  add_common(thin);
  thin->add_option("--chain", chain, "Chain CSV")->required();
  thin->add_option("--m", m, "Number of points to select")->required()->check(CLI::PositiveNumber);

  auto* ksd = app.add_subcommand("ksd", "Kernel Stein discrepancy of a (weighted) chain");
  add_common(ksd);
  ksd->add_option("--chain", chain, "Chain CSV")->required();
  ksd->add_option("--weights", weights, "Weights CSV (index,weight); uniform if omitted");

  std::string sample_a;
  std::string sample_b;
  auto* wass = app.add_subcommand("wasserstein", "1-Wasserstein distance between two sample CSVs");
  wass->add_option("a", sample_a, "First sample CSV (optional weight column)")->required();
  wass->add_option("b", sample_b, "Second sample CSV")->required();

  auto* experiment = app.add_subcommand("experiment", "Run a replicated experiment");
  add_common(experiment);

  std::optional<double> b1_target;
  auto* check = app.add_subcommand("check-assumptions", "Probe the consistency conditions for a kernel");
  add_common(check);
  check->add_option("--b1-target", b1_target, "Report the radius beyond which -Hess log p >= b1 I");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    for (CLI::App* sub : {sample, weigh, thin, ksd, experiment, check}) {
      if (sub->parsed() && sub->count("--seed") > 0) common.seed = seed;
    }
    common.threads = threads_from_env(common.threads);
    if (*sample) return cmd_sample(common, sample_opts, std::cout);
    if (*weigh) return cmd_weights(common, chain, std::cout);
    if (*thin) return cmd_thin(common, chain, m, std::cout);
    if (*ksd) return cmd_ksd(common, chain, weights, std::cout);
    if (*wass) return cmd_wasserstein(sample_a, sample_b, std::cout);
    if (*experiment) return cmd_experiment(common, std::cout);
    if (*check) return cmd_check_assumptions(common, b1_target, std::cout);
  } catch (const steinpi::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
