#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "steinpi/mala.hpp"
#include "steinpi/stein_kernel.hpp"
#include "steinpi/targets.hpp"

namespace steinpi::tools {

// Which distribution the states are drawn from.
enum class SampleFrom { kP, kPi, kPowerTilt };

struct PostProcess {
  enum class Kind { kNone, kOptimalWeights, kThin } kind = Kind::kOptimalWeights;
  std::size_t m = 0;  // thin only
};

struct MethodSpec {
  std::string label;
  SampleFrom sample_from = SampleFrom::kP;
  double r = 1.0;  // power tilt order
  KernelSpec kernel;
  PostProcess post;
};

struct WarmupSpec {
  int epochs = 10;
  std::size_t epoch_length = 1000;
  std::size_t final_length = 100000;
  double learning_rate = 0.3;
  double epsilon0 = 1.0;
};

struct GridSpec {
  Vector lower;
  Vector upper;
  int cells = 0;
};

struct SamplerSpec {
  enum class Kind { kExact, kMala } kind = Kind::kExact;
  WarmupSpec warmup;
  std::optional<GridSpec> grid;  // needed for exact draws from Pi or a power tilt
};

struct ExperimentSpec {
  std::string name;
  nlohmann::json target;  // validated description, kept for provenance
  TargetPtr model;
  std::optional<Vector> mode_init;
  SamplerSpec sampler;
  std::vector<MethodSpec> methods;
  std::vector<std::size_t> n_grid;
  std::size_t replicates = 10;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  std::size_t wasserstein_reference = 0;  // 0 disables the W1 column
  int threads = 1;
};

// Builds a target from {"name": ..., params}. Known names: gaussian,
// standard_gaussian, mixture, regression, skew_normal, garch.
TargetPtr make_target_from_json(const nlohmann::json& j, const std::string& path = "target");

KernelSpec parse_kernel_spec(const nlohmann::json& j, const std::string& path = "kernel");

// Throws ConfigError naming the offending key.
ExperimentSpec parse_experiment_spec(const nlohmann::json& j);
ExperimentSpec load_experiment_spec(const std::filesystem::path& file);

std::string to_string(SampleFrom s);

}  // namespace steinpi::tools
