#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace steinpi::tools {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int threads = 1;
  std::string method;  // label; empty selects the first method
};

struct SampleOptions {
  std::optional<double> epsilon0;
  std::optional<int> epochs;
  std::optional<std::size_t> epoch_length;
  std::optional<std::size_t> final_length;
};

int cmd_sample(const CommonOptions& common, const SampleOptions& options, std::ostream& out);
int cmd_weights(const CommonOptions& common, const std::string& chain, std::ostream& out);
int cmd_thin(const CommonOptions& common, const std::string& chain, std::size_t m, std::ostream& out);
int cmd_ksd(const CommonOptions& common, const std::string& chain, const std::string& weights,
            std::ostream& out);
int cmd_wasserstein(const std::string& a, const std::string& b, std::ostream& out);
int cmd_experiment(const CommonOptions& common, std::ostream& out);
int cmd_check_assumptions(const CommonOptions& common, std::optional<double> b1_target,
                          std::ostream& out);

}  // namespace steinpi::tools
