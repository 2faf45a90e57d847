#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "steinpi_tools/config.hpp"

namespace steinpi::tools {

struct ResultRow {
  std::size_t replicate = 0;
  std::size_t n = 0;
  std::string method;
  double ksd = 0.0;
  std::optional<double> wasserstein;
};

// Wall time lives apart from the results so that results.csv is reproducible.
struct TimingRow {
  std::size_t replicate = 0;
  std::size_t n = 0;
  std::string method;
  double seconds = 0.0;
};

struct FailureRow {
  std::size_t replicate = 0;
  std::size_t n = 0;
  std::string method;
  std::string message;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;        // sorted by (replicate, n, method)
  std::vector<TimingRow> timings;
  std::vector<FailureRow> failures;
};

// Replicates run in parallel; replicate r draws only from the stream
// Rng(seed).substream(r), so the table does not depend on `threads`.
ExperimentResult run_experiment(const ExperimentSpec& spec, int threads = 1);

struct SummaryRow {
  std::string method;
  std::size_t n = 0;
  std::size_t replicates = 0;
  double mean_ksd = 0.0;
  double se_ksd = 0.0;  // sample standard deviation / sqrt(replicates)
  std::optional<double> mean_wasserstein;
  std::optional<double> se_wasserstein;
};

// One row per (method, n), sorted by method then n. Throws
// InsufficientReplicates if any cell has fewer than two rows.
std::vector<SummaryRow> summarise(const std::vector<ResultRow>& rows);

// As summarise, but cells with fewer than two rows (after failures) are
// dropped instead of raising.
std::vector<SummaryRow> summarise_available(const std::vector<ResultRow>& rows);

// Non-overlapping one-standard-error bars: mean_a + se_a < mean_b - se_b.
bool beats(const SummaryRow& a, const SummaryRow& b);

const SummaryRow* find_summary(const std::vector<SummaryRow>& summary, const std::string& method,
                               std::size_t n);

// results.csv, summary.csv, failures.csv, timings.csv and ksd.svg under spec.output_dir.
void write_experiment_outputs(const ExperimentSpec& spec, const ExperimentResult& result);

}  // namespace steinpi::tools
