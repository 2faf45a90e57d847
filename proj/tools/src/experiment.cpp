#include "steinpi_tools/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <tuple>

#include "steinpi/error.hpp"
#include "steinpi/metrics.hpp"
#include "steinpi/mode.hpp"
#include "steinpi/parallel.hpp"
#include "steinpi/pi_target.hpp"
#include "steinpi/quantise.hpp"
#include "steinpi_tools/csv.hpp"
#include "steinpi_tools/plot.hpp"

namespace steinpi::tools {

namespace {

// Stream tags within a replicate.
constexpr std::uint64_t kChainTag = 1ULL << 40;
constexpr std::uint64_t kWindowTag = 2ULL << 40;
constexpr std::uint64_t kExactTag = 3ULL << 40;
constexpr std::uint64_t kReferenceTag = ~0ULL;

// Everything shared across replicates for one method.
struct PreparedMethod {
  const MethodSpec* spec = nullptr;
  std::shared_ptr<const SteinKernel> kernel;
  std::shared_ptr<const LogDensity> sampling_target;
  std::shared_ptr<const GridSampler> grid;  // exact sampling via a tabulated density
};

struct Cell {
  std::size_t n_index;
  std::size_t method_index;
};

Matrix draw_exact(const ExperimentSpec& spec, const PreparedMethod& m, std::size_t n, Rng& rng) {
  if (m.grid) return m.grid->sample(n, rng);
  Matrix out(static_cast<Eigen::Index>(n), spec.model->dim());
  for (std::size_t i = 0; i < n; ++i) out.row(static_cast<Eigen::Index>(i)) = spec.model->sample_exact(rng).transpose();
  return out;
}

WeightedSample post_process(const Matrix& points, const PreparedMethod& m, int threads) {
  switch (m.spec->post.kind) {
    case PostProcess::Kind::kNone:
      return WeightedSample::uniform(points);
    case PostProcess::Kind::kOptimalWeights: {
      QPOptions options;
      options.threads = threads;
      const QPResult qp = optimal_weights(points, *m.kernel, options);
      return WeightedSample{points, qp.weights};
    }
    case PostProcess::Kind::kThin:
      return greedy_thin(points, *m.kernel, m.spec->post.m, threads).sample;
  }
  throw InvalidArgument("unknown post-processor");
}

std::optional<double> wasserstein_to(const WeightedSample& sample, const WeightedSample* reference) {
  if (!reference) return std::nullopt;
  if (sample.dim() == 1) return wasserstein1_1d(sample, *reference);
  return wasserstein1_exact(sample, *reference).cost;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, int threads) {
  const Eigen::Index d = spec.model->dim();
  const Vector init = spec.mode_init.value_or(Vector::Zero(d));
  ModeInfo mode;
  try {
    mode = find_mode(*spec.model, init);
  } catch (const Error& e) {
    throw NonConvergence(std::string("experiment: mode finding failed: ") + e.what());
  }

  std::vector<PreparedMethod> methods;
  for (const MethodSpec& ms : spec.methods) {
    PreparedMethod m;
    m.spec = &ms;
    m.kernel = make_stein_kernel(spec.model, mode, ms.kernel);
    switch (ms.sample_from) {
      case SampleFrom::kP: m.sampling_target = spec.model; break;
      case SampleFrom::kPi: m.sampling_target = make_pi(spec.model, m.kernel); break;
      case SampleFrom::kPowerTilt: m.sampling_target = make_power_tilt(spec.model, ms.r); break;
    }
    const bool needs_grid = ms.sample_from != SampleFrom::kP || !spec.model->has_exact_sampler();
    if (spec.sampler.kind == SamplerSpec::Kind::kExact && needs_grid) {
      const GridSpec& g = spec.sampler.grid.value();
      m.grid = std::make_shared<GridSampler>(*m.sampling_target, g.lower, g.upper, g.cells);
    }
    methods.push_back(std::move(m));
  }

  std::optional<WeightedSample> reference;
  if (spec.wasserstein_reference > 0) {
    Rng rng = Rng(spec.seed).substream(kReferenceTag);
    Matrix pts(static_cast<Eigen::Index>(spec.wasserstein_reference), d);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) pts.row(i) = spec.model->sample_exact(rng).transpose();
    reference = WeightedSample::uniform(std::move(pts));
  }

  // Replicates are the unit of parallelism; inner kernels run single-threaded.
  const int inner_threads = spec.replicates > 1 ? 1 : std::max(threads, 1);
  std::vector<ExperimentResult> per_replicate(spec.replicates);
  const Rng root(spec.seed);

  parallel_for(spec.replicates, threads, [&](std::size_t rep) {
    ExperimentResult& out = per_replicate[rep];
    const Rng stream = root.substream(rep);
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      const PreparedMethod& m = methods[mi];
      const std::string& label = m.spec->label;

      std::optional<Matrix> chain;
      double chain_seconds = 0.0;
      if (spec.sampler.kind == SamplerSpec::Kind::kMala) {
        const auto start = std::chrono::steady_clock::now();
        try {
          const WarmupSpec& w = spec.sampler.warmup;
          AdaptSchedule schedule = AdaptSchedule::standard(stream.substream(kChainTag + mi).key(), w.epochs,
                                                           w.epoch_length, w.final_length, w.learning_rate,
                                                           w.epsilon0);
          chain = adaptive_warmup(mode.x_star, *m.sampling_target, schedule).output.states;
        } catch (const Error& e) {
          for (std::size_t n : spec.n_grid) out.failures.push_back({rep, n, label, e.what()});
          continue;
        }
        chain_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      }

      for (std::size_t ni = 0; ni < spec.n_grid.size(); ++ni) {
        const std::size_t n = spec.n_grid[ni];
        const auto start = std::chrono::steady_clock::now();
        try {
          Matrix points;
          if (chain) {
            Rng window_rng = stream.substream(kWindowTag + (mi << 20) + ni);
            points = random_window(*chain, n, window_rng);
          } else {
            Rng draw_rng = stream.substream(kExactTag + (mi << 20) + ni);
            points = draw_exact(spec, m, n, draw_rng);
          }
          const WeightedSample sample = post_process(points, m, inner_threads);
          ResultRow row;
          row.replicate = rep;
          row.n = n;
          row.method = label;
          row.ksd = ksd(sample, *m.kernel, inner_threads);
          row.wasserstein = wasserstein_to(sample, reference ? &*reference : nullptr);
          out.rows.push_back(std::move(row));
        } catch (const Error& e) {
          out.failures.push_back({rep, n, label, e.what()});
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out.timings.push_back({rep, n, label, seconds + (ni == 0 ? chain_seconds : 0.0)});
      }
    }
  });

  ExperimentResult merged;
  for (ExperimentResult& r : per_replicate) {
    std::move(r.rows.begin(), r.rows.end(), std::back_inserter(merged.rows));
    std::move(r.timings.begin(), r.timings.end(), std::back_inserter(merged.timings));
    std::move(r.failures.begin(), r.failures.end(), std::back_inserter(merged.failures));
  }
  auto key = [](const auto& r) { return std::tie(r.replicate, r.n, r.method); };
  std::sort(merged.rows.begin(), merged.rows.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  std::sort(merged.timings.begin(), merged.timings.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  std::sort(merged.failures.begin(), merged.failures.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  return merged;
}

std::vector<SummaryRow> summarise(const std::vector<ResultRow>& rows) {
  std::map<std::pair<std::string, std::size_t>, std::vector<const ResultRow*>> cells;
  for (const ResultRow& r : rows) cells[{r.method, r.n}].push_back(&r);
  if (cells.empty()) throw EmptySummary("summarise: no result rows");

  auto mean_se = [](const std::vector<double>& v) {
    const double k = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= k;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::pair{mean, std::sqrt(ss / (k - 1.0)) / std::sqrt(k)};
  };

  std::vector<SummaryRow> out;
  for (const auto& [key, cell] : cells) {
    if (cell.size() < 2) {
      throw InsufficientReplicates("summarise: method '" + key.first + "' at n = " + std::to_string(key.second) +
                                   " has " + std::to_string(cell.size()) + " replicate(s); need at least 2");
    }
    SummaryRow s;
    s.method = key.first;
    s.n = key.second;
    s.replicates = cell.size();
    std::vector<double> ksds;
    std::vector<double> w1;
    for (const ResultRow* r : cell) {
      ksds.push_back(r->ksd);
      if (r->wasserstein) w1.push_back(*r->wasserstein);
    }
    std::tie(s.mean_ksd, s.se_ksd) = mean_se(ksds);
    if (w1.size() == cell.size()) {
      const auto [m, se] = mean_se(w1);
      s.mean_wasserstein = m;
      s.se_wasserstein = se;
    }
    out.push_back(std::move(s));
  }
  return out;
}

bool beats(const SummaryRow& a, const SummaryRow& b) {
  return a.mean_ksd + a.se_ksd < b.mean_ksd - b.se_ksd;
}

const SummaryRow* find_summary(const std::vector<SummaryRow>& summary, const std::string& method, std::size_t n) {
  for (const SummaryRow& s : summary) {
    if (s.method == method && s.n == n) return &s;
  }
  return nullptr;
}

std::vector<SummaryRow> summarise_available(const std::vector<ResultRow>& rows) {
  std::map<std::pair<std::string, std::size_t>, std::size_t> counts;
  for (const ResultRow& r : rows) ++counts[{r.method, r.n}];
  std::vector<ResultRow> kept;
  for (const ResultRow& r : rows) {
    if (counts[{r.method, r.n}] >= 2) kept.push_back(r);
  }
  if (kept.empty()) return {};
  return summarise(kept);
}

void write_experiment_outputs(const ExperimentSpec& spec, const ExperimentResult& result) {
  const auto& dir = spec.output_dir;
  write_text_file(dir / "results.csv", results_to_csv(result.rows));
  write_text_file(dir / "failures.csv", failures_to_csv(result.failures));
  write_text_file(dir / "timings.csv", timings_to_csv(result.timings));
  const auto summary = summarise_available(result.rows);
  write_text_file(dir / "summary.csv", summary_to_csv(summary));
  if (!summary.empty()) {
    PlotStyle style;
    style.title = spec.name;
    write_text_file(dir / "ksd.svg", emit_plot(summary, style));
  }
}

}  // namespace steinpi::tools
