#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "steinpi/error.hpp"
#include "steinpi/mala.hpp"
#include "steinpi/metrics.hpp"
#include "steinpi/mode.hpp"
#include "steinpi/pi_target.hpp"
#include "steinpi/quantise.hpp"
#include "steinpi_tools/config.hpp"
#include "steinpi_tools/csv.hpp"
#include "steinpi_tools/experiment.hpp"

namespace steinpi::tools {

namespace {

struct Context {
  ExperimentSpec spec;
  const MethodSpec* method = nullptr;
  ModeInfo mode;
  std::shared_ptr<const SteinKernel> kernel;
  std::shared_ptr<const LogDensity> sampling_target;
};

Context load_context(const CommonOptions& common) {
  if (common.config.empty()) throw ConfigError("--config is required");
  Context ctx;
  ctx.spec = load_experiment_spec(common.config);
  if (common.seed) ctx.spec.seed = *common.seed;
  if (!common.out_dir.empty()) ctx.spec.output_dir = common.out_dir;
  ctx.method = &ctx.spec.methods.front();
  if (!common.method.empty()) {
    ctx.method = nullptr;
    for (const MethodSpec& m : ctx.spec.methods) {
      if (m.label == common.method) ctx.method = &m;
    }
    if (!ctx.method) throw ConfigError("no method labelled '" + common.method + "' in " + common.config);
  }
  const Vector init = ctx.spec.mode_init.value_or(Vector::Zero(ctx.spec.model->dim()));
  ctx.mode = find_mode(*ctx.spec.model, init);
  ctx.kernel = make_stein_kernel(ctx.spec.model, ctx.mode, ctx.method->kernel);
  switch (ctx.method->sample_from) {
    case SampleFrom::kP: ctx.sampling_target = ctx.spec.model; break;
    case SampleFrom::kPi: ctx.sampling_target = make_pi(ctx.spec.model, ctx.kernel); break;
    case SampleFrom::kPowerTilt: ctx.sampling_target = make_power_tilt(ctx.spec.model, ctx.method->r); break;
  }
  return ctx;
}

Matrix load_points(const std::string& file, std::size_t dim) {
  const PointTable table = points_from_csv(read_text_file(file), file);
  if (static_cast<std::size_t>(table.points.cols()) != dim) {
    throw ConfigError(file + ": expected " + std::to_string(dim) + " coordinate columns");
  }
  return table.points;
}

WeightedSample load_weighted(const std::string& file) {
  PointTable table = points_from_csv(read_text_file(file), file);
  WeightedSample s;
  s.weights = table.weights ? *table.weights : Vector::Constant(table.points.rows(), 1.0 / table.points.rows());
  s.points = std::move(table.points);
  return s;
}

// weights.csv has columns index,weight.
Vector load_weights(const std::string& file, Eigen::Index n) {
  const std::string text = read_text_file(file);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line != "index,weight") throw ConfigError(file + ": expected header 'index,weight'");
  Vector w = Vector::Zero(n);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    const std::string ctx = file + " line " + std::to_string(lineno);
    if (f.size() != 2) throw ConfigError(ctx + ": expected two fields");
    const double idx = parse_double(f[0], ctx);
    if (idx < 0 || idx >= static_cast<double>(n) || idx != std::floor(idx)) {
      throw ConfigError(ctx + ": index out of range");
    }
    w[static_cast<Eigen::Index>(idx)] = parse_double(f[1], ctx);
  }
  return w;
}

std::filesystem::path out_dir(const Context& ctx) { return ctx.spec.output_dir; }

}  // namespace

int cmd_sample(const CommonOptions& common, const SampleOptions& options, std::ostream& out) {
  Context ctx = load_context(common);
  WarmupSpec& w = ctx.spec.sampler.warmup;
  if (options.epsilon0) w.epsilon0 = *options.epsilon0;
  if (options.epochs) w.epochs = *options.epochs;
  if (options.epoch_length) w.epoch_length = *options.epoch_length;
  if (options.final_length) w.final_length = *options.final_length;

  Matrix states;
  if (ctx.spec.sampler.kind == SamplerSpec::Kind::kMala) {
    const AdaptSchedule schedule =
        AdaptSchedule::standard(ctx.spec.seed, w.epochs, w.epoch_length, w.final_length, w.learning_rate, w.epsilon0);
    const AdaptResult res = adaptive_warmup(ctx.mode.x_star, *ctx.sampling_target, schedule);
    states = res.output.states;
    out << "epsilon " << format_double(res.config.epsilon) << "\n";
    out << "acceptance " << format_double(res.output.accept_rate) << "\n";
    out << "nonfinite_proposals " << res.output.nonfinite_proposals << "\n";
  } else {
    std::size_t n = 0;
    for (std::size_t v : ctx.spec.n_grid) n = std::max(n, v);
    Rng rng(ctx.spec.seed);
    if (ctx.method->sample_from == SampleFrom::kP && ctx.spec.model->has_exact_sampler()) {
      states.resize(static_cast<Eigen::Index>(n), ctx.spec.model->dim());
      for (Eigen::Index i = 0; i < states.rows(); ++i) states.row(i) = ctx.spec.model->sample_exact(rng).transpose();
    } else {
      if (!ctx.spec.sampler.grid) throw ConfigError("exact sampling needs $.sampler.grid");
      const GridSpec& g = *ctx.spec.sampler.grid;
      states = GridSampler(*ctx.sampling_target, g.lower, g.upper, g.cells).sample(n, rng);
    }
  }
  const auto file = out_dir(ctx) / "chain.csv";
  write_text_file(file, points_to_csv(states));
  out << "wrote " << states.rows() << " states to " << file.string() << "\n";
  return 0;
}

int cmd_weights(const CommonOptions& common, const std::string& chain, std::ostream& out) {
  Context ctx = load_context(common);
  const Matrix points = load_points(chain, static_cast<std::size_t>(ctx.spec.model->dim()));
  QPOptions options;
  options.threads = common.threads;
  const QPResult qp = optimal_weights(points, *ctx.kernel, options);
  std::string csv = "index,weight\n";
  for (Eigen::Index i = 0; i < qp.weights.size(); ++i) {
    csv += std::to_string(i) + "," + format_double(qp.weights[i]) + "\n";
  }
  const auto file = out_dir(ctx) / "weights.csv";
  write_text_file(file, csv);
  out << "ksd " << format_double(std::sqrt(std::max(qp.objective, 0.0))) << "\n";
  out << "kkt_residual " << format_double(qp.kkt_residual) << "\n";
  out << "iterations " << qp.iterations << (qp.converged ? "" : " (not converged)") << "\n";
  out << "wrote " << file.string() << "\n";
  return 0;
}

int cmd_thin(const CommonOptions& common, const std::string& chain, std::size_t m, std::ostream& out) {
  Context ctx = load_context(common);
  const Matrix points = load_points(chain, static_cast<std::size_t>(ctx.spec.model->dim()));
  const ThinResult res = greedy_thin(points, *ctx.kernel, m, common.threads);
  std::string csv = "index\n";
  for (Eigen::Index i : res.indices) csv += std::to_string(i) + "\n";
  const auto file = out_dir(ctx) / "thinned.csv";
  write_text_file(file, csv);
  out << "ksd " << format_double(ksd(res.sample, *ctx.kernel, common.threads)) << "\n";
  out << "wrote " << file.string() << "\n";
  return 0;
}

int cmd_ksd(const CommonOptions& common, const std::string& chain, const std::string& weights, std::ostream& out) {
  Context ctx = load_context(common);
  const Matrix points = load_points(chain, static_cast<std::size_t>(ctx.spec.model->dim()));
  WeightedSample sample;
  sample.points = points;
  sample.weights = weights.empty() ? Vector::Constant(points.rows(), 1.0 / points.rows())
                                   : load_weights(weights, points.rows());
  out << format_double(ksd(sample, *ctx.kernel, common.threads)) << "\n";
  return 0;
}

int cmd_wasserstein(const std::string& a, const std::string& b, std::ostream& out) {
  const WeightedSample sa = load_weighted(a);
  const WeightedSample sb = load_weighted(b);
  if (sa.dim() != sb.dim()) throw ConfigError("wasserstein: samples differ in dimension");
  const double cost = sa.dim() == 1 ? wasserstein1_1d(sa, sb) : wasserstein1_exact(sa, sb).cost;
  out << format_double(cost) << "\n";
  return 0;
}

int cmd_experiment(const CommonOptions& common, std::ostream& out) {
  if (common.config.empty()) throw ConfigError("--config is required");
  ExperimentSpec spec = load_experiment_spec(common.config);
  if (common.seed) spec.seed = *common.seed;
  if (!common.out_dir.empty()) spec.output_dir = common.out_dir;
  const ExperimentResult result = run_experiment(spec, common.threads);
  write_experiment_outputs(spec, result);
  out << "rows " << result.rows.size() << ", failures " << result.failures.size() << "\n";
  for (const SummaryRow& s : summarise_available(result.rows)) {
    out << s.method << " n=" << s.n << " ksd " << format_double(s.mean_ksd) << " +- "
        << format_double(s.se_ksd) << "\n";
  }
  out << "wrote " << spec.output_dir.string() << "\n";
  return 0;
}

int cmd_check_assumptions(const CommonOptions& common, std::optional<double> b1_target, std::ostream& out) {
  Context ctx = load_context(common);
  AssumptionProbe probe;
  probe.b1_target = b1_target;
  probe.seed = ctx.spec.seed;
  out << check_consistency_assumptions(*ctx.kernel, probe).to_string();
  return 0;
}

}  // namespace steinpi::tools
