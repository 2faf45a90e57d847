#include "steinpi_tools/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "steinpi/error.hpp"

namespace steinpi::tools {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(path, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) fail(path + "." + key, "unknown key");
  }
}

const json& require(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) fail(path + "." + key, "missing required key");
  return j.at(key);
}

double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::uint64_t as_count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) fail(path, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

Vector as_vector(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = as_double(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

Matrix as_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Matrix m;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    const Vector row = as_vector(j[static_cast<std::size_t>(r)], row_path);
    if (r == 0) m.resize(rows, row.size());
    if (row.size() != m.cols()) fail(row_path, "ragged matrix");
    m.row(r) = row.transpose();
  }
  return m;
}

// Library errors raised while building an object from a config become config errors.
template <typename F>
auto build(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

SampleFrom parse_sample_from(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected \"p\", \"pi\" or \"power_tilt\"");
  const auto s = j.get<std::string>();
  if (s == "p") return SampleFrom::kP;
  if (s == "pi") return SampleFrom::kPi;
  if (s == "power_tilt") return SampleFrom::kPowerTilt;
  fail(path, "unknown sampling distribution '" + s + "'");
}

PostProcess parse_post_process(const json& j, const std::string& path) {
  PostProcess p;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "none") {
      p.kind = PostProcess::Kind::kNone;
    } else if (s == "optimal_weights") {
      p.kind = PostProcess::Kind::kOptimalWeights;
    } else {
      fail(path, "unknown post-processor '" + s + "'");
    }
    return p;
  }
  only_keys(j, path, {"thin"});
  p.kind = PostProcess::Kind::kThin;
  p.m = as_count(require(j, path, "thin"), path + ".thin");
  if (p.m == 0) fail(path + ".thin", "m must be positive");
  return p;
}

WarmupSpec parse_warmup(const json& j, const std::string& path) {
  only_keys(j, path, {"epochs", "epoch_length", "final_length", "learning_rate", "epsilon0"});
  WarmupSpec w;
  if (j.contains("epochs")) w.epochs = static_cast<int>(as_count(j["epochs"], path + ".epochs"));
  if (j.contains("epoch_length")) w.epoch_length = as_count(j["epoch_length"], path + ".epoch_length");
  if (j.contains("final_length")) w.final_length = as_count(j["final_length"], path + ".final_length");
  if (j.contains("learning_rate")) w.learning_rate = as_double(j["learning_rate"], path + ".learning_rate");
  if (j.contains("epsilon0")) w.epsilon0 = as_double(j["epsilon0"], path + ".epsilon0");
  if (w.epochs < 1) fail(path + ".epochs", "must be at least 1");
  if (w.epoch_length == 0) fail(path + ".epoch_length", "must be positive");
  if (w.final_length == 0) fail(path + ".final_length", "must be positive");
  if (!(w.learning_rate >= 0.0 && w.learning_rate <= 1.0)) fail(path + ".learning_rate", "must lie in [0, 1]");
  if (!(w.epsilon0 > 0.0)) fail(path + ".epsilon0", "must be positive");
  return w;
}

SamplerSpec parse_sampler(const json& j, const std::string& path) {
  only_keys(j, path, {"kind", "warmup", "grid"});
  SamplerSpec s;
  const json& kind = require(j, path, "kind");
  if (kind == "exact") {
    s.kind = SamplerSpec::Kind::kExact;
  } else if (kind == "mala") {
    s.kind = SamplerSpec::Kind::kMala;
  } else {
    fail(path + ".kind", "expected \"exact\" or \"mala\"");
  }
  if (j.contains("warmup")) s.warmup = parse_warmup(j["warmup"], path + ".warmup");
  if (j.contains("grid")) {
    const std::string gp = path + ".grid";
    only_keys(j["grid"], gp, {"lower", "upper", "cells"});
    GridSpec g;
    g.lower = as_vector(require(j["grid"], gp, "lower"), gp + ".lower");
    g.upper = as_vector(require(j["grid"], gp, "upper"), gp + ".upper");
    g.cells = static_cast<int>(as_count(require(j["grid"], gp, "cells"), gp + ".cells"));
    if (g.lower.size() != g.upper.size()) fail(gp, "lower and upper differ in length");
    if (g.cells < 2) fail(gp + ".cells", "need at least two cells");
    s.grid = g;
  }
  return s;
}

}  // namespace

std::string to_string(SampleFrom s) {
  switch (s) {
    case SampleFrom::kP: return "p";
    case SampleFrom::kPi: return "pi";
    case SampleFrom::kPowerTilt: return "power_tilt";
  }
  return "?";
}

KernelSpec parse_kernel_spec(const json& j, const std::string& path) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "langevin") return KernelSpec::langevin();
    if (s.rfind("kgm", 0) == 0 && s.size() > 3) {
      try {
        std::size_t used = 0;
        const int order = std::stoi(s.substr(3), &used);
        if (used == s.size() - 3 && order >= 1) return KernelSpec::kgm(order);
      } catch (const std::exception&) {
      }
    }
    fail(path, "unknown kernel '" + s + "'");
  }
  only_keys(j, path, {"family", "order", "beta"});
  const json& family = require(j, path, "family");
  KernelSpec spec;
  if (family == "langevin") {
    spec = KernelSpec::langevin();
    if (j.contains("order") && as_count(j["order"], path + ".order") != 1) {
      fail(path + ".order", "the Langevin kernel has order 1");
    }
  } else if (family == "kgm") {
    spec = KernelSpec::kgm(static_cast<int>(as_count(require(j, path, "order"), path + ".order")));
    if (spec.order < 1) fail(path + ".order", "must be at least 1");
  } else {
    fail(path + ".family", "expected \"langevin\" or \"kgm\"");
  }
  if (j.contains("beta")) {
    spec.beta = as_double(j["beta"], path + ".beta");
    if (!(spec.beta > 0.0 && spec.beta < 1.0)) fail(path + ".beta", "must lie in (0, 1)");
  }
  return spec;
}

TargetPtr make_target_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const json& name_json = require(j, path, "name");
  if (!name_json.is_string()) fail(path + ".name", "expected a string");
  const auto name = name_json.get<std::string>();

  if (name == "gaussian") {
    only_keys(j, path, {"name", "mean", "cov"});
    const Vector mean = as_vector(require(j, path, "mean"), path + ".mean");
    const Matrix cov = as_matrix(require(j, path, "cov"), path + ".cov");
    return build(path, [&] { return make_gaussian(mean, cov); });
  }
  if (name == "standard_gaussian") {
    only_keys(j, path, {"name", "dim"});
    const auto d = as_count(require(j, path, "dim"), path + ".dim");
    if (d == 0) fail(path + ".dim", "must be positive");
    return make_standard_gaussian(static_cast<Eigen::Index>(d));
  }
  if (name == "mixture") {
    only_keys(j, path, {"name", "weights", "means", "scales"});
    if (!j.contains("weights") && !j.contains("means") && !j.contains("scales")) {
      return make_default_mixture();
    }
    const Vector w = as_vector(require(j, path, "weights"), path + ".weights");
    const Vector s = as_vector(require(j, path, "scales"), path + ".scales");
    const json& mj = require(j, path, "means");
    if (!mj.is_array()) fail(path + ".means", "expected an array");
    std::vector<Vector> means;
    for (std::size_t k = 0; k < mj.size(); ++k) {
      const std::string mp = path + ".means[" + std::to_string(k) + "]";
      means.push_back(mj[k].is_number() ? Vector::Constant(1, as_double(mj[k], mp)) : as_vector(mj[k], mp));
    }
    return build(path, [&] {
      return make_gaussian_mixture(std::vector<double>(w.begin(), w.end()), means,
                                   std::vector<double>(s.begin(), s.end()));
    });
  }
  if (name == "regression") {
    only_keys(j, path, {"name", "seed", "t", "y"});
    if (j.contains("t") || j.contains("y")) {
      const Vector t = as_vector(require(j, path, "t"), path + ".t");
      const Vector y = as_vector(require(j, path, "y"), path + ".y");
      return build(path, [&] { return make_regression_posterior(t, y); });
    }
    const std::uint64_t seed = j.contains("seed") ? as_count(j["seed"], path + ".seed") : kRegressionDataSeed;
    const RegressionData data = simulate_regression_data(seed);
    return make_regression_posterior(data.t, data.y);
  }
  if (name == "skew_normal") {
    only_keys(j, path, {"name"});
    return make_skew_normal_2d();
  }
  if (name == "garch") {
    only_keys(j, path, {"name", "y", "phi", "length", "seed"});
    if (j.contains("y")) {
      const Vector y = as_vector(j["y"], path + ".y");
      return build(path, [&] { return make_garch_posterior(y); });
    }
    const std::string pp = path + ".phi";
    const json& phi = require(j, path, "phi");
    only_keys(phi, pp, {"mean", "omega", "alpha", "beta"});
    GarchParameters p{as_double(require(phi, pp, "mean"), pp + ".mean"),
                      as_double(require(phi, pp, "omega"), pp + ".omega"),
                      as_double(require(phi, pp, "alpha"), pp + ".alpha"),
                      as_double(require(phi, pp, "beta"), pp + ".beta")};
    const auto length = as_count(require(j, path, "length"), path + ".length");
    const auto seed = as_count(require(j, path, "seed"), path + ".seed");
    return build(path, [&] {
      return make_garch_posterior(simulate_garch(p, static_cast<int>(length), seed));
    });
  }
  fail(path + ".name", "unknown target '" + name + "'");
}

namespace {

ExperimentSpec parse_experiment_impl(const json& j) {
  const std::string root = "$";
  only_keys(j, root, {"name", "seed", "replicates", "n_grid", "output_dir", "target", "mode_init",
                      "sampler", "kernel", "post_process", "methods", "wasserstein_reference",
                      "threads"});
  ExperimentSpec spec;
  if (j.contains("name") && !j["name"].is_string()) fail("$.name", "expected a string");
  spec.name = j.contains("name") ? j["name"].get<std::string>() : "experiment";
  spec.seed = as_count(require(j, root, "seed"), "$.seed");
  if (j.contains("replicates")) spec.replicates = as_count(j["replicates"], "$.replicates");
  if (spec.replicates == 0) fail("$.replicates", "must be positive");

  const json& grid = require(j, root, "n_grid");
  if (!grid.is_array() || grid.empty()) fail("$.n_grid", "expected a non-empty array");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto n = as_count(grid[i], "$.n_grid[" + std::to_string(i) + "]");
    if (n == 0) fail("$.n_grid[" + std::to_string(i) + "]", "must be positive");
    spec.n_grid.push_back(n);
  }

  if (j.contains("output_dir") && !j["output_dir"].is_string()) fail("$.output_dir", "expected a string");
  spec.output_dir = j.contains("output_dir") ? std::filesystem::path(j["output_dir"].get<std::string>())
                                             : std::filesystem::path("out") / spec.name;
  spec.target = require(j, root, "target");
  spec.model = make_target_from_json(spec.target, "$.target");
  if (j.contains("mode_init")) {
    spec.mode_init = as_vector(j["mode_init"], "$.mode_init");
    if (spec.mode_init->size() != spec.model->dim()) fail("$.mode_init", "wrong dimension");
  }
  if (j.contains("sampler")) spec.sampler = parse_sampler(j["sampler"], "$.sampler");
  if (spec.sampler.grid && spec.sampler.grid->lower.size() != spec.model->dim()) {
    fail("$.sampler.grid", "grid dimension does not match the target");
  }

  const KernelSpec default_kernel =
      j.contains("kernel") ? parse_kernel_spec(j["kernel"], "$.kernel") : KernelSpec::langevin();
  const PostProcess default_post =
      j.contains("post_process") ? parse_post_process(j["post_process"], "$.post_process") : PostProcess{};

  const json& methods = require(j, root, "methods");
  if (!methods.is_array() || methods.empty()) fail("$.methods", "expected a non-empty array");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const std::string mp = "$.methods[" + std::to_string(i) + "]";
    const json& mj = methods[i];
    only_keys(mj, mp, {"label", "sample_from", "r", "kernel", "post_process"});
    MethodSpec m;
    const json& label = require(mj, mp, "label");
    if (!label.is_string() || label.get<std::string>().empty()) fail(mp + ".label", "expected a non-empty string");
    m.label = label.get<std::string>();
    if (m.label.find_first_of(",\"\n\r") != std::string::npos) {
      fail(mp + ".label", "labels may not contain commas, quotes or newlines");
    }
    if (!labels.insert(m.label).second) fail(mp + ".label", "duplicate label '" + m.label + "'");
    m.sample_from = parse_sample_from(require(mj, mp, "sample_from"), mp + ".sample_from");
    if (mj.contains("r")) {
      m.r = as_double(mj["r"], mp + ".r");
      if (!(m.r > 0.0)) fail(mp + ".r", "must be positive");
    }
    m.kernel = mj.contains("kernel") ? parse_kernel_spec(mj["kernel"], mp + ".kernel") : default_kernel;
    m.post = mj.contains("post_process") ? parse_post_process(mj["post_process"], mp + ".post_process")
                                         : default_post;
    if (spec.sampler.kind == SamplerSpec::Kind::kExact && m.sample_from != SampleFrom::kP &&
        !spec.sampler.grid) {
      fail(mp + ".sample_from", "exact sampling from pi or a power tilt needs $.sampler.grid");
    }
    if (spec.sampler.kind == SamplerSpec::Kind::kExact && m.sample_from == SampleFrom::kP &&
        !spec.model->has_exact_sampler() && !spec.sampler.grid) {
      fail(mp + ".sample_from", "target has no exact sampler; use mala or give $.sampler.grid");
    }
    spec.methods.push_back(m);
  }

  if (spec.sampler.kind == SamplerSpec::Kind::kMala) {
    for (std::size_t n : spec.n_grid) {
      if (n > spec.sampler.warmup.final_length) {
        fail("$.n_grid", "n exceeds the final MALA epoch length");
      }
    }
  }
  if (j.contains("wasserstein_reference")) {
    spec.wasserstein_reference = as_count(j["wasserstein_reference"], "$.wasserstein_reference");
    if (spec.wasserstein_reference > 0 && !spec.model->has_exact_sampler()) {
      fail("$.wasserstein_reference", "target has no exact sampler for a reference sample");
    }
  }
  if (j.contains("threads")) spec.threads = std::max(1, static_cast<int>(as_count(j["threads"], "$.threads")));
  return spec;
}

}  // namespace

ExperimentSpec parse_experiment_spec(const json& j) {
  try {
    return parse_experiment_impl(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("config: cannot open " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config: " + file.string() + ": " + e.what());
  }
  return parse_experiment_spec(j);
}

}  // namespace steinpi::tools
