#include <gtest/gtest.h>

#include <filesystem>
#include <regex>

#include "steinpi/error.hpp"
#include "steinpi_tools/config.hpp"
#include "steinpi_tools/csv.hpp"
#include "steinpi_tools/experiment.hpp"
#include "steinpi_tools/plot.hpp"

using namespace steinpi;
using namespace steinpi::tools;
using nlohmann::json;

namespace {

json small_config() {
  return json::parse(read_text_file(std::filesystem::path(STEINPI_TEST_DATA_DIR) / "small_mixture.json"));
}

std::string config_error(const json& j) {
  try {
    parse_experiment_spec(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

SummaryRow row(std::string method, std::size_t n, double mean, double se) {
  SummaryRow r;
  r.method = std::move(method);
  r.n = n;
  r.replicates = 2;
  r.mean_ksd = mean;
  r.se_ksd = se;
  return r;
}

}  // namespace

TEST(Config, ParsesSmallConfig) {
  const ExperimentSpec spec = parse_experiment_spec(small_config());
  EXPECT_EQ(spec.methods.size(), 3u);
  EXPECT_EQ(spec.methods[2].post.kind, PostProcess::Kind::kThin);
  EXPECT_EQ(spec.methods[2].post.m, 8u);
  EXPECT_EQ(spec.sampler.kind, SamplerSpec::Kind::kMala);
  EXPECT_EQ(spec.sampler.warmup.final_length, 2000u);
  EXPECT_EQ(spec.model->dim(), 1);
}

TEST(Config, ErrorsNameTheOffendingKey) {
  json j = small_config();
  j["methods"][1]["sample_from"] = "q";
  EXPECT_NE(config_error(j).find("methods[1].sample_from"), std::string::npos) << config_error(j);

  j = small_config();
  j["sampler"]["warmup"]["epochz"] = 3;
  EXPECT_NE(config_error(j).find("epochz"), std::string::npos);

  j = small_config();
  j.erase("seed");
  EXPECT_NE(config_error(j).find("seed"), std::string::npos);

  j = small_config();
  j["kernel"] = {{"family", "kgm"}, {"order", -1}};
  EXPECT_NE(config_error(j).find("kernel"), std::string::npos);

  j = small_config();
  j["n_grid"] = "ten";
  EXPECT_FALSE(config_error(j).empty());
}

TEST(Config, KernelSpellings) {
  EXPECT_EQ(parse_kernel_spec("kgm3").order, 3);
  EXPECT_EQ(parse_kernel_spec("langevin").family, KernelFamily::kLangevin);
  const KernelSpec k = parse_kernel_spec(json{{"family", "kgm"}, {"order", 2}, {"beta", 0.25}});
  EXPECT_EQ(k.order, 2);
  EXPECT_EQ(k.beta, 0.25);
}

TEST(Csv, ShortestRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 123456789.0}) {
    const std::string s = format_double(x);
    EXPECT_EQ(parse_double(s, "test"), x) << s;
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_TRUE(std::isnan(parse_double(format_double(std::nan("")), "test")));
  EXPECT_THROW(parse_double("1.5x", "test"), ConfigError);
}

TEST(Csv, QuotingAndSplitting) {
  EXPECT_EQ(quote_csv_field("plain"), "plain");
  EXPECT_EQ(quote_csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(quote_csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  const auto f = split_csv_line("1,\"a,b\",\"x\"\"y\",");
  ASSERT_EQ(f.size(), 4u);
  EXPECT_EQ(f[1], "a,b");
  EXPECT_EQ(f[2], "x\"y");
  EXPECT_EQ(f[3], "");
}

TEST(Csv, ResultsRoundTripIsByteIdentical) {
  std::vector<ResultRow> rows = {{0, 10, "P", 0.125, std::nullopt}, {1, 10, "odd,label", 1.0 / 3.0, 0.5}};
  const std::string once = results_to_csv(rows);
  EXPECT_EQ(results_to_csv(results_from_csv(once)), once);
  EXPECT_EQ(once.find('\r'), std::string::npos);
}

TEST(Csv, PointsRoundTrip) {
  Matrix pts(3, 2);
  pts << 0.1, 0.2, -1.5, 3.0, 1e-9, 7.0;
  const Vector w{{0.2, 0.3, 0.5}};
  const std::string text = points_to_csv(pts, &w);
  const PointTable t = points_from_csv(text, "test");
  EXPECT_EQ(t.points, pts);
  ASSERT_TRUE(t.weights);
  EXPECT_EQ(*t.weights, w);
  EXPECT_EQ(points_to_csv(t.points, &*t.weights), text);
}

TEST(Summary, ConstantColumnAndArithmetic) {
  std::vector<ResultRow> rows = {{0, 10, "A", 2.0, {}}, {1, 10, "A", 2.0, {}}, {0, 10, "B", 1.0, {}},
                                 {1, 10, "B", 3.0, {}}};
  const auto s = summarise(rows);
  const SummaryRow* a = find_summary(s, "A", 10);
  const SummaryRow* b = find_summary(s, "B", 10);
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->mean_ksd, 2.0);
  EXPECT_EQ(a->se_ksd, 0.0);
  EXPECT_DOUBLE_EQ(b->mean_ksd, 2.0);
  EXPECT_DOUBLE_EQ(b->se_ksd, 1.0);
}

TEST(Summary, InsufficientReplicates) {
  EXPECT_THROW(summarise({{0, 10, "A", 1.0, {}}}), InsufficientReplicates);
  EXPECT_TRUE(summarise_available({{0, 10, "A", 1.0, {}}}).empty());
}

TEST(Summary, BeatsIsStrict) {
  EXPECT_TRUE(beats(row("a", 1, 1.0, 0.1), row("b", 1, 2.0, 0.1)));
  EXPECT_FALSE(beats(row("a", 1, 1.0, 0.5), row("b", 1, 2.0, 0.5)));
  EXPECT_FALSE(beats(row("b", 1, 2.0, 0.1), row("a", 1, 1.0, 0.1)));
}

TEST(Plot, SinglePoint) {
  const std::string svg = emit_plot({row("a", 10, 0.5, 0.1)});
  EXPECT_EQ(count(svg, "class=\"marker\""), 1u);
  EXPECT_EQ(count(svg, "class=\"errorbar\""), 1u);
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
}

TEST(Plot, TwoMethodsThreePoints) {
  std::vector<SummaryRow> s;
  for (const char* m : {"a", "b"}) {
    for (std::size_t n : {10, 30, 100}) s.push_back(row(m, n, 1.0 / static_cast<double>(n), 0.01));
  }
  const std::string svg = emit_plot(s);
  EXPECT_EQ(count(svg, "<polyline"), 2u);
  const std::regex poly("<polyline[^>]*points=\"([^\"]*)\"");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), poly); it != std::sregex_iterator(); ++it) {
    const std::string pts = (*it)[1];
    EXPECT_EQ(count(pts, ","), 3u);
  }
  EXPECT_EQ(emit_plot(s), svg);
  EXPECT_THROW(emit_plot({}), EmptySummary);
}

TEST(Experiment, RowCountAndDeterminism) {
  json j = small_config();
  j["sampler"] = {{"kind", "exact"}, {"grid", {{"lower", {-15.0}}, {"upper", {15.0}}, {"cells", 3000}}}};
  const ExperimentSpec spec = parse_experiment_spec(j);
  const ExperimentResult a = run_experiment(spec, 1);
  EXPECT_TRUE(a.failures.empty());
  EXPECT_EQ(a.rows.size(), spec.replicates * spec.n_grid.size() * spec.methods.size());
  const ExperimentResult b = run_experiment(spec, 2);
  EXPECT_EQ(results_to_csv(a.rows), results_to_csv(b.rows));
}

TEST(Experiment, EqualSeedsGiveEqualTables) {
  json j = small_config();
  j["replicates"] = 2;
  const ExperimentSpec spec = parse_experiment_spec(j);
  EXPECT_EQ(results_to_csv(run_experiment(spec).rows), results_to_csv(run_experiment(spec).rows));
}

TEST(Experiment, WritesAllOutputs) {
  ExperimentSpec spec = parse_experiment_spec(small_config());
  spec.output_dir = std::filesystem::temp_directory_path() / "steinpi_tools_test_outputs";
  std::filesystem::remove_all(spec.output_dir);
  write_experiment_outputs(spec, run_experiment(spec));
  for (const char* f : {"results.csv", "summary.csv", "failures.csv", "timings.csv", "ksd.svg"}) {
    EXPECT_TRUE(std::filesystem::exists(spec.output_dir / f)) << f;
  }
  std::filesystem::remove_all(spec.output_dir);
}
