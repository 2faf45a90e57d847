#include "steinpi_tools/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "steinpi/error.hpp"

namespace steinpi::tools {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, const std::string& context) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError(context + ": cannot parse '" + std::string(text) + "' as a number");
  }
  return value;
}

namespace {

std::size_t parse_count(std::string_view text, const std::string& context) {
  std::size_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError(context + ": cannot parse '" + std::string(text) + "' as a count");
  }
  return value;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::string quote_csv_field(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string results_to_csv(const std::vector<ResultRow>& rows) {
  std::string out = "replicate,n,method,ksd,wasserstein\n";
  for (const ResultRow& r : rows) {
    out += std::to_string(r.replicate) + "," + std::to_string(r.n) + "," + quote_csv_field(r.method) +
           "," + format_double(r.ksd) + "," + (r.wasserstein ? format_double(*r.wasserstein) : "") + "\n";
  }
  return out;
}

std::vector<ResultRow> results_from_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != "replicate,n,method,ksd,wasserstein") {
    throw ConfigError("results csv: unexpected header");
  }
  std::vector<ResultRow> rows;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const std::string ctx = "results csv line " + std::to_string(k + 1);
    const auto f = split_csv_line(lines[k]);
    if (f.size() != 5) throw ConfigError(ctx + ": expected 5 fields");
    ResultRow r;
    r.replicate = parse_count(f[0], ctx);
    r.n = parse_count(f[1], ctx);
    r.method = f[2];
    r.ksd = parse_double(f[3], ctx);
    if (!f[4].empty()) r.wasserstein = parse_double(f[4], ctx);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "method,n,replicates,mean_ksd,se_ksd,mean_wasserstein,se_wasserstein\n";
  for (const SummaryRow& r : rows) {
    out += quote_csv_field(r.method) + "," + std::to_string(r.n) + "," + std::to_string(r.replicates) +
           "," + format_double(r.mean_ksd) + "," + format_double(r.se_ksd) + "," +
           (r.mean_wasserstein ? format_double(*r.mean_wasserstein) : "") + "," +
           (r.se_wasserstein ? format_double(*r.se_wasserstein) : "") + "\n";
  }
  return out;
}

std::string timings_to_csv(const std::vector<TimingRow>& rows) {
  std::string out = "replicate,n,method,seconds\n";
  for (const TimingRow& r : rows) {
    out += std::to_string(r.replicate) + "," + std::to_string(r.n) + "," + quote_csv_field(r.method) +
           "," + format_double(r.seconds) + "\n";
  }
  return out;
}

std::string failures_to_csv(const std::vector<FailureRow>& rows) {
  std::string out = "replicate,n,method,message\n";
  for (const FailureRow& r : rows) {
    out += std::to_string(r.replicate) + "," + std::to_string(r.n) + "," + quote_csv_field(r.method) +
           "," + quote_csv_field(r.message) + "\n";
  }
  return out;
}

std::string points_to_csv(const Matrix& points, const Vector* weights) {
  std::string out;
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    if (c > 0) out += ',';
    out += "x" + std::to_string(c);
  }
  if (weights) out += ",weight";
  out += '\n';
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
      if (c > 0) out += ',';
      out += format_double(points(r, c));
    }
    if (weights) out += "," + format_double((*weights)[r]);
    out += '\n';
  }
  return out;
}

PointTable points_from_csv(std::string_view text, const std::string& context) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ConfigError(context + ": empty file");
  const auto header = split_csv_line(lines[0]);
  const bool weighted = !header.empty() && header.back() == "weight";
  const auto d = static_cast<Eigen::Index>(header.size()) - (weighted ? 1 : 0);
  if (d < 1) throw ConfigError(context + ": no coordinate columns");
  const auto n = static_cast<Eigen::Index>(lines.size() - 1);
  if (n < 1) throw ConfigError(context + ": no rows");
  PointTable table;
  table.points.resize(n, d);
  if (weighted) table.weights = Vector(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::string ctx = context + " line " + std::to_string(r + 2);
    const auto f = split_csv_line(lines[static_cast<std::size_t>(r + 1)]);
    if (f.size() != header.size()) throw ConfigError(ctx + ": wrong number of fields");
    for (Eigen::Index c = 0; c < d; ++c) table.points(r, c) = parse_double(f[static_cast<std::size_t>(c)], ctx);
    if (weighted) (*table.weights)[r] = parse_double(f.back(), ctx);
  }
  return table;
}

std::string read_text_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& file, std::string_view content) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + file.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw ConfigError("write failed for " + file.string());
}

}  // namespace steinpi::tools
