#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "steinpi/targets.hpp"
#include "steinpi_tools/experiment.hpp"

namespace steinpi::tools {

// Shortest decimal that parses back to the same double.
std::string format_double(double x);
double parse_double(std::string_view text, const std::string& context);

// Splits one CSV record. Fields may be double-quoted with "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);
std::string quote_csv_field(std::string_view field);

std::string results_to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> results_from_csv(std::string_view text);
std::string summary_to_csv(const std::vector<SummaryRow>& rows);
std::string timings_to_csv(const std::vector<TimingRow>& rows);
std::string failures_to_csv(const std::vector<FailureRow>& rows);

// Point tables: a header of coordinate names and an optional final column
// named "weight".
struct PointTable {
  Matrix points;
  std::optional<Vector> weights;
};

std::string points_to_csv(const Matrix& points, const Vector* weights = nullptr);
PointTable points_from_csv(std::string_view text, const std::string& context);

std::string read_text_file(const std::filesystem::path& file);
void write_text_file(const std::filesystem::path& file, std::string_view content);

}  // namespace steinpi::tools
