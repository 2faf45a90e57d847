#pragma once

#include <string>
#include <vector>

#include "steinpi_tools/experiment.hpp"

namespace steinpi::tools {

struct PlotStyle {
  std::string title;
  std::string x_label = "n";
  std::string y_label = "KSD";
  int width = 640;
  int height = 420;
};

// Mean KSD against n on log-log axes: one polyline per method, a marker and
// a one-standard-error bar per point. Throws EmptySummary on no rows.
std::string emit_plot(const std::vector<SummaryRow>& summary, const PlotStyle& style = {});

}  // namespace steinpi::tools
