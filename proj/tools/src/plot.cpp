#include "steinpi_tools/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "steinpi/error.hpp"

namespace steinpi::tools {

namespace {

std::string fixed(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

std::string emit_plot(const std::vector<SummaryRow>& summary, const PlotStyle& style) {
  if (summary.empty()) throw EmptySummary("emit_plot: nothing to plot");

  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min = x_min;
  double y_max = -x_min;
  // Positive floor so that mean - se never leaves the log axis.
  double positive_floor = std::numeric_limits<double>::infinity();
  for (const SummaryRow& r : summary) {
    if (r.mean_ksd > 0.0) positive_floor = std::min(positive_floor, r.mean_ksd);
  }
  if (!std::isfinite(positive_floor)) positive_floor = 1e-12;
  positive_floor *= 0.5;

  auto lo_of = [&](const SummaryRow& r) { return std::max(r.mean_ksd - r.se_ksd, positive_floor); };
  auto hi_of = [&](const SummaryRow& r) { return std::max(r.mean_ksd + r.se_ksd, positive_floor); };
  for (const SummaryRow& r : summary) {
    x_min = std::min(x_min, static_cast<double>(r.n));
    x_max = std::max(x_max, static_cast<double>(r.n));
    y_min = std::min(y_min, lo_of(r));
    y_max = std::max(y_max, hi_of(r));
  }
  const double lx0 = std::log10(x_min) - 0.05;
  const double lx1 = std::log10(x_max) + 0.05;
  const double ly0 = std::log10(y_min) - 0.05;
  const double ly1 = std::log10(y_max) + 0.05;

  const double left = 70.0;
  const double right = style.width - 150.0;
  const double top = 40.0;
  const double bottom = style.height - 50.0;
  auto px = [&](double x) { return left + (std::log10(x) - lx0) / (lx1 - lx0) * (right - left); };
  auto py = [&](double y) {
    return bottom - (std::log10(std::max(y, positive_floor)) - ly0) / (ly1 - ly0) * (bottom - top);
  };

  // Methods in first-appearance order.
  std::vector<std::string> methods;
  std::map<std::string, std::vector<const SummaryRow*>> by_method;
  for (const SummaryRow& r : summary) {
    if (!by_method.count(r.method)) methods.push_back(r.method);
    by_method[r.method].push_back(&r);
  }

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(style.width) +
         "\" height=\"" + std::to_string(style.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!style.title.empty()) {
    svg += "<text x=\"" + fixed((left + right) / 2) + "\" y=\"20\" text-anchor=\"middle\">" +
           escape_xml(style.title) + "</text>\n";
  }
  svg += "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
  svg += "<line x1=\"" + fixed(left) + "\" y1=\"" + fixed(bottom) + "\" x2=\"" + fixed(right) + "\" y2=\"" +
         fixed(bottom) + "\"/>\n";
  svg += "<line x1=\"" + fixed(left) + "\" y1=\"" + fixed(top) + "\" x2=\"" + fixed(left) + "\" y2=\"" +
         fixed(bottom) + "\"/>\n";
  svg += "</g>\n";

  // Decade ticks.
  svg += "<g class=\"ticks\" stroke=\"black\">\n";
  for (int e = static_cast<int>(std::ceil(lx0)); e <= static_cast<int>(std::floor(lx1)); ++e) {
    const double x = px(std::pow(10.0, e));
    svg += "<line x1=\"" + fixed(x) + "\" y1=\"" + fixed(bottom) + "\" x2=\"" + fixed(x) + "\" y2=\"" +
           fixed(bottom + 5) + "\"/><text x=\"" + fixed(x) + "\" y=\"" + fixed(bottom + 18) +
           "\" text-anchor=\"middle\" stroke=\"none\">1e" + std::to_string(e) + "</text>\n";
  }
  for (int e = static_cast<int>(std::ceil(ly0)); e <= static_cast<int>(std::floor(ly1)); ++e) {
    const double y = py(std::pow(10.0, e));
    svg += "<line x1=\"" + fixed(left - 5) + "\" y1=\"" + fixed(y) + "\" x2=\"" + fixed(left) + "\" y2=\"" +
           fixed(y) + "\"/><text x=\"" + fixed(left - 8) + "\" y=\"" + fixed(y + 4) +
           "\" text-anchor=\"end\" stroke=\"none\">1e" + std::to_string(e) + "</text>\n";
  }
  svg += "</g>\n";
  svg += "<text x=\"" + fixed((left + right) / 2) + "\" y=\"" + fixed(style.height - 12.0) +
         "\" text-anchor=\"middle\">" + escape_xml(style.x_label) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + fixed((top + bottom) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         fixed((top + bottom) / 2) + ")\">" + escape_xml(style.y_label) + "</text>\n";

  for (std::size_t k = 0; k < methods.size(); ++k) {
    const std::string colour = kPalette[k % (sizeof(kPalette) / sizeof(kPalette[0]))];
    auto rows = by_method[methods[k]];
    std::stable_sort(rows.begin(), rows.end(), [](const SummaryRow* a, const SummaryRow* b) { return a->n < b->n; });
    svg += "<g class=\"series\" data-method=\"" + escape_xml(methods[k]) + "\">\n";
    svg += "<polyline fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i > 0) svg += ' ';
      svg += fixed(px(static_cast<double>(rows[i]->n))) + "," + fixed(py(rows[i]->mean_ksd));
    }
    svg += "\"/>\n";
    for (const SummaryRow* r : rows) {
      const double x = px(static_cast<double>(r->n));
      svg += "<line class=\"errorbar\" stroke=\"" + colour + "\" x1=\"" + fixed(x) + "\" y1=\"" + fixed(py(lo_of(*r))) +
             "\" x2=\"" + fixed(x) + "\" y2=\"" + fixed(py(hi_of(*r))) + "\"/>\n";
      svg += "<circle class=\"marker\" fill=\"" + colour + "\" cx=\"" + fixed(x) + "\" cy=\"" + fixed(py(r->mean_ksd)) +
             "\" r=\"3\"/>\n";
    }
    const double ly = top + 16.0 * static_cast<double>(k);
    svg += "<text x=\"" + fixed(right + 12) + "\" y=\"" + fixed(ly + 4) + "\" fill=\"" + colour + "\">" +
           escape_xml(methods[k]) + "</text>\n";
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace steinpi::tools
