#pragma once

// Policy comparison outputs: a per-policy table and one SVG bar chart per
// metric (means per policy; lower is better on every metric).

#include <algorithm>
#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "olcais/csv.hpp"
#include "olcais/measurements.hpp"

namespace olcais::report {

inline constexpr std::string_view kComparisonHeader =
    "policy,count,duration_ratio,fluctuation_ratio,co2_mean,human_dependency";

struct MetricColumn {
  std::string_view name;
  std::string_view title;
  double metrics::ComparisonRow::*field;
};

inline constexpr std::array<MetricColumn, 4> kMetricColumns{{
    {"duration_ratio", "Recovering / disruptive duration", &metrics::ComparisonRow::duration_ratio},
    {"fluctuation_ratio", "ACR points below / above threshold", &metrics::ComparisonRow::fluctuation_ratio},
    {"co2_mean", "Mean CO2 per iteration (kg)", &metrics::ComparisonRow::co2_mean},
    {"human_dependency", "Human interactions per iteration", &metrics::ComparisonRow::human_dependency},
}};

inline std::string comparison_csv(const metrics::Comparison& cmp) {
  std::string out(kComparisonHeader);
  out += '\n';
  for (const auto& r : cmp.rows) {
    out += csv::escape(r.policy) + ',' + std::to_string(r.count);
    for (const auto& col : kMetricColumns) out += ',' + csv::format_real(r.*col.field);
    out += '\n';
  }
  return out;
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

/// Vertical bar chart, one bar per label.
inline std::string bar_chart_svg(std::string_view title, const std::vector<std::string>& labels,
                                 const std::vector<double>& values) {
  constexpr int kWidth = 640, kHeight = 360, kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
  const int plot_w = kWidth - kLeft - kRight;
  const int plot_h = kHeight - kTop - kBottom;
  double top = 0.0;
  for (double v : values) top = std::max(top, v);
  if (top <= 0.0) top = 1.0;

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
                    "\" height=\"" + std::to_string(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + std::to_string(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         xml_escape(title) + "</text>\n";
  svg += "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" + std::to_string(kTop + plot_h) + "\" x2=\"" +
         std::to_string(kLeft + plot_w) + "\" y2=\"" + std::to_string(kTop + plot_h) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" + std::to_string(kTop) + "\" x2=\"" +
         std::to_string(kLeft) + "\" y2=\"" + std::to_string(kTop + plot_h) + "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + std::to_string(kLeft - 6) + "\" y=\"" + std::to_string(kTop + 4) +
         "\" text-anchor=\"end\">" + csv::format_real(top) + "</text>\n";
  svg += "<text x=\"" + std::to_string(kLeft - 6) + "\" y=\"" + std::to_string(kTop + plot_h + 4) +
         "\" text-anchor=\"end\">0</text>\n";

  const std::size_t n = std::min(labels.size(), values.size());
  if (n > 0) {
    const double slot = static_cast<double>(plot_w) / static_cast<double>(n);
    const double bar = slot * 0.6;
    for (std::size_t i = 0; i < n; ++i) {
      const double h = std::max(0.0, values[i]) / top * plot_h;
      const double x = kLeft + slot * static_cast<double>(i) + (slot - bar) / 2.0;
      const double y = kTop + plot_h - h;
      svg += "<rect x=\"" + csv::format_real(x) + "\" y=\"" + csv::format_real(y) + "\" width=\"" +
             csv::format_real(bar) + "\" height=\"" + csv::format_real(h) + "\" fill=\"#4a7bb7\"/>\n";
      svg += "<text x=\"" + csv::format_real(x + bar / 2.0) + "\" y=\"" + csv::format_real(y - 4) +
             "\" text-anchor=\"middle\">" + csv::format_real(values[i]) + "</text>\n";
      svg += "<text x=\"" + csv::format_real(x + bar / 2.0) + "\" y=\"" + std::to_string(kTop + plot_h + 18) +
             "\" text-anchor=\"middle\">" + xml_escape(labels[i]) + "</text>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

/// Reads every metrics.csv below `root` (or `root` itself if it is a file).
inline std::vector<metrics::MetricsReport> collect_metrics(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (fs::is_regular_file(root)) {
    files.push_back(root);
  } else if (fs::is_directory(root)) {
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file() && e.path().filename() == "metrics.csv") files.push_back(e.path());
  } else {
    throw csv::IoError("no such input: " + root.string());
  }
  std::sort(files.begin(), files.end());
  std::vector<metrics::MetricsReport> all;
  for (const auto& f : files) {
    auto part = csv::read_metrics(f);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

struct ReportPaths {
  std::filesystem::path table;
  std::vector<std::filesystem::path> charts;
};

/// Writes the comparison table to `table_path` and `<stem>_<metric>.svg`
/// charts beside it.
inline ReportPaths write_report(const metrics::Comparison& cmp, const std::filesystem::path& table_path) {
  ReportPaths out{table_path, {}};
  if (table_path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(table_path.parent_path(), ec);
    if (ec) throw csv::IoError("cannot create " + table_path.parent_path().string() + ": " + ec.message());
  }
  csv::write_file(table_path, comparison_csv(cmp));
  std::vector<std::string> labels;
  for (const auto& r : cmp.rows) labels.push_back(r.policy);
  for (const auto& col : kMetricColumns) {
    std::vector<double> values;
    for (const auto& r : cmp.rows) values.push_back(r.*col.field);
    auto path = table_path;
    path.replace_filename(table_path.stem().string() + "_" + std::string(col.name) + ".svg");
    csv::write_file(path, bar_chart_svg(col.title, labels, values));
    out.charts.push_back(path);
  }
  return out;
}

}  // namespace olcais::report
