#pragma once

#include <string>
#include <utility>
#include <vector>

namespace jdcli {

struct CsvRow {
  std::string estimator;
  std::string param_name;
  double param_value = 0.0;
  double t = 0.0;
  double value = 0.0;
  double branch = 0.0;  // branch count or matrix dimension
  std::string flags;
};

// Fixed-schema results table. Numbers print in shortest round-trip form,
// so identical runs serialize identically byte for byte.
std::string csv_text(const std::vector<CsvRow>& rows);

void write_file(const std::string& path, const std::string& text);

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

// Static line plot of one or more series with auto-scaled axes.
std::string svg_plot(const std::vector<PlotSeries>& series,
                     const std::string& x_label, const std::string& y_label);

}  // namespace jdcli
