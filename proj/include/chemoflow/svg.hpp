#pragma once

#include <string>
#include <vector>

namespace chemoflow {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal standalone SVG line chart. With log_y, non-positive values are
/// dropped. Throws Error when the file cannot be written.
void write_line_plot(const std::string& path, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<PlotSeries>& series, bool log_y = false);

}  // namespace chemoflow
