#pragma once

#include <string>
#include <vector>

namespace dwb::plot {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal self-contained SVG line plot: axes, ticks, legend, one polyline per
// series. Deterministic output for identical inputs.
void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series);

}  // namespace dwb::plot
