#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dw::cli {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartLabels {
  std::string title;
  std::string x_axis;
  std::string y_axis;
};

/// Standalone SVG line chart with axes, ticks and a legend. Non-finite points are
/// skipped. Throws InputError when there is nothing to draw or x/y lengths differ.
void write_line_chart(std::ostream& out, const std::vector<Series>& series, const ChartLabels& labels,
                      int width = 720, int height = 440);

}  // namespace dw::cli
