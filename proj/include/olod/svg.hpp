#pragma once

#include <string>
#include <utility>
#include <vector>

namespace olod {

// Minimal deterministic SVG line charts for the experiment outputs; no
// external plotting dependency, identical bytes for identical data.
struct ChartSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // sorted by x by caller
};

struct LineChart {
  std::string title, xlabel, ylabel;
  bool logX = false, logY = false;
  std::vector<ChartSeries> series;
};

std::string render_svg(const LineChart& chart);
void write_svg(const LineChart& chart, const std::string& path);

}  // namespace olod
