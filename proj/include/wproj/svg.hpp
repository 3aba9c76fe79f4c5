#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace wproj {

/// Self-contained deterministic SVG line plot: fixed 800x600 viewport, no
/// timestamps, byte-identical output for identical input.
struct PlotSeries {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
};

struct ReferenceSlope {
  double slope = 0.0;
  std::string label;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_log = false;
  std::vector<PlotSeries> series;
  std::vector<ReferenceSlope> reference_slopes;  // drawn as guide lines
};

void emit_plot(const PlotSpec& spec, const std::filesystem::path& file);

}  // namespace wproj
