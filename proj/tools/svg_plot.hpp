// Minimal SVG line charts for the reconstruction overlay and sweep curves.
#pragma once

#include <string>
#include <vector>

namespace qcs::app {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

std::string render_svg(const Plot& plot);

}  // namespace qcs::app
