#pragma once

#include <optional>
#include <string>
#include <vector>

namespace sfo {

enum class Marker { None, Circle, Cross };

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, y), positive
  std::string color = "#1f77b4";
  bool dashed = false;
  Marker marker = Marker::Circle;
  bool draw_line = true;
};

struct VerticalMark {
  double x = 0.0;
  std::string label;
  std::string color = "#555555";
};

// Self-contained log-log SVG line chart; x ticks at powers of two, y ticks
// at powers of ten. Deterministic output for identical inputs.
struct LogLogChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<VerticalMark> vmarks;
  int width = 860;
  int height = 540;

  std::string render() const;  // throws std::invalid_argument when empty
};

}  // namespace sfo
