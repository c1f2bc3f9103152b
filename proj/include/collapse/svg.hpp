#pragma once

#include <string>
#include <vector>

// Minimal self-contained SVG line plots: panels on a grid, polylines,
// markers and step histograms. No external fonts, scripts or stylesheets.
namespace collapse::svg {

namespace color {
inline constexpr const char* trace = "#e3b505";
inline constexpr const char* mean = "#d62728";
inline constexpr const char* formula = "#1f77b4";
inline constexpr const char* bound = "#d62728";
inline constexpr const char* neutral = "#444444";
} // namespace color

enum class Style { line, markers, step };

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = color::neutral;
  double width = 1.5;
  double opacity = 1.0;
  bool dashed = false;
  Style style = Style::line;
  std::string label; // shown in the legend when non-empty
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<Series> series;
};

struct Figure {
  std::string title;
  /// Embedded as a comment and in <metadata>.
  std::string config_hash;
  int columns = 1;
  double panel_width = 320.0;
  double panel_height = 240.0;
  std::vector<Panel> panels;
};

/// Trace series in the figure's replicate-trace style.
Series trace(std::vector<double> x, std::vector<double> y);
Series mean(std::vector<double> x, std::vector<double> y, std::string label = "empirical mean");
Series formula(std::vector<double> x, std::vector<double> y, std::string label = "formula");
Series bound(std::vector<double> x, std::vector<double> y, std::string label = "bound");

/// 1, 2, ..., n as doubles.
std::vector<double> generations(std::size_t n);

std::string render(const Figure& figure);

} // namespace collapse::svg
