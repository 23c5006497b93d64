#pragma once

#include <string>
#include <vector>

namespace ddrlab::harness {

struct Marker {
  double x = 0.0;
  std::string label;
  std::string color = "#c0392b";
};

/// Static line plot with optional vertical markers.
std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<double>& x,
                          const std::vector<double>& y, const std::vector<Marker>& markers = {});

/// Histogram over [lo, hi] with the given bin count; markers as above.
std::string svg_histogram(const std::string& title, const std::string& x_label,
                          const std::vector<double>& values, double lo, double hi, int bins,
                          const std::vector<Marker>& markers = {});

}  // namespace ddrlab::harness
