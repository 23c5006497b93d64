#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace ddrlab::harness {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void widen(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
}

void axes(std::ostringstream& out, const Frame& f, const std::string& title, const std::string& xl,
          const std::string& yl) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(title) << "</text>\n";
  out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kHeight - kBottom) << "\" x2=\"" << num(kWidth - kRight)
      << "\" y2=\"" << num(kHeight - kBottom) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft) << "\" y2=\""
      << num(kHeight - kBottom) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    out << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << num(kHeight - kBottom + 16)
        << "\" text-anchor=\"middle\">" << tick(xv) << "</text>\n";
    out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(f.py(yv) + 4) << "\" text-anchor=\"end\">"
        << tick(yv) << "</text>\n";
  }
  out << "<text x=\"" << num(kWidth / 2) << "\" y=\"" << num(kHeight - 10) << "\" text-anchor=\"middle\">"
      << escape(xl) << "</text>\n";
  out << "<text x=\"16\" y=\"" << num(kHeight / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << num(kHeight / 2) << ")\">" << escape(yl) << "</text>\n";
}

void draw_markers(std::ostringstream& out, const Frame& f, const std::vector<Marker>& markers) {
  for (const auto& m : markers) {
    if (m.x < f.x0 || m.x > f.x1) continue;
    out << "<line x1=\"" << num(f.px(m.x)) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(f.px(m.x))
        << "\" y2=\"" << num(kHeight - kBottom) << "\" stroke=\"" << m.color
        << "\" stroke-dasharray=\"4 3\"/>\n";
    out << "<text x=\"" << num(f.px(m.x) + 3) << "\" y=\"" << num(kTop + 12) << "\" fill=\"" << m.color << "\">"
        << escape(m.label) << "</text>\n";
  }
}

}  // namespace

std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<double>& x,
                          const std::vector<double>& y, const std::vector<Marker>& markers) {
  Frame f{0.0, 1.0, 0.0, 1.0};
  if (!x.empty()) {
    f.x0 = *std::min_element(x.begin(), x.end());
    f.x1 = *std::max_element(x.begin(), x.end());
    f.y0 = *std::min_element(y.begin(), y.end());
    f.y1 = *std::max_element(y.begin(), y.end());
  }
  widen(f.x0, f.x1);
  widen(f.y0, f.y1);
  const double pad = 0.05 * (f.y1 - f.y0);
  f.y0 -= pad;
  f.y1 += pad;
  std::ostringstream out;
  axes(out, f, title, x_label, y_label);
  out << "<polyline fill=\"none\" stroke=\"#2c6fbb\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) out << num(f.px(x[i])) << ',' << num(f.py(y[i])) << ' ';
  out << "\"/>\n";
  draw_markers(out, f, markers);
  out << "</svg>\n";
  return out.str();
}

std::string svg_histogram(const std::string& title, const std::string& x_label,
                          const std::vector<double>& values, double lo, double hi, int bins,
                          const std::vector<Marker>& markers) {
  bins = std::max(bins, 1);
  widen(lo, hi);
  std::vector<int> counts(bins, 0);
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
    counts[std::clamp(b, 0, bins - 1)]++;
  }
  const int top = std::max(1, *std::max_element(counts.begin(), counts.end()));
  Frame f{lo, hi, 0.0, static_cast<double>(top)};
  std::ostringstream out;
  axes(out, f, title, x_label, "count");
  const double w = (hi - lo) / bins;
  for (int b = 0; b < bins; ++b) {
    if (counts[b] == 0) continue;
    const double x0 = f.px(lo + b * w);
    const double x1 = f.px(lo + (b + 1) * w);
    const double y = f.py(counts[b]);
    out << "<rect x=\"" << num(x0) << "\" y=\"" << num(y) << "\" width=\"" << num(std::max(x1 - x0 - 1.0, 0.5))
        << "\" height=\"" << num(kHeight - kBottom - y) << "\" fill=\"#2c6fbb\"/>\n";
  }
  draw_markers(out, f, markers);
  out << "</svg>\n";
  return out.str();
}

}  // namespace ddrlab::harness
