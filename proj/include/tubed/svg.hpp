#pragma once

// Standalone SVG plots with a fixed layout: growth curves, 2-d scatter
// projections and histograms. Output depends only on the input data.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace tubed {

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

namespace detail {

constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
inline const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

inline std::string tick(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Maps data ranges onto the plot area; degenerate ranges are widened.
struct Frame {
  double x0, x1, y0, y1;

  Frame(double xa, double xb, double ya, double yb) : x0(xa), x1(xb), y0(ya), y1(yb) {
    if (!(x1 > x0)) x0 -= 0.5, x1 = x0 + 1.0;
    if (!(y1 > y0)) y0 -= 0.5, y1 = y0 + 1.0;
  }
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

inline std::string header(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) +
         "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
         "<text x=\"" + fmt(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
         escape(title) + "</text>\n";
}

inline std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  std::string s;
  s += "<g stroke=\"black\" fill=\"none\"><rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" +
       fmt(kWidth - kLeft - kRight) + "\" height=\"" + fmt(kHeight - kTop - kBottom) + "\"/></g>\n";
  s += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0, yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    s += "<text x=\"" + fmt(f.px(xv)) + "\" y=\"" + fmt(kHeight - kBottom + 16) + "\" text-anchor=\"middle\">" +
         tick(xv) + "</text>\n";
    s += "<text x=\"" + fmt(kLeft - 6) + "\" y=\"" + fmt(f.py(yv) + 4) + "\" text-anchor=\"end\">" + tick(yv) +
         "</text>\n";
  }
  s += "<text x=\"" + fmt((kLeft + kWidth - kRight) / 2) + "\" y=\"" + fmt(kHeight - 12) +
       "\" text-anchor=\"middle\">" + escape(xlabel) + "</text>\n";
  s += "<text x=\"16\" y=\"" + fmt((kTop + kHeight - kBottom) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       fmt((kTop + kHeight - kBottom) / 2) + ")\">" + escape(ylabel) + "</text>\n</g>\n";
  return s;
}

inline std::string empty_plot(const std::string& title) {
  return header(title) + "<text x=\"" + fmt(kWidth / 2) + "\" y=\"" + fmt(kHeight / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" fill=\"#666\">no data</text>\n</svg>\n";
}

}  // namespace detail

/// Ball size against radius, one polyline per series; `log_y` plots log10.
inline std::string growth_curve_svg(const std::vector<PlotSeries>& series, bool log_y = true,
                                    const std::string& title = "ball growth") {
  std::vector<PlotSeries> data;
  for (const auto& s : series) {
    PlotSeries t{s.name, {}};
    for (const auto& [x, y] : s.points)
      if (std::isfinite(x) && std::isfinite(y) && (!log_y || y > 0)) t.points.emplace_back(x, log_y ? std::log10(y) : y);
    if (!t.points.empty()) data.push_back(std::move(t));
  }
  if (data.empty()) return detail::empty_plot(title);
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : data)
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x), x1 = std::max(x1, x);
      y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  const detail::Frame f(x0, x1, y0, y1);
  std::string out = detail::header(title) + detail::axes(f, "R", log_y ? "log10 |B(x, R)|" : "|B(x, R)|");
  for (std::size_t i = 0; i < data.size(); ++i) {
    const char* color = detail::kPalette[i % 6];
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < data[i].points.size(); ++k)
      out += (k ? " " : "") + detail::fmt(f.px(data[i].points[k].first)) + "," + detail::fmt(f.py(data[i].points[k].second));
    out += "\"/>\n";
    out += "<text x=\"" + detail::fmt(detail::kLeft + 10) + "\" y=\"" + detail::fmt(detail::kTop + 16 + 16 * i) +
           "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" + color + "\">" + detail::escape(data[i].name) +
           "</text>\n";
  }
  return out + "</svg>\n";
}

/// Points projected onto two coordinates.
inline std::string scatter_svg(const std::vector<std::pair<double, double>>& points,
                               const std::string& title = "embedding projection", const std::string& xlabel = "x0",
                               const std::string& ylabel = "x1") {
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : points)
    if (std::isfinite(p.first) && std::isfinite(p.second)) pts.push_back(p);
  if (pts.empty()) return detail::empty_plot(title);
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& [x, y] : pts) {
    x0 = std::min(x0, x), x1 = std::max(x1, x);
    y0 = std::min(y0, y), y1 = std::max(y1, y);
  }
  const detail::Frame f(x0, x1, y0, y1);
  std::string out = detail::header(title) + detail::axes(f, xlabel, ylabel) + "<g fill=\"#1f77b4\" fill-opacity=\"0.6\">\n";
  for (const auto& [x, y] : pts) out += "<circle cx=\"" + detail::fmt(f.px(x)) + "\" cy=\"" + detail::fmt(f.py(y)) + "\" r=\"1.5\"/>\n";
  return out + "</g>\n</svg>\n";
}

/// Bars over equal bins of [lo, hi).
inline std::string histogram_svg(const std::vector<std::size_t>& counts, double lo, double hi,
                                 const std::string& title = "distortion ratio", const std::string& xlabel = "log10 ratio") {
  std::size_t peak = 0;
  for (auto c : counts) peak = std::max(peak, c);
  if (counts.empty() || peak == 0) return detail::empty_plot(title);
  const detail::Frame f(lo, hi, 0.0, static_cast<double>(peak));
  std::string out = detail::header(title) + detail::axes(f, xlabel, "count") + "<g fill=\"#2ca02c\">\n";
  const double w = (hi - lo) / static_cast<double>(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    const double a = lo + w * i, top = f.py(static_cast<double>(counts[i]));
    out += "<rect x=\"" + detail::fmt(f.px(a)) + "\" y=\"" + detail::fmt(top) + "\" width=\"" +
           detail::fmt(f.px(a + w) - f.px(a)) + "\" height=\"" + detail::fmt(f.py(0.0) - top) + "\"/>\n";
  }
  return out + "</g>\n</svg>\n";
}

}  // namespace tubed
