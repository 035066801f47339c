#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <sfa/graph.hpp>
#include <sfa/io.hpp>

// Small static SVG writer for the report figures. No dependencies, stable
// output bytes for identical inputs.

namespace sfa::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
};

namespace detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct Frame {
  double width = 760, height = 420;
  double left = 70, right = 20, top = 40, bottom = 50;
  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;

  double px(double x) const {
    const double span = x_max - x_min;
    return left + (span == 0.0 ? 0.5 : (x - x_min) / span) * (width - left - right);
  }
  double py(double y) const {
    const double span = y_max - y_min;
    return height - bottom - (span == 0.0 ? 0.5 : (y - y_min) / span) * (height - top - bottom);
  }
};

inline void pad_range(double& lo, double& hi) {
  if (lo == hi) {
    lo -= 1.0;
    hi += 1.0;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
}

inline std::string header(const Frame& f, const std::string& title) {
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(f.width) + "\" height=\"" +
       num(f.height) + "\" viewBox=\"0 0 " + num(f.width) + " " + num(f.height) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(f.width / 2) + "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" + title + "</text>\n";
  return s;
}

inline std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  std::string s;
  const double x0 = f.left, x1 = f.width - f.right;
  const double y0 = f.height - f.bottom, y1 = f.top;
  s += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) + "\" y2=\"" + num(y0) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x0) + "\" y2=\"" + num(y1) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = f.x_min + (f.x_max - f.x_min) * i / 4.0;
    const double fy = f.y_min + (f.y_max - f.y_min) * i / 4.0;
    s += "<text x=\"" + num(f.px(fx)) + "\" y=\"" + num(y0 + 18) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + tick_label(fx) + "</text>\n";
    s += "<text x=\"" + num(x0 - 8) + "\" y=\"" + num(f.py(fy) + 4) + "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + tick_label(fy) + "</text>\n";
    s += "<line x1=\"" + num(x0) + "\" y1=\"" + num(f.py(fy)) + "\" x2=\"" + num(x1) + "\" y2=\"" + num(f.py(fy)) + "\" stroke=\"#dddddd\"/>\n";
  }
  s += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(f.height - 10) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + xlabel + "</text>\n";
  s += "<text x=\"16\" y=\"" + num((y0 + y1) / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " + num((y0 + y1) / 2) + ")\">" + ylabel + "</text>\n";
  return s;
}

}  // namespace detail

inline const std::vector<std::string>& palette() {
  static const std::vector<std::string> p = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                             "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return p;
}

inline void write_line_chart(const std::string& path, const std::string& title,
                             const std::string& xlabel, const std::string& ylabel,
                             std::vector<Series> series) {
  if (series.empty()) throw std::invalid_argument("svg: no series");
  detail::Frame f;
  f.x_min = f.y_min = std::numeric_limits<double>::infinity();
  f.x_max = f.y_max = -std::numeric_limits<double>::infinity();
  for (auto& s : series) {
    if (s.x.size() != s.y.size() || s.x.empty()) throw std::invalid_argument("svg: bad series " + s.name);
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      f.x_min = std::min(f.x_min, s.x[i]);
      f.x_max = std::max(f.x_max, s.x[i]);
      f.y_min = std::min(f.y_min, s.y[i]);
      f.y_max = std::max(f.y_max, s.y[i]);
    }
  }
  detail::pad_range(f.x_min, f.x_max);
  detail::pad_range(f.y_min, f.y_max);

  std::string out = detail::header(f, title) + detail::axes(f, xlabel, ylabel);
  for (std::size_t k = 0; k < series.size(); ++k) {
    auto& s = series[k];
    if (s.color.empty()) s.color = palette()[k % palette().size()];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i)
      pts += detail::num(f.px(s.x[i])) + "," + detail::num(f.py(s.y[i])) + " ";
    out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    const double ly = f.top + 16.0 * static_cast<double>(k);
    out += "<line x1=\"" + detail::num(f.width - f.right - 150) + "\" y1=\"" + detail::num(ly) +
           "\" x2=\"" + detail::num(f.width - f.right - 130) + "\" y2=\"" + detail::num(ly) +
           "\" stroke=\"" + s.color + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + detail::num(f.width - f.right - 124) + "\" y=\"" + detail::num(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + s.name + "</text>\n";
  }
  out += "</svg>\n";
  open_out(path) << out;
}

inline void write_bar_chart(const std::string& path, const std::string& title,
                            const std::string& ylabel, const std::vector<std::string>& labels,
                            const std::vector<double>& values) {
  if (labels.empty() || labels.size() != values.size()) throw std::invalid_argument("svg: bad bars");
  detail::Frame f;
  f.x_min = 0;
  f.x_max = static_cast<double>(labels.size());
  f.y_min = std::min(0.0, *std::min_element(values.begin(), values.end()));
  f.y_max = std::max(0.0, *std::max_element(values.begin(), values.end()));
  detail::pad_range(f.y_min, f.y_max);

  std::string out = detail::header(f, title);
  const double y0 = f.height - f.bottom;
  out += "<line x1=\"" + detail::num(f.left) + "\" y1=\"" + detail::num(y0) + "\" x2=\"" +
         detail::num(f.width - f.right) + "\" y2=\"" + detail::num(y0) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fy = f.y_min + (f.y_max - f.y_min) * i / 4.0;
    out += "<text x=\"" + detail::num(f.left - 8) + "\" y=\"" + detail::num(f.py(fy) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + detail::tick_label(fy) + "</text>\n";
    out += "<line x1=\"" + detail::num(f.left) + "\" y1=\"" + detail::num(f.py(fy)) + "\" x2=\"" +
           detail::num(f.width - f.right) + "\" y2=\"" + detail::num(f.py(fy)) + "\" stroke=\"#dddddd\"/>\n";
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double xc = f.px(static_cast<double>(i) + 0.5);
    const double w = (f.width - f.left - f.right) / static_cast<double>(labels.size()) * 0.6;
    const double ytop = f.py(std::max(values[i], 0.0));
    const double ybase = f.py(std::min(values[i], 0.0));
    out += "<rect x=\"" + detail::num(xc - w / 2) + "\" y=\"" + detail::num(ytop) + "\" width=\"" +
           detail::num(w) + "\" height=\"" + detail::num(std::max(1.0, ybase - ytop)) +
           "\" fill=\"" + palette()[i % palette().size()] + "\"/>\n";
    out += "<text x=\"" + detail::num(xc) + "\" y=\"" + detail::num(y0 + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + labels[i] + "</text>\n";
    out += "<text x=\"" + detail::num(xc) + "\" y=\"" + detail::num(ytop - 5) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + detail::tick_label(values[i]) + "</text>\n";
  }
  out += "<text x=\"16\" y=\"" + detail::num(f.height / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " +
         detail::num(f.height / 2) + ")\">" + ylabel + "</text>\n";
  out += "</svg>\n";
  open_out(path) << out;
}

// Sensors at their coordinates, coloured blue (low) to red (high); one
// optional highlighted vertex drawn with a black ring.
inline void write_scatter_map(const std::string& path, const std::string& title,
                              const std::vector<LonLat>& positions, const std::vector<double>& values,
                              int highlight = -1) {
  if (positions.empty() || positions.size() != values.size())
    throw std::invalid_argument("svg: bad scatter data");
  detail::Frame f;
  f.width = 560;
  f.height = 560;
  f.x_min = f.y_min = std::numeric_limits<double>::infinity();
  f.x_max = f.y_max = -std::numeric_limits<double>::infinity();
  for (const auto& p : positions) {
    f.x_min = std::min(f.x_min, p.lon);
    f.x_max = std::max(f.x_max, p.lon);
    f.y_min = std::min(f.y_min, p.lat);
    f.y_max = std::max(f.y_max, p.lat);
  }
  detail::pad_range(f.x_min, f.x_max);
  detail::pad_range(f.y_min, f.y_max);
  double v_lo = *std::min_element(values.begin(), values.end());
  double v_hi = *std::max_element(values.begin(), values.end());
  if (v_lo == v_hi) v_hi = v_lo + 1.0;

  std::string out = detail::header(f, title);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const double u = (values[i] - v_lo) / (v_hi - v_lo);
    const int r = static_cast<int>(std::lround(40 + 215 * u));
    const int b = static_cast<int>(std::lround(255 - 215 * u));
    char color[16];
    std::snprintf(color, sizeof(color), "#%02x50%02x", r, b);
    const double cx = f.px(positions[i].lon), cy = f.py(positions[i].lat);
    if (static_cast<int>(i) == highlight)
      out += "<circle cx=\"" + detail::num(cx) + "\" cy=\"" + detail::num(cy) +
             "\" r=\"11\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
    out += "<circle cx=\"" + detail::num(cx) + "\" cy=\"" + detail::num(cy) + "\" r=\"7\" fill=\"" +
           color + "\"/>\n";
    out += "<text x=\"" + detail::num(cx) + "\" y=\"" + detail::num(cy - 10) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"9\">" + std::to_string(i) + "</text>\n";
  }
  out += "<text x=\"" + detail::num(f.left) + "\" y=\"" + detail::num(f.height - 14) +
         "\" font-family=\"sans-serif\" font-size=\"11\">low " + detail::tick_label(v_lo) +
         " (blue) to high " + detail::tick_label(v_hi) + " (red)</text>\n";
  out += "</svg>\n";
  open_out(path) << out;
}

}  // namespace sfa::svg
