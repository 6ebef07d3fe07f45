#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace graspid::svg {

/// Minimal static SVG chart emitter. Output is byte-stable for identical
/// input (fixed formatting, no timestamps).

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

/// One violin: a distribution of values drawn at a categorical x slot.
struct Violin {
  std::string label;
  std::vector<double> values;
  std::string color = "#1f77b4";
};

namespace detail {

inline const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

struct Frame {
  double width = 640, height = 420;
  double left = 70, right = 20, top = 40, bottom = 50;
  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;

  double px(double x) const {
    return left + (x - x_min) / (x_max - x_min) * (width - left - right);
  }
  double py(double y) const {
    return height - bottom - (y - y_min) / (y_max - y_min) * (height - top - bottom);
  }
};

inline void open_svg(std::ostream& out, const Frame& f, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width
      << "\" height=\"" << f.height << "\" viewBox=\"0 0 " << f.width << " " << f.height
      << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << f.width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";
}

inline void axes(std::ostream& out, const Frame& f, const std::string& x_label,
                 const std::string& y_label, int ticks = 5) {
  out << "<line x1=\"" << f.left << "\" y1=\"" << f.height - f.bottom << "\" x2=\""
      << f.width - f.right << "\" y2=\"" << f.height - f.bottom
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << f.left << "\" y1=\"" << f.top << "\" x2=\"" << f.left
      << "\" y2=\"" << f.height - f.bottom << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= ticks; ++i) {
    double yv = f.y_min + (f.y_max - f.y_min) * i / ticks;
    double yp = f.py(yv);
    out << "<line x1=\"" << f.left - 4 << "\" y1=\"" << fmt(yp) << "\" x2=\"" << f.left
        << "\" y2=\"" << fmt(yp) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << f.left - 8 << "\" y=\"" << fmt(yp + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt(yv) << "</text>\n";
  }
  out << "<text x=\"" << (f.left + f.width - f.right) / 2 << "\" y=\""
      << f.height - 10 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"12\">" << x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << (f.top + f.height - f.bottom) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 16 " << (f.top + f.height - f.bottom) / 2 << ")\">"
      << y_label << "</text>\n";
}

}  // namespace detail

/// Line chart with one polyline per series and a simple legend.
inline void line_chart(std::ostream& out, const std::vector<Series>& series,
                       const std::string& title, const std::string& x_label,
                       const std::string& y_label) {
  detail::Frame f;
  f.x_min = 1e300; f.x_max = -1e300; f.y_min = 0.0; f.y_max = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      f.x_min = std::min(f.x_min, s.x[i]);
      f.x_max = std::max(f.x_max, s.x[i]);
      f.y_max = std::max(f.y_max, s.y[i]);
    }
  if (f.x_max <= f.x_min) f.x_max = f.x_min + 1;
  if (f.y_max <= f.y_min) f.y_max = f.y_min + 1;
  f.y_max *= 1.05;
  detail::open_svg(out, f, title);
  detail::axes(out, f, x_label, y_label);
  for (const auto& s : series) {
    // x ticks from the first series' points
    if (&s == &series.front())
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        double xp = f.px(s.x[i]);
        out << "<line x1=\"" << fmt(xp) << "\" y1=\"" << f.height - f.bottom
            << "\" x2=\"" << fmt(xp) << "\" y2=\"" << f.height - f.bottom + 4
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt(xp) << "\" y=\"" << f.height - f.bottom + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt(s.x[i]) << "</text>\n";
      }
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.8\"";
    if (s.dashed) out << " stroke-dasharray=\"6 4\"";
    out << " points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      out << fmt(f.px(s.x[i])) << "," << fmt(f.py(s.y[i])) << " ";
    out << "\"/>\n";
  }
  double ly = f.top + 4;
  for (const auto& s : series) {
    out << "<line x1=\"" << f.width - f.right - 150 << "\" y1=\"" << fmt(ly)
        << "\" x2=\"" << f.width - f.right - 126 << "\" y2=\"" << fmt(ly)
        << "\" stroke=\"" << s.color << "\" stroke-width=\"1.8\"";
    if (s.dashed) out << " stroke-dasharray=\"6 4\"";
    out << "/>\n";
    out << "<text x=\"" << f.width - f.right - 120 << "\" y=\"" << fmt(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
    ly += 16;
  }
  out << "</svg>\n";
}

/// Violin chart: a mirrored Gaussian-kernel density per slot, plus a median
/// tick. Bandwidth follows Silverman's rule on each sample.
inline void violin_chart(std::ostream& out, const std::vector<Violin>& violins,
                         const std::string& title, const std::string& y_label) {
  detail::Frame f;
  f.width = std::max(640.0, 90.0 * violins.size() + 90.0);
  f.y_min = 0.0;
  f.y_max = 1.0;
  for (const auto& v : violins)
    for (double val : v.values) f.y_max = std::max(f.y_max, val);
  f.y_max *= 1.1;
  f.x_min = 0.0;
  f.x_max = static_cast<double>(violins.size());
  detail::open_svg(out, f, title);
  detail::axes(out, f, "", y_label);
  for (std::size_t vi = 0; vi < violins.size(); ++vi) {
    const auto& v = violins[vi];
    if (v.values.empty()) continue;
    std::vector<double> sorted = v.values;
    std::sort(sorted.begin(), sorted.end());
    double n = static_cast<double>(sorted.size());
    double mean = 0.0;
    for (double x : sorted) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : sorted) var += (x - mean) * (x - mean);
    double sd = std::sqrt(var / std::max(1.0, n - 1.0));
    double bw = std::max(0.25, 1.06 * sd * std::pow(n, -0.2));
    double lo = std::max(f.y_min, sorted.front() - 2 * bw);
    double hi = sorted.back() + 2 * bw;
    const int kSteps = 60;
    std::vector<double> ys(kSteps + 1), dens(kSteps + 1);
    double dmax = 0.0;
    for (int i = 0; i <= kSteps; ++i) {
      double y = lo + (hi - lo) * i / kSteps;
      double d = 0.0;
      for (double x : sorted) {
        double u = (y - x) / bw;
        d += std::exp(-0.5 * u * u);
      }
      ys[i] = y;
      dens[i] = d;
      dmax = std::max(dmax, d);
    }
    double cx = f.px(static_cast<double>(vi) + 0.5);
    double half_width = 36.0;
    out << "<path fill=\"" << v.color << "\" fill-opacity=\"0.55\" stroke=\"" << v.color
        << "\" d=\"M";
    for (int i = 0; i <= kSteps; ++i)
      out << fmt(cx + dens[i] / dmax * half_width) << " " << fmt(f.py(ys[i]))
          << (i < kSteps ? " L" : " ");
    for (int i = kSteps; i >= 0; --i)
      out << "L" << fmt(cx - dens[i] / dmax * half_width) << " " << fmt(f.py(ys[i]))
          << " ";
    out << "Z\"/>\n";
    double median = sorted.size() % 2 == 1
                        ? sorted[sorted.size() / 2]
                        : (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]) / 2.0;
    out << "<line x1=\"" << fmt(cx - half_width) << "\" y1=\"" << fmt(f.py(median))
        << "\" x2=\"" << fmt(cx + half_width) << "\" y2=\"" << fmt(f.py(median))
        << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << fmt(cx) << "\" y=\"" << f.height - f.bottom + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << v.label << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace graspid::svg
