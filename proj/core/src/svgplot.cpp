/*
 Copyright 2026 The Locoforge Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include "locoforge/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace locoforge {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 18.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 48.0;

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  bool valid() const { return lo <= hi; }

  /// Pads degenerate or empty spans so the affine map below stays finite.
  void widen() {
    if (!valid()) {
      lo = 0.0;
      hi = 1.0;
    } else if (hi - lo < 1e-12) {
      const double pad = std::max(1.0, std::abs(lo));
      lo -= 0.5 * pad;
      hi += 0.5 * pad;
    }
  }
};

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
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

std::string format_tick(double v) {
  if (v == 0.0) return "0";
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

/// Tick positions on the 1-2-5 ladder covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target) {
  const double span = hi - lo;
  const double raw = span / std::max(1, target);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (const double mult : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * mult >= raw) {
      step = mag * mult;
      break;
    }
  }
  std::vector<double> ticks;
  double t = std::ceil(lo / step) * step;
  for (; t <= hi + 0.5 * step; t += step) {
    if (std::abs(t) < 1e-12 * step) t = 0.0;
    ticks.push_back(t);
    if (ticks.size() > 32) break;
  }
  return ticks;
}

class SvgCanvas {
 public:
  SvgCanvas(const PlotOptions& opts) : opts_(opts) {
    body_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width
          << "\" height=\"" << opts.height << "\" viewBox=\"0 0 " << opts.width << " "
          << opts.height << "\">\n";
    body_ << "<rect width=\"" << opts.width << "\" height=\"" << opts.height
          << "\" fill=\"white\"/>\n";
  }

  double plot_w() const { return opts_.width - kMarginLeft - kMarginRight; }
  double plot_h() const { return opts_.height - kMarginTop - kMarginBottom; }
  double map_x(double v, const Range& r) const {
    return kMarginLeft + (v - r.lo) / (r.hi - r.lo) * plot_w();
  }
  double map_y(double v, const Range& r) const {
    return kMarginTop + (r.hi - v) / (r.hi - r.lo) * plot_h();
  }

  void frame_and_axes(const Range& xr, const Range& yr, bool x_ticks) {
    body_ << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\""
          << plot_w() << "\" height=\"" << plot_h()
          << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
    for (const double t : nice_ticks(yr.lo, yr.hi, 6)) {
      const double y = map_y(t, yr);
      body_ << "<line x1=\"" << kMarginLeft << "\" y1=\"" << y << "\" x2=\""
            << opts_.width - kMarginRight << "\" y2=\"" << y
            << "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
      body_ << "<text x=\"" << kMarginLeft - 6 << "\" y=\"" << y + 4
            << "\" font-size=\"11\" text-anchor=\"end\" fill=\"#333\">" << format_tick(t)
            << "</text>\n";
    }
    if (x_ticks) {
      for (const double t : nice_ticks(xr.lo, xr.hi, 8)) {
        const double x = map_x(t, xr);
        body_ << "<line x1=\"" << x << "\" y1=\"" << kMarginTop << "\" x2=\"" << x
              << "\" y2=\"" << opts_.height - kMarginBottom
              << "\" stroke=\"#eee\" stroke-width=\"1\"/>\n";
        body_ << "<text x=\"" << x << "\" y=\"" << opts_.height - kMarginBottom + 16
              << "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333\">" << format_tick(t)
              << "</text>\n";
      }
    }
    if (!opts_.title.empty())
      body_ << "<text x=\"" << opts_.width / 2.0 << "\" y=\"" << kMarginTop - 14
            << "\" font-size=\"15\" text-anchor=\"middle\" fill=\"#111\">"
            << escape_xml(opts_.title) << "</text>\n";
    if (!opts_.x_label.empty())
      body_ << "<text x=\"" << kMarginLeft + plot_w() / 2.0 << "\" y=\""
            << opts_.height - 10 << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#111\">"
            << escape_xml(opts_.x_label) << "</text>\n";
    if (!opts_.y_label.empty())
      body_ << "<text x=\"16\" y=\"" << kMarginTop + plot_h() / 2.0
            << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#111\" transform=\"rotate(-90 16 "
            << kMarginTop + plot_h() / 2.0 << ")\">" << escape_xml(opts_.y_label)
            << "</text>\n";
  }

  void raw(const std::string& s) { body_ << s; }
  std::ostringstream& out() { return body_; }

  void save(const std::string& path) {
    body_ << "</svg>\n";
    std::ofstream f(path);
    if (!f) throw std::runtime_error("plot: cannot write '" + path + "'");
    f << body_.str();
    if (!f) throw std::runtime_error("plot: cannot write '" + path + "'");
  }

 private:
  PlotOptions opts_;
  std::ostringstream body_;
};

}  // namespace

void write_line_plot(const std::string& path, const std::vector<PlotSeries>& series,
                     const PlotOptions& opts) {
  if (series.empty()) throw std::invalid_argument("plot: no series given");

  Range xr, yr;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size())
      throw std::invalid_argument("plot: series '" + s.label + "' has mismatched x/y lengths");
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xr.include(s.x[i]);
      yr.include(s.y[i]);
    }
  }
  if (!xr.valid()) throw std::invalid_argument("plot: no finite points in any series");
  xr.widen();
  yr.widen();

  SvgCanvas canvas(opts);
  canvas.frame_and_axes(xr, yr, true);

  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % kPaletteSize];
    std::ostringstream points;
    bool open = false;
    auto flush = [&]() {
      if (open)
        canvas.out() << "<polyline fill=\"none\" stroke=\"" << color
                     << "\" stroke-width=\"1.6\" points=\"" << points.str() << "\"/>\n";
      points.str("");
      open = false;
    };
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        flush();
        continue;
      }
      points << canvas.map_x(s.x[i], xr) << "," << canvas.map_y(s.y[i], yr) << " ";
      open = true;
    }
    flush();
  }

  const bool want_legend =
      series.size() > 1 || (series.size() == 1 && !series[0].label.empty());
  if (want_legend) {
    const double x0 = kMarginLeft + 10;
    double y = kMarginTop + 16;
    for (size_t si = 0; si < series.size(); ++si) {
      const char* color = kPalette[si % kPaletteSize];
      canvas.out() << "<line x1=\"" << x0 << "\" y1=\"" << y - 4 << "\" x2=\"" << x0 + 22
                   << "\" y2=\"" << y - 4 << "\" stroke=\"" << color
                   << "\" stroke-width=\"2\"/>\n";
      canvas.out() << "<text x=\"" << x0 + 28 << "\" y=\"" << y
                   << "\" font-size=\"12\" fill=\"#111\">" << escape_xml(series[si].label)
                   << "</text>\n";
      y += 17;
    }
  }

  canvas.save(path);
}

void write_bar_plot(const std::string& path, const std::vector<PlotBar>& bars,
                    const PlotOptions& opts) {
  if (bars.empty()) throw std::invalid_argument("plot: no bars given");
  for (const auto& b : bars)
    if (!std::isfinite(b.value))
      throw std::invalid_argument("plot: bar '" + b.label + "' has a non-finite value");

  Range yr;
  yr.include(0.0);
  for (const auto& b : bars) yr.include(b.value);
  yr.widen();

  SvgCanvas canvas(opts);
  Range xr;
  xr.lo = 0.0;
  xr.hi = 1.0;
  canvas.frame_and_axes(xr, yr, false);

  const double slot = canvas.plot_w() / static_cast<double>(bars.size());
  const double bar_w = slot * 0.6;
  for (size_t i = 0; i < bars.size(); ++i) {
    const double cx = kMarginLeft + (static_cast<double>(i) + 0.5) * slot;
    const double y_val = canvas.map_y(bars[i].value, yr);
    const double y_zero = canvas.map_y(std::clamp(0.0, yr.lo, yr.hi), yr);
    const double top = std::min(y_val, y_zero);
    const double h = std::abs(y_zero - y_val);
    canvas.out() << "<rect x=\"" << cx - bar_w / 2 << "\" y=\"" << top << "\" width=\""
                 << bar_w << "\" height=\"" << h << "\" fill=\""
                 << kPalette[i % kPaletteSize] << "\"/>\n";
    canvas.out() << "<text x=\"" << cx << "\" y=\"" << opts.height - kMarginBottom + 16
                 << "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333\">"
                 << escape_xml(bars[i].label) << "</text>\n";
  }

  canvas.save(path);
}

}  // namespace locoforge
