#include "wproj/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "wproj/errors.hpp"

namespace wproj {

namespace {

constexpr double kWidth = 800.0, kHeight = 600.0;
constexpr double kMarginL = 70.0, kMarginR = 20.0, kMarginT = 40.0, kMarginB = 50.0;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void emit_plot(const PlotSpec& spec, const std::filesystem::path& file) {
  if (spec.series.empty()) throw InputError("emit_plot: no series");
  constexpr double inf = std::numeric_limits<double>::infinity();
  double xmin = inf, xmax = -inf, ymin = inf, ymax = -inf;
  auto tx = [&](double v) { return spec.log_log ? std::log10(v) : v; };
  for (const PlotSeries& s : spec.series) {
    if (s.xs.size() != s.ys.size() || s.xs.empty()) {
      throw InputError("emit_plot: series \"" + s.label + "\" is empty or ragged");
    }
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      double x = tx(s.xs[i]), y = tx(s.ys[i]);
      if (!std::isfinite(x) || !std::isfinite(y)) {
        throw InputError("emit_plot: non-finite coordinate in \"" + s.label + "\"");
      }
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax == xmin) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax == ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double plot_w = kWidth - kMarginL - kMarginR;
  const double plot_h = kHeight - kMarginT - kMarginB;
  auto px = [&](double x) { return kMarginL + (tx(x) - xmin) / (xmax - xmin) * plot_w; };
  auto py = [&](double y) { return kHeight - kMarginB - (tx(y) - ymin) / (ymax - ymin) * plot_h; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
         "viewBox=\"0 0 800 600\">\n";
  svg += "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
  // Axes.
  svg += "<line x1=\"" + num(kMarginL) + "\" y1=\"" + num(kHeight - kMarginB) +
         "\" x2=\"" + num(kWidth - kMarginR) + "\" y2=\"" + num(kHeight - kMarginB) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + num(kMarginL) + "\" y1=\"" + num(kMarginT) + "\" x2=\"" +
         num(kMarginL) + "\" y2=\"" + num(kHeight - kMarginB) + "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" "
         "font-size=\"16\">" + esc(spec.title) + "</text>\n";
  svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 12) +
         "\" text-anchor=\"middle\" font-size=\"12\">" + esc(spec.x_label) +
         (spec.log_log ? " (log10)" : "") + "</text>\n";
  svg += "<text x=\"16\" y=\"" + num(kHeight / 2) +
         "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " +
         num(kHeight / 2) + ")\">" + esc(spec.y_label) +
         (spec.log_log ? " (log10)" : "") + "</text>\n";

  // Reference guide lines, anchored at the first series' first point.
  for (std::size_t r = 0; r < spec.reference_slopes.size(); ++r) {
    const ReferenceSlope& ref = spec.reference_slopes[r];
    double x0 = xmin, x1 = xmax;
    double yc = tx(spec.series[0].ys[0]);
    double xc = tx(spec.series[0].xs[0]);
    double y0 = yc + ref.slope * (x0 - xc);
    double y1 = yc + ref.slope * (x1 - xc);
    auto pxr = [&](double x) { return kMarginL + (x - xmin) / (xmax - xmin) * plot_w; };
    auto pyr = [&](double y) {
      double clamped = std::clamp(y, ymin, ymax);
      return kHeight - kMarginB - (clamped - ymin) / (ymax - ymin) * plot_h;
    };
    svg += "<line class=\"refslope\" x1=\"" + num(pxr(x0)) + "\" y1=\"" + num(pyr(y0)) +
           "\" x2=\"" + num(pxr(x1)) + "\" y2=\"" + num(pyr(y1)) +
           "\" stroke=\"#999999\" stroke-dasharray=\"6,4\"/>\n";
    svg += "<text x=\"" + num(kWidth - kMarginR - 4) + "\" y=\"" +
           num(kMarginT + 16.0 * (static_cast<double>(r) + 1.0)) +
           "\" text-anchor=\"end\" font-size=\"11\" fill=\"#666666\">" +
           esc(ref.label) + "</text>\n";
  }

  for (std::size_t s = 0; s < spec.series.size(); ++s) {
    const PlotSeries& ser = spec.series[s];
    const char* color = kColors[s % (sizeof(kColors) / sizeof(kColors[0]))];
    std::string pts;
    for (std::size_t i = 0; i < ser.xs.size(); ++i) {
      pts += num(px(ser.xs[i])) + "," + num(py(ser.ys[i]));
      if (i + 1 < ser.xs.size()) pts += " ";
    }
    svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"/>\n";
    for (std::size_t i = 0; i < ser.xs.size(); ++i) {
      svg += "<circle cx=\"" + num(px(ser.xs[i])) + "\" cy=\"" + num(py(ser.ys[i])) +
             "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    svg += "<text x=\"" + num(kMarginL + 8) + "\" y=\"" +
           num(kMarginT + 16.0 * (static_cast<double>(s) + 1.0)) +
           "\" font-size=\"11\" fill=\"" + color + "\">" + esc(ser.label) + "</text>\n";
  }
  svg += "</svg>\n";

  std::ofstream out(file, std::ios::binary);
  if (!out) throw InputError("emit_plot: cannot write " + file.string());
  out << svg;
}

}  // namespace wproj
