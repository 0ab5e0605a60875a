#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "dcsgl/train.hpp"

namespace dcsgl {
namespace {

struct Series {
  std::string label;
  std::string color;
  std::vector<std::pair<double, double>> points;
};

std::string fmt(double v, const char* f = "%.2f") {
  char buf[32];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// One panel of polylines with a frame, 5 ticks per axis and a legend.
void panel(std::string& svg, double x0, double y0, double w, double h, const std::string& title,
           const std::vector<Series>& series, int max_epoch) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const double xmax = std::max(1, max_epoch);
  auto px = [&](double x) { return x0 + w * (x - 1.0) / std::max(1.0, xmax - 1.0); };
  auto py = [&](double y) { return y0 + h - h * (y - lo) / (hi - lo); };

  svg += "<rect x=\"" + fmt(x0) + "\" y=\"" + fmt(y0) + "\" width=\"" + fmt(w) + "\" height=\"" + fmt(h) +
         "\" fill=\"none\" stroke=\"#444\"/>\n";
  svg += "<text x=\"" + fmt(x0) + "\" y=\"" + fmt(y0 - 8) + "\" font-size=\"13\">" + title + "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    double yv = lo + (hi - lo) * t / 4.0;
    double xv = 1.0 + (xmax - 1.0) * t / 4.0;
    svg += "<line x1=\"" + fmt(x0 - 4) + "\" y1=\"" + fmt(py(yv)) + "\" x2=\"" + fmt(x0) + "\" y2=\"" + fmt(py(yv)) +
           "\" stroke=\"#444\"/>\n";
    svg += "<text x=\"" + fmt(x0 - 6) + "\" y=\"" + fmt(py(yv) + 4) + "\" font-size=\"10\" text-anchor=\"end\">" +
           fmt(yv, "%.3g") + "</text>\n";
    svg += "<line x1=\"" + fmt(px(xv)) + "\" y1=\"" + fmt(y0 + h) + "\" x2=\"" + fmt(px(xv)) + "\" y2=\"" +
           fmt(y0 + h + 4) + "\" stroke=\"#444\"/>\n";
    svg += "<text x=\"" + fmt(px(xv)) + "\" y=\"" + fmt(y0 + h + 16) + "\" font-size=\"10\" text-anchor=\"middle\">" +
           fmt(std::round(xv), "%.0f") + "</text>\n";
  }
  double ly = y0 + 14;
  for (const auto& s : series) {
    if (s.points.empty()) continue;
    svg += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : s.points) svg += fmt(px(x)) + "," + fmt(py(y)) + " ";
    svg += "\"/>\n";
    svg += "<text x=\"" + fmt(x0 + w - 6) + "\" y=\"" + fmt(ly) + "\" font-size=\"11\" text-anchor=\"end\" fill=\"" +
           s.color + "\">" + s.label + "</text>\n";
    ly += 14;
  }
}

}  // namespace

std::string render_curves_svg(const TrainReport& report) {
  Series lg{"train loss_g", "#1f77b4", {}}, la{"train loss_a", "#d62728", {}};
  Series at{"train accuracy", "#1f77b4", {}}, av{"val accuracy", "#2ca02c", {}};
  int max_epoch = 1;
  for (const auto& r : report.rows) {
    if (r.split == SplitName::Test) continue;
    max_epoch = std::max(max_epoch, r.epoch);
    if (r.split == SplitName::Train) {
      if (std::isfinite(r.loss_g)) lg.points.emplace_back(r.epoch, r.loss_g);
      if (r.loss_a) la.points.emplace_back(r.epoch, *r.loss_a);
      at.points.emplace_back(r.epoch, r.accuracy);
    } else {
      av.points.emplace_back(r.epoch, r.accuracy);
    }
  }
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"560\" viewBox=\"0 0 720 560\">\n"
      "<rect width=\"720\" height=\"560\" fill=\"white\"/>\n";
  panel(svg, 70, 40, 620, 200, "loss per sample", {lg, la}, max_epoch);
  panel(svg, 70, 310, 620, 200, "accuracy", {at, av}, max_epoch);
  svg += "<text x=\"380\" y=\"548\" font-size=\"12\" text-anchor=\"middle\">epoch</text>\n</svg>\n";
  return svg;
}

}  // namespace dcsgl
