// Self-contained SVG rendering of a two-time-point trade-off curve. All
// coordinates are printed with fixed precision so output is byte-stable.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>

#include "evtv/io_report.hpp"

namespace evtv {

namespace {

constexpr double kWidth = 560.0;
constexpr double kHeight = 520.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 30.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 70.0;

void appendf(std::string& out, const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  const int len = std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  if (len > 0) out.append(buf, static_cast<std::size_t>(std::min<int>(len, sizeof buf - 1)));
}

// Roughly five ticks at a 1/2/5 step.
double tick_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double nice = norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0;
  return nice * mag;
}

}  // namespace

std::string curve_svg(const CurveDocument& doc) {
  // A null target has no extent; draw it on [1, 2] so the point is visible.
  const double lo = 1.0;
  const double hi = doc.axis_max > 1.0 ? doc.axis_max : 2.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double v) { return kLeft + (v - lo) / (hi - lo) * plot_w; };
  auto sy = [&](double v) { return kTop + plot_h - (v - lo) / (hi - lo) * plot_h; };

  std::string out;
  appendf(out,
          "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
          kWidth, kHeight, kWidth, kHeight);
  out += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" style=\"fill:#ffffff\"/>\n";
  appendf(out,
          "<text x=\"%.1f\" y=\"28\" style=\"font-family:sans-serif;font-size:15px;text-anchor:middle\">"
          "Confounding strengths that explain away %s %.2f</text>\n",
          kWidth / 2.0, doc.target_label == CurveTarget::PointEstimate ? "RR" : "CI limit", doc.target_rr);

  // Axes and grid.
  appendf(out,
          "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" style=\"fill:none;stroke:#000000;stroke-width:1\"/>\n",
          kLeft, kTop, plot_w, plot_h);
  const double step = tick_step(hi - lo);
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9; t += step) {
    appendf(out,
            "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" style=\"stroke:#dddddd;stroke-width:1\"/>\n",
            sx(t), kTop, sx(t), kTop + plot_h);
    appendf(out,
            "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" style=\"stroke:#dddddd;stroke-width:1\"/>\n",
            kLeft, sy(t), kLeft + plot_w, sy(t));
    appendf(out,
            "<text x=\"%.2f\" y=\"%.2f\" style=\"font-family:sans-serif;font-size:11px;text-anchor:middle\">%.2f</text>\n",
            sx(t), kTop + plot_h + 16.0, t);
    appendf(out,
            "<text x=\"%.2f\" y=\"%.2f\" style=\"font-family:sans-serif;font-size:11px;text-anchor:end\">%.2f</text>\n",
            kLeft - 6.0, sy(t) + 4.0, t);
  }
  appendf(out,
          "<text x=\"%.2f\" y=\"%.2f\" style=\"font-family:sans-serif;font-size:13px;text-anchor:middle\">"
          "Time 0: RR_EU = RR_UY</text>\n",
          kLeft + plot_w / 2.0, kHeight - 22.0);
  appendf(out,
          "<text x=\"18\" y=\"%.2f\" transform=\"rotate(-90 18 %.2f)\" "
          "style=\"font-family:sans-serif;font-size:13px;text-anchor:middle\">Time 1: RR_EU = RR_UY</text>\n",
          kTop + plot_h / 2.0, kTop + plot_h / 2.0);

  // Reference diagonal; it meets the curve at the equal-split E-value.
  appendf(out,
          "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
          "style=\"stroke:#888888;stroke-width:1;stroke-dasharray:5,4\"/>\n",
          sx(lo), sy(lo), sx(hi), sy(hi));

  if (doc.points.size() > 1) {
    out += "<polyline style=\"fill:none;stroke:#1f4e9c;stroke-width:2\" points=\"";
    for (std::size_t i = 0; i < doc.points.size(); ++i) {
      appendf(out, "%s%.2f,%.2f", i == 0 ? "" : " ", sx(doc.points[i].strength_t0), sy(doc.points[i].strength_t1));
    }
    out += "\"/>\n";
  }
  const double equal = equal_split_evalue(doc.target_rr, 2);
  appendf(out, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" style=\"fill:#c0392b\"/>\n", sx(equal), sy(equal));
  appendf(out,
          "<text x=\"%.2f\" y=\"%.2f\" style=\"font-family:sans-serif;font-size:12px\">equal split %.2f</text>\n",
          sx(equal) + 8.0, sy(equal) - 8.0, equal);
  out += "</svg>\n";
  return out;
}

}  // namespace evtv
