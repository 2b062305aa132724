#pragma once

#include <algorithm>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "voltsite/geometry.hpp"
#include "voltsite/station.hpp"

namespace voltsite {

// Minimal SVG writing, enough for the station map and the trend chart.
class SvgCanvas {
 public:
  SvgCanvas(double width_px, double height_px) : w_(width_px), h_(height_px) {
    append("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
           "viewBox=\"0 0 %g %g\">\n",
           w_, h_, w_, h_);
  }

  void circle(double cx, double cy, double r, const std::string& fill) {
    append("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" fill=\"%s\" stroke=\"black\" "
           "stroke-width=\"0.5\"/>\n",
           cx, cy, r, fill.c_str());
  }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double width = 1.0) {
    append("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" "
           "stroke-width=\"%g\"/>\n",
           x1, y1, x2, y2, stroke.c_str(), width);
  }

  void rect(double x, double y, double w, double h, const std::string& stroke) {
    append("<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" "
           "stroke=\"%s\"/>\n",
           x, y, w, h, stroke.c_str());
  }

  void text(double x, double y, const std::string& s, double size = 12.0) {
    append("<text x=\"%.2f\" y=\"%.2f\" font-size=\"%g\" font-family=\"sans-serif\">%s</text>\n",
           x, y, size, s.c_str());
  }

  void polyline(std::span<const std::pair<double, double>> pts, const std::string& stroke) {
    std::string d = "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"1.5\" points=\"";
    char buf[64];
    for (auto [x, y] : pts) {
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", x, y);
      d += buf;
    }
    d += "\"/>\n";
    body_ += d;
  }

  void save(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write svg: " + path);
    out << body_ << "</svg>\n";
  }

 private:
  void append(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    body_ += buf;
  }

  double w_, h_;
  std::string body_;
};

// Station map: one circle per station, radius scaled by its mean wait.
inline void write_station_map_svg(const Rect& domain, std::span<const ChargingStation> stations,
                                  std::span<const double> station_waits, const std::string& path) {
  const double px = 640.0;
  double scale = px / std::max(domain.width(), domain.height());
  SvgCanvas svg(domain.width() * scale, domain.height() * scale);
  svg.rect(0, 0, domain.width() * scale, domain.height() * scale, "gray");
  double max_wait = 1e-9;
  for (double w : station_waits) max_wait = std::max(max_wait, w);
  for (std::size_t i = 0; i < stations.size(); ++i) {
    double wait = i < station_waits.size() ? station_waits[i] : 0.0;
    double r = 4.0 + 16.0 * wait / max_wait;
    double cx = (stations[i].location.x - domain.min_x) * scale;
    double cy = (domain.max_y - stations[i].location.y) * scale;  // y up -> svg y down
    svg.circle(cx, cy, r, "steelblue");
  }
  svg.save(path);
}

// Wait-versus-station-count trend: one polyline per labeled series.
inline void write_trend_svg(std::span<const std::string> labels,
                            std::span<const std::vector<double>> series,
                            const std::string& path) {
  const double w = 640.0, h = 400.0, margin = 48.0;
  SvgCanvas svg(w, h);
  svg.rect(margin, margin, w - 2 * margin, h - 2 * margin, "gray");
  double ymax = 1e-9;
  std::size_t xmax = 1;
  for (const auto& s : series) {
    for (double v : s) ymax = std::max(ymax, v);
    xmax = std::max(xmax, s.size());
  }
  const char* colors[] = {"steelblue", "darkorange", "seagreen", "crimson", "purple"};
  for (std::size_t si = 0; si < series.size(); ++si) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < series[si].size(); ++i) {
      double x = margin + (w - 2 * margin) * (xmax > 1 ? static_cast<double>(i) / (xmax - 1) : 0.5);
      double y = h - margin - (h - 2 * margin) * series[si][i] / ymax;
      pts.push_back({x, y});
    }
    svg.polyline(pts, colors[si % 5]);
    if (si < labels.size()) svg.text(margin + 8, margin + 16 + 14 * si, labels[si], 11);
  }
  svg.text(w / 2 - 60, h - 12, "stations added", 12);
  svg.save(path);
}

}  // namespace voltsite
