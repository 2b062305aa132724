#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <json.hpp>

#include "voltsite/common.hpp"
#include "voltsite/geometry.hpp"

namespace voltsite {

struct ConvexPolygon {
  std::vector<Point> vertices;  // counter-clockwise
};

// Voronoi diagram of the station set, clipped to the domain rectangle.
// Unbounded cells become bounded by the clipping, and the clip corners count
// as vertices (they are legal candidate locations).
struct VoronoiDiagram {
  Rect domain;
  std::vector<Point> sites;              // after duplicate merging
  std::vector<ConvexPolygon> regions;    // one per site
  std::vector<Point> vertices;           // deduplicated, sorted by (x, y)
};

namespace detail {

// Keep the part of poly with dot(p - mid, dir) <= 0 (closer to the cell's site).
inline ConvexPolygon clip_halfplane(const ConvexPolygon& poly, const Point& mid, double dir_x,
                                    double dir_y) {
  ConvexPolygon out;
  std::size_t n = poly.vertices.size();
  if (n == 0) return out;
  auto side = [&](const Point& p) { return (p.x - mid.x) * dir_x + (p.y - mid.y) * dir_y; };
  for (std::size_t k = 0; k < n; ++k) {
    const Point& cur = poly.vertices[k];
    const Point& nxt = poly.vertices[(k + 1) % n];
    double fc = side(cur);
    double fn = side(nxt);
    if (fc <= 0.0) out.vertices.push_back(cur);
    if ((fc < 0.0 && fn > 0.0) || (fc > 0.0 && fn < 0.0)) {
      double t = fc / (fc - fn);
      out.vertices.push_back({cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)});
    }
  }
  return out;
}

inline bool lex_less(const Point& a, const Point& b) {
  if (a.x != b.x) return a.x < b.x;
  return a.y < b.y;
}

}  // namespace detail

inline VoronoiDiagram compute_diagram(std::span<const Point> sites, const Rect& domain) {
  if (sites.empty()) throw std::invalid_argument("compute_diagram: at least one site required");
  VoronoiDiagram d;
  d.domain = domain;

  // merge duplicates within 1e-9 km, keeping first occurrences
  for (const Point& s : sites) {
    if (!domain.contains(s, 1e-9))
      throw std::invalid_argument("compute_diagram: site outside domain");
    bool dup = false;
    for (const Point& t : d.sites)
      if (planar_distance(s, t) < 1e-9) {
        dup = true;
        break;
      }
    if (!dup) d.sites.push_back({s.x, s.y});
  }

  ConvexPolygon box;
  box.vertices = {{domain.min_x, domain.min_y},
                  {domain.max_x, domain.min_y},
                  {domain.max_x, domain.max_y},
                  {domain.min_x, domain.max_y}};

  for (std::size_t i = 0; i < d.sites.size(); ++i) {
    ConvexPolygon cell = box;
    for (std::size_t j = 0; j < d.sites.size() && !cell.vertices.empty(); ++j) {
      if (j == i) continue;
      Point mid{(d.sites[i].x + d.sites[j].x) / 2.0, (d.sites[i].y + d.sites[j].y) / 2.0};
      cell = detail::clip_halfplane(cell, mid, d.sites[j].x - d.sites[i].x,
                                    d.sites[j].y - d.sites[i].y);
    }
    d.regions.push_back(std::move(cell));
  }

  // collect vertices, dedupe within 1e-6 km keeping the lexicographically first
  std::vector<Point> all;
  for (const auto& r : d.regions)
    for (const auto& v : r.vertices) all.push_back(v);
  std::sort(all.begin(), all.end(), detail::lex_less);
  for (const Point& v : all) {
    bool dup = false;
    for (auto it = d.vertices.rbegin(); it != d.vertices.rend(); ++it) {
      if (v.x - it->x > 1e-6) break;  // sorted by x: earlier points can't match anymore
      if (planar_distance(v, *it) < 1e-6) {
        dup = true;
        break;
      }
    }
    if (!dup) d.vertices.push_back(v);
  }
  return d;
}

// The discrete location action space: diagram vertices, minus any vertex
// sitting within min_separation of an existing site. Ordering is (x, y)
// lexicographic so candidate indices are stable across runs.
inline std::vector<Point> candidate_vertices(const VoronoiDiagram& diagram,
                                             std::span<const Point> existing,
                                             double min_separation_km = 0.05) {
  std::vector<Point> out;
  for (const Point& v : diagram.vertices) {
    bool near = false;
    for (const Point& s : existing)
      if (planar_distance(v, s) < min_separation_km) {
        near = true;
        break;
      }
    if (!near) out.push_back(v);
  }
  return out;
}

inline nlohmann::json diagram_to_json(const VoronoiDiagram& d) {
  nlohmann::json j;
  j["domain"] = {{"min_x", d.domain.min_x},
                 {"min_y", d.domain.min_y},
                 {"max_x", d.domain.max_x},
                 {"max_y", d.domain.max_y}};
  j["sites"] = nlohmann::json::array();
  for (const auto& s : d.sites) j["sites"].push_back({{"x", s.x}, {"y", s.y}});
  j["regions"] = nlohmann::json::array();
  for (const auto& r : d.regions) {
    nlohmann::json poly = nlohmann::json::array();
    for (const auto& v : r.vertices) poly.push_back({{"x", v.x}, {"y", v.y}});
    j["regions"].push_back(poly);
  }
  j["vertices"] = nlohmann::json::array();
  for (const auto& v : d.vertices) j["vertices"].push_back({{"x", v.x}, {"y", v.y}});
  return j;
}

}  // namespace voltsite
