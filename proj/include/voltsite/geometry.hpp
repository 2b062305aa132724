#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

namespace voltsite {

inline constexpr double kEarthRadiusKm = 6371.0088;
inline constexpr double kPi = 3.141592653589793238462643383279502884;

enum class CoordinateMode { planar, geographic };

// Geographic tag in degrees; attached to points of geographic scenarios.
struct GeoTag {
  double lat = 0.0;
  double lon = 0.0;
};

// Position in the planar scenario frame, km east/north. Geographic scenarios
// additionally tag points with lat/lon so geodesic distances are available.
struct Point {
  double x = 0.0;
  double y = 0.0;
  std::optional<GeoTag> geo;
};

struct Rect {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  double diagonal() const { return std::sqrt(width() * width() + height() * height()); }
  Point center() const { return {(min_x + max_x) / 2.0, (min_y + max_y) / 2.0}; }

  bool contains(const Point& p, double tol = 0.0) const {
    return p.x >= min_x - tol && p.x <= max_x + tol && p.y >= min_y - tol && p.y <= max_y + tol;
  }

  Point clamp(const Point& p) const {
    return {std::min(std::max(p.x, min_x), max_x), std::min(std::max(p.y, min_y), max_y)};
  }
};

inline double planar_distance(const Point& a, const Point& b) {
  double dx = a.x - b.x;
  double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

inline double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  double phi1 = lat1 * kPi / 180.0;
  double phi2 = lat2 * kPi / 180.0;
  double dphi = (lat2 - lat1) * kPi / 180.0;
  double dlam = (lon2 - lon1) * kPi / 180.0;
  double s1 = std::sin(dphi / 2.0);
  double s2 = std::sin(dlam / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

// Planar mode: Euclidean on the km frame. Geographic mode: haversine on the
// geo tags; both points must carry one.
inline double distance(const Point& a, const Point& b, CoordinateMode mode) {
  if (mode == CoordinateMode::planar) return planar_distance(a, b);
  if (!a.geo || !b.geo)
    throw std::invalid_argument("distance: geographic mode requires geo tags on both points");
  return haversine_km(a.geo->lat, a.geo->lon, b.geo->lat, b.geo->lon);
}

// Local equirectangular mapping about a geographic origin. Good for the
// city-scale extents this tool works at; no projection library involved.
inline GeoTag geo_from_planar(const Point& p, const GeoTag& origin) {
  double lat = origin.lat + (p.y / kEarthRadiusKm) * 180.0 / kPi;
  double lon = origin.lon + (p.x / (kEarthRadiusKm * std::cos(origin.lat * kPi / 180.0))) * 180.0 / kPi;
  return {lat, lon};
}

inline Point planar_from_geo(const GeoTag& g, const GeoTag& origin) {
  double y = (g.lat - origin.lat) * kPi / 180.0 * kEarthRadiusKm;
  double x = (g.lon - origin.lon) * kPi / 180.0 * kEarthRadiusKm * std::cos(origin.lat * kPi / 180.0);
  return {x, y};
}

}  // namespace voltsite
