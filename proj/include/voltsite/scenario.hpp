#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "voltsite/common.hpp"
#include "voltsite/geometry.hpp"
#include "voltsite/raster.hpp"
#include "voltsite/roads.hpp"
#include "voltsite/station.hpp"

namespace voltsite {

struct VehicleSpec {
  std::string model;
  double capacity_kwh = 0.0;
  double consumption_kwh_per_km = 0.0;
};

struct FleetEntry {
  VehicleSpec spec;
  int count = 0;
};

// The world a run operates on. Immutable after load; everything downstream
// (simulator, environment, baselines) reads it concurrently without locks.
struct Scenario {
  CoordinateMode coordinate_mode = CoordinateMode::planar;
  std::optional<GeoTag> geo_origin;  // required in geographic mode
  Rect domain;
  PopulationRaster raster;
  RoadNetwork roads;
  std::vector<Point> buildings;
  std::vector<Point> substations;
  std::vector<ChargingStation> stations;
  std::vector<FleetEntry> fleet;

  int fleet_total() const {
    int n = 0;
    for (const auto& f : fleet) n += f.count;
    return n;
  }

  std::vector<Point> station_points() const {
    std::vector<Point> pts;
    pts.reserve(stations.size());
    for (const auto& s : stations) pts.push_back(s.location);
    return pts;
  }
};

namespace detail {

inline double require_number(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path + ": expected a number");
  return j.get<double>();
}

inline const nlohmann::json& require_key(const nlohmann::json& j, const std::string& key,
                                         const std::string& path) {
  if (!j.contains(key)) throw ValidationError(path + "." + key + ": missing");
  return j.at(key);
}

inline Point parse_point(const nlohmann::json& j, const std::string& path) {
  Point p;
  p.x = require_number(require_key(j, "x", path), path + ".x");
  p.y = require_number(require_key(j, "y", path), path + ".y");
  if (j.contains("lat") || j.contains("lon")) {
    GeoTag g;
    g.lat = require_number(require_key(j, "lat", path), path + ".lat");
    g.lon = require_number(require_key(j, "lon", path), path + ".lon");
    p.geo = g;
  }
  return p;
}

inline nlohmann::json point_to_json(const Point& p) {
  nlohmann::json j{{"x", p.x}, {"y", p.y}};
  if (p.geo) {
    j["lat"] = p.geo->lat;
    j["lon"] = p.geo->lon;
  }
  return j;
}

}  // namespace detail

inline void validate(const Scenario& s) {
  if (s.domain.width() <= 0.0 || s.domain.height() <= 0.0)
    throw ValidationError("domain: must have positive width and height");
  if (s.coordinate_mode == CoordinateMode::geographic && !s.geo_origin)
    throw ValidationError("geo_origin: required in geographic mode");
  Rect ext = s.raster.extent();
  if (ext.min_x > s.domain.min_x + 1e-9 || ext.min_y > s.domain.min_y + 1e-9 ||
      ext.max_x < s.domain.max_x - 1e-9 || ext.max_y < s.domain.max_y - 1e-9)
    throw ValidationError("raster: extent must cover the domain rectangle");
  if (!(s.raster.rho_max() > 0.0))
    throw ValidationError("raster.cells: all-zero density (rho_max must be > 0)");
  if (s.buildings.size() < 2) throw ValidationError("buildings: at least 2 required");
  if (s.substations.empty()) throw ValidationError("substations: at least 1 required");
  if (s.fleet_total() <= 0) throw ValidationError("fleet: total vehicle count must be > 0");
  for (std::size_t i = 0; i < s.buildings.size(); ++i)
    if (!s.domain.contains(s.buildings[i], 1e-9))
      throw ValidationError("buildings[" + std::to_string(i) + "]: outside domain");
  for (std::size_t i = 0; i < s.substations.size(); ++i)
    if (!s.domain.contains(s.substations[i], 1e-9))
      throw ValidationError("substations[" + std::to_string(i) + "]: outside domain");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < s.stations.size(); ++i) {
    const ChargingStation& st = s.stations[i];
    std::string path = "stations[" + std::to_string(i) + "]";
    if (!s.domain.contains(st.location, 1e-9))
      throw ValidationError(path + " (id " + st.id + "): outside domain");
    if (!ids.insert(st.id).second) throw ValidationError(path + ": duplicate id " + st.id);
    for (std::size_t k = 0; k < st.ports.size(); ++k)
      if (st.ports[k].type < 1 || st.ports[k].type > 10)
        throw ValidationError(path + ".ports[" + std::to_string(k) + "].type: must be in 1..10");
  }
  for (std::size_t i = 0; i < s.fleet.size(); ++i) {
    std::string path = "fleet[" + std::to_string(i) + "]";
    if (!(s.fleet[i].spec.capacity_kwh > 0.0))
      throw ValidationError(path + ".capacity_kwh: must be > 0");
    if (!(s.fleet[i].spec.consumption_kwh_per_km > 0.0))
      throw ValidationError(path + ".consumption_kwh_per_km: must be > 0");
    if (s.fleet[i].count < 0) throw ValidationError(path + ".count: must be >= 0");
  }
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  using detail::parse_point;
  using detail::require_key;
  using detail::require_number;
  Scenario s;

  std::string mode = require_key(j, "coordinate_mode", "scenario").get<std::string>();
  if (mode == "planar")
    s.coordinate_mode = CoordinateMode::planar;
  else if (mode == "geographic")
    s.coordinate_mode = CoordinateMode::geographic;
  else
    throw ValidationError("coordinate_mode: must be 'planar' or 'geographic'");

  const auto& dj = require_key(j, "domain", "scenario");
  s.domain = {require_number(require_key(dj, "min_x", "domain"), "domain.min_x"),
              require_number(require_key(dj, "min_y", "domain"), "domain.min_y"),
              require_number(require_key(dj, "max_x", "domain"), "domain.max_x"),
              require_number(require_key(dj, "max_y", "domain"), "domain.max_y")};

  if (j.contains("geo_origin")) {
    const auto& gj = j.at("geo_origin");
    s.geo_origin = GeoTag{require_number(require_key(gj, "lat", "geo_origin"), "geo_origin.lat"),
                          require_number(require_key(gj, "lon", "geo_origin"), "geo_origin.lon")};
  }

  const auto& rj = require_key(j, "raster", "scenario");
  Point origin = parse_point(require_key(rj, "origin", "raster"), "raster.origin");
  double cell = require_number(require_key(rj, "cell_size_km", "raster"), "raster.cell_size_km");
  int rows = require_key(rj, "rows", "raster").get<int>();
  int cols = require_key(rj, "cols", "raster").get<int>();
  std::vector<double> cells;
  const auto& cj = require_key(rj, "cells", "raster");
  if (!cj.is_array()) throw ValidationError("raster.cells: expected an array");
  cells.reserve(cj.size());
  for (std::size_t i = 0; i < cj.size(); ++i)
    cells.push_back(require_number(cj[i], "raster.cells[" + std::to_string(i) + "]"));
  s.raster = PopulationRaster(origin, cell, rows, cols, std::move(cells));

  const auto& roj = require_key(j, "roads", "scenario");
  std::vector<Point> nodes;
  const auto& nj = require_key(roj, "nodes", "roads");
  for (std::size_t i = 0; i < nj.size(); ++i)
    nodes.push_back(parse_point(nj[i], "roads.nodes[" + std::to_string(i) + "]"));
  std::vector<RoadEdge> edges;
  const auto& ej = require_key(roj, "edges", "roads");
  for (std::size_t i = 0; i < ej.size(); ++i) {
    std::string path = "roads.edges[" + std::to_string(i) + "]";
    RoadEdge e;
    e.a = require_key(ej[i], "a", path).get<int>();
    e.b = require_key(ej[i], "b", path).get<int>();
    e.length_km = require_number(require_key(ej[i], "length_km", path), path + ".length_km");
    edges.push_back(e);
  }
  s.roads = RoadNetwork(std::move(nodes), std::move(edges));

  const auto& bj = require_key(j, "buildings", "scenario");
  for (std::size_t i = 0; i < bj.size(); ++i)
    s.buildings.push_back(parse_point(bj[i], "buildings[" + std::to_string(i) + "]"));
  const auto& suj = require_key(j, "substations", "scenario");
  for (std::size_t i = 0; i < suj.size(); ++i)
    s.substations.push_back(parse_point(suj[i], "substations[" + std::to_string(i) + "]"));

  const PortCatalog& catalog = PortCatalog::standard();
  const auto& stj = require_key(j, "stations", "scenario");
  for (std::size_t i = 0; i < stj.size(); ++i) {
    std::string path = "stations[" + std::to_string(i) + "]";
    ChargingStation st;
    st.id = require_key(stj[i], "id", path).get<std::string>();
    st.location = parse_point(stj[i], path);
    const auto& pj = require_key(stj[i], "ports", path);
    for (std::size_t k = 0; k < pj.size(); ++k) {
      std::string ppath = path + ".ports[" + std::to_string(k) + "]";
      int type = require_key(pj[k], "type", ppath).get<int>();
      int count = require_key(pj[k], "count", ppath).get<int>();
      if (type < 1 || type > 10) throw ValidationError(ppath + ".type: must be in 1..10");
      if (count < 0) throw ValidationError(ppath + ".count: must be >= 0");
      for (int c = 0; c < count; ++c)
        st.ports.push_back(Port{type, catalog.type(type).power_kw, -1});
    }
    s.stations.push_back(std::move(st));
  }

  const auto& fj = require_key(j, "fleet", "scenario");
  for (std::size_t i = 0; i < fj.size(); ++i) {
    std::string path = "fleet[" + std::to_string(i) + "]";
    FleetEntry f;
    f.spec.model = require_key(fj[i], "model", path).get<std::string>();
    f.spec.capacity_kwh = require_number(require_key(fj[i], "capacity_kwh", path), path + ".capacity_kwh");
    f.spec.consumption_kwh_per_km =
        require_number(require_key(fj[i], "consumption_kwh_per_km", path), path + ".consumption_kwh_per_km");
    f.count = require_key(fj[i], "count", path).get<int>();
    s.fleet.push_back(std::move(f));
  }

  if (s.coordinate_mode == CoordinateMode::geographic) {
    if (!s.geo_origin) throw ValidationError("geo_origin: required in geographic mode");
    auto tag = [&](Point& p) {
      if (!p.geo) p.geo = geo_from_planar(p, *s.geo_origin);
    };
    for (auto& p : s.buildings) tag(p);
    for (auto& p : s.substations) tag(p);
    for (auto& st : s.stations) tag(st.location);
  }

  validate(s);
  return s;
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
  using detail::point_to_json;
  nlohmann::json j;
  j["coordinate_mode"] = s.coordinate_mode == CoordinateMode::planar ? "planar" : "geographic";
  if (s.geo_origin) j["geo_origin"] = {{"lat", s.geo_origin->lat}, {"lon", s.geo_origin->lon}};
  j["domain"] = {{"min_x", s.domain.min_x},
                 {"min_y", s.domain.min_y},
                 {"max_x", s.domain.max_x},
                 {"max_y", s.domain.max_y}};
  j["raster"] = {{"origin", point_to_json(s.raster.origin())},
                 {"cell_size_km", s.raster.cell_size_km()},
                 {"rows", s.raster.rows()},
                 {"cols", s.raster.cols()},
                 {"cells", s.raster.cells()}};
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : s.roads.nodes()) nodes.push_back(point_to_json(n));
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : s.roads.edges())
    edges.push_back({{"a", e.a}, {"b", e.b}, {"length_km", e.length_km}});
  j["roads"] = {{"nodes", nodes}, {"edges", edges}};
  j["buildings"] = nlohmann::json::array();
  for (const auto& b : s.buildings) j["buildings"].push_back(point_to_json(b));
  j["substations"] = nlohmann::json::array();
  for (const auto& p : s.substations) j["substations"].push_back(point_to_json(p));
  j["stations"] = nlohmann::json::array();
  for (const auto& st : s.stations) {
    nlohmann::json sj = point_to_json(st.location);
    sj["id"] = st.id;
    // group ports back into {type, count} runs
    nlohmann::json ports = nlohmann::json::array();
    std::vector<int> counts(11, 0);
    for (const auto& p : st.ports) counts[p.type]++;
    for (int t = 1; t <= 10; ++t)
      if (counts[t] > 0) ports.push_back({{"type", t}, {"count", counts[t]}});
    sj["ports"] = ports;
    j["stations"].push_back(sj);
  }
  j["fleet"] = nlohmann::json::array();
  for (const auto& f : s.fleet)
    j["fleet"].push_back({{"model", f.spec.model},
                          {"capacity_kwh", f.spec.capacity_kwh},
                          {"consumption_kwh_per_km", f.spec.consumption_kwh_per_km},
                          {"count", f.count}});
  return j;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("scenario parse error: " + std::string(e.what()));
  }
  return scenario_from_json(j);
}

inline void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path.string());
  out << scenario_to_json(s).dump(2) << "\n";
}

}  // namespace voltsite
