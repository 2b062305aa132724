#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "voltsite/rng.hpp"
#include "voltsite/scenario.hpp"

namespace voltsite {

// Synthetic scenario recipe: grid roads, Gaussian-mixture density raster,
// density-proportional buildings and stations, substations on a coarse
// lattice. Stands in for real city data.
struct SynthConfig {
  double domain_width_km = 4.0;
  double domain_height_km = 4.0;
  int grid_nx = 7;   // road lines per axis, >= 2
  int grid_ny = 7;
  int raster_rows = 16;
  int raster_cols = 16;
  double base_density = 50.0;          // people/km²
  int n_hotspots = 3;                  // >= 1
  double hotspot_weight = 2000.0;      // peak density added per hotspot
  double hotspot_sigma_km = 0.8;
  int n_buildings = 40;
  int n_substations = 4;
  int n_stations = 6;
  int station_ports = 3;
  int station_port_min_type = 5;       // existing stations draw types >= this
  std::vector<FleetEntry> fleet = {
      {{"VFe34", 42.0, 0.150}, 120},
      {{"VF8", 87.7, 0.190}, 50},
      {{"VF9", 123.0, 0.220}, 30},
  };
};

inline SynthConfig desk_config() { return SynthConfig{}; }

inline SynthConfig paper_config() {
  SynthConfig c;
  c.domain_width_km = 12.0;
  c.domain_height_km = 12.0;
  c.grid_nx = 11;
  c.grid_ny = 11;
  c.raster_rows = 48;
  c.raster_cols = 48;
  c.n_hotspots = 6;
  c.hotspot_sigma_km = 1.5;
  c.n_buildings = 200;
  c.n_substations = 9;
  c.n_stations = 30;
  c.station_ports = 4;
  c.fleet = {
      {{"VFe34", 42.0, 0.150}, 1800},
      {{"VF8", 87.7, 0.190}, 800},
      {{"VF9", 123.0, 0.220}, 400},
  };
  return c;
}

inline Scenario generate_synthetic(const SynthConfig& cfg, std::uint64_t seed) {
  if (cfg.grid_nx < 2 || cfg.grid_ny < 2)
    throw ConfigError("synth.grid_nx/grid_ny: at least 2 grid roads per axis required");
  if (cfg.n_hotspots < 1) throw ConfigError("synth.n_hotspots: at least 1 required");
  if (cfg.domain_width_km <= 0.0 || cfg.domain_height_km <= 0.0)
    throw ConfigError("synth.domain: dimensions must be positive");
  if (cfg.station_port_min_type < 1 || cfg.station_port_min_type > 10)
    throw ConfigError("synth.station_port_min_type: must be in 1..10");

  Rng rng(seed);
  Scenario s;
  s.coordinate_mode = CoordinateMode::planar;
  s.domain = {0.0, 0.0, cfg.domain_width_km, cfg.domain_height_km};

  // density raster: base + Gaussian hotspots, sampled at cell centers
  Rng hot_rng = rng.stream("hotspots");
  std::vector<Point> hotspots;
  for (int h = 0; h < cfg.n_hotspots; ++h)
    hotspots.push_back({hot_rng.uniform(0.0, cfg.domain_width_km),
                        hot_rng.uniform(0.0, cfg.domain_height_km)});
  double cell_w = cfg.domain_width_km / cfg.raster_cols;
  double cell_h = cfg.domain_height_km / cfg.raster_rows;
  double cell = std::max(cell_w, cell_h);  // square cells covering the domain
  std::vector<double> cells(static_cast<std::size_t>(cfg.raster_rows) * cfg.raster_cols);
  for (int r = 0; r < cfg.raster_rows; ++r) {
    for (int c = 0; c < cfg.raster_cols; ++c) {
      Point center{(c + 0.5) * cell, (r + 0.5) * cell};
      double d = cfg.base_density;
      for (const auto& h : hotspots) {
        double dist = planar_distance(center, h);
        d += cfg.hotspot_weight *
             std::exp(-dist * dist / (2.0 * cfg.hotspot_sigma_km * cfg.hotspot_sigma_km));
      }
      cells[static_cast<std::size_t>(r) * cfg.raster_cols + c] = d;
    }
  }
  s.raster = PopulationRaster({0.0, 0.0}, cell, cfg.raster_rows, cfg.raster_cols, std::move(cells));

  // grid roads: nx vertical x ny horizontal lines, nodes at intersections
  std::vector<Point> nodes;
  double sx = cfg.domain_width_km / (cfg.grid_nx - 1);
  double sy = cfg.domain_height_km / (cfg.grid_ny - 1);
  for (int iy = 0; iy < cfg.grid_ny; ++iy)
    for (int ix = 0; ix < cfg.grid_nx; ++ix)
      nodes.push_back({ix * sx, iy * sy});
  std::vector<RoadEdge> edges;
  auto node_at = [&](int ix, int iy) { return iy * cfg.grid_nx + ix; };
  for (int iy = 0; iy < cfg.grid_ny; ++iy)
    for (int ix = 0; ix < cfg.grid_nx; ++ix) {
      if (ix + 1 < cfg.grid_nx) edges.push_back({node_at(ix, iy), node_at(ix + 1, iy), sx});
      if (iy + 1 < cfg.grid_ny) edges.push_back({node_at(ix, iy), node_at(ix, iy + 1), sy});
    }
  s.roads = RoadNetwork(std::move(nodes), std::move(edges));

  // density-weighted cell sampling helpers
  const PopulationRaster& raster = s.raster;
  std::vector<double> weights;
  weights.reserve(raster.cells().size());
  std::vector<std::pair<int, int>> in_domain;  // (row, col) of cells whose center is inside
  for (int r = 0; r < raster.rows(); ++r)
    for (int c = 0; c < raster.cols(); ++c) {
      Point ctr = raster.cell_center(r, c);
      if (s.domain.contains(ctr)) {
        in_domain.push_back({r, c});
        weights.push_back(raster.at(r, c));
      }
    }

  Rng bld_rng = rng.stream("buildings");
  for (int i = 0; i < cfg.n_buildings; ++i) {
    std::size_t k = bld_rng.weighted_index(weights);
    auto [r, c] = in_domain[k];
    Point ctr = raster.cell_center(r, c);
    Point p{ctr.x + bld_rng.uniform(-0.4, 0.4) * raster.cell_size_km(),
            ctr.y + bld_rng.uniform(-0.4, 0.4) * raster.cell_size_km()};
    s.buildings.push_back(s.domain.clamp(p));
  }

  // substations on a coarse lattice over the domain interior
  int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cfg.n_substations))));
  for (int i = 0; i < cfg.n_substations; ++i) {
    int gx = i % side;
    int gy = i / side;
    s.substations.push_back({cfg.domain_width_km * (gx + 1.0) / (side + 1.0),
                             cfg.domain_height_km * (gy + 1.0) / (side + 1.0)});
  }

  // existing stations on distinct density-weighted cells
  std::vector<double> st_weights = weights;
  int positive = 0;
  for (double w : st_weights)
    if (w > 0.0) ++positive;
  if (cfg.n_stations > positive)
    throw ConfigError("synth.n_stations: more stations than distinct positive-density cells");
  Rng st_rng = rng.stream("stations");
  Rng port_rng = rng.stream("station-ports");
  std::vector<double> port_weights = PortCatalog::standard().frequency_weights();
  for (int t = 0; t < cfg.station_port_min_type - 1; ++t) port_weights[t] = 0.0;
  for (int i = 0; i < cfg.n_stations; ++i) {
    std::size_t k = st_rng.weighted_index(st_weights);
    st_weights[k] = 0.0;  // without replacement
    auto [r, c] = in_domain[k];
    int type = static_cast<int>(port_rng.weighted_index(port_weights)) + 1;
    s.stations.push_back(make_station("s" + std::to_string(i), raster.cell_center(r, c), type,
                                      cfg.station_ports));
  }

  s.fleet = cfg.fleet;
  validate(s);
  return s;
}

}  // namespace voltsite
