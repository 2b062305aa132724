#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "voltsite/environment.hpp"
#include "voltsite/placement.hpp"
#include "voltsite/rng.hpp"
#include "voltsite/scenario.hpp"
#include "voltsite/voronoi.hpp"

namespace voltsite {

// Deterministic score used by the greedy baseline: r_pop + r_exist + r_sub,
// no simulation involved.
inline double deterministic_score(const StateVector& s, double rho_max, const RewardWeights& w,
                                  ExistRewardForm form = ExistRewardForm::prose) {
  return reward_pop(s.rho, rho_max, w) + reward_exist(s.d_nearest_km, w, form) +
         reward_sub(s.d_nearest_sub_km, w);
}

// Greedy Voronoi baseline: repeatedly place the candidate with the best
// deterministic reward, recomputing candidates after each placement.
inline PlacementPlan place_voronoi_greedy(const Scenario& scenario, int k,
                                          const RewardWeights& weights,
                                          int ports_per_station = 4,
                                          double min_separation_km = 0.05) {
  PlacementPlan plan;
  plan.method = "voronoi";
  std::vector<ChargingStation> stations = scenario.stations;
  for (int i = 0; i < k; ++i) {
    std::vector<Point> sites;
    for (const auto& st : stations) sites.push_back(st.location);
    VoronoiDiagram d = compute_diagram(sites, scenario.domain);
    std::vector<Point> cands = candidate_vertices(d, sites, min_separation_km);
    if (scenario.coordinate_mode == CoordinateMode::geographic && scenario.geo_origin)
      for (auto& c : cands) c.geo = geo_from_planar(c, *scenario.geo_origin);
    int best = -1;
    double best_score = -1.0;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      StateVector s = observe(cands[c], stations, scenario.substations, scenario.raster, nullptr,
                              weights, scenario.coordinate_mode);
      double score = deterministic_score(s, scenario.raster.rho_max(), weights);
      if (score > best_score) {
        best_score = score;
        best = static_cast<int>(c);
      }
    }
    plan.stations.push_back({cands[best], 0, ports_per_station});
    stations.push_back(make_station("greedy" + std::to_string(i), cands[best], 1, 1));
  }
  return plan;
}

// k points on three concentric rings about the domain centroid, radii at
// {1/3, 2/3, 1} of half the diagonal, equally spaced in angle from a seeded
// phase, filled ring-by-ring outward and clamped into the domain.
inline PlacementPlan place_radial(const Scenario& scenario, int k, std::uint64_t seed,
                                  int ports_per_station = 4) {
  PlacementPlan plan;
  plan.method = "radial";
  plan.seed = seed;
  Rng rng = Rng(seed).stream("radial");
  double phase = rng.uniform(0.0, 2.0 * kPi);
  Point c = scenario.domain.center();
  double r_max = scenario.domain.diagonal() / 2.0;

  int n1 = (k + 2) / 3;
  int n2 = (k - n1 + 1) / 2;
  int n3 = k - n1 - n2;
  const int counts[3] = {n1, n2, n3};
  const double radii[3] = {r_max / 3.0, 2.0 * r_max / 3.0, r_max};
  for (int ring = 0; ring < 3; ++ring) {
    for (int i = 0; i < counts[ring]; ++i) {
      double theta = phase + 2.0 * kPi * i / counts[ring];
      Point p{c.x + radii[ring] * std::cos(theta), c.y + radii[ring] * std::sin(theta)};
      plan.stations.push_back({scenario.domain.clamp(p), 0, ports_per_station});
    }
  }
  return plan;
}

// k distinct raster cells sampled without replacement, probability
// proportional to density; stations at the cell centers.
inline PlacementPlan place_probabilistic(const Scenario& scenario, int k, std::uint64_t seed,
                                         int ports_per_station = 4) {
  PlacementPlan plan;
  plan.method = "probabilistic";
  plan.seed = seed;
  const PopulationRaster& raster = scenario.raster;
  std::vector<double> weights;
  std::vector<std::pair<int, int>> cells;
  for (int r = 0; r < raster.rows(); ++r)
    for (int col = 0; col < raster.cols(); ++col) {
      Point ctr = raster.cell_center(r, col);
      if (!scenario.domain.contains(ctr)) continue;
      cells.push_back({r, col});
      weights.push_back(raster.at(r, col));
    }
  int positive = 0;
  for (double w : weights)
    if (w > 0.0) ++positive;
  if (k > positive)
    throw ConfigError("place_probabilistic: k exceeds positive-density cell count");
  Rng rng = Rng(seed).stream("probabilistic");
  for (int i = 0; i < k; ++i) {
    std::size_t idx = rng.weighted_index(weights);
    weights[idx] = 0.0;
    auto [r, col] = cells[idx];
    plan.stations.push_back({raster.cell_center(r, col), 0, ports_per_station});
  }
  return plan;
}

// Port draws following the observed system-wide frequency table, P(j) = pt_j / 84.
inline std::vector<int> assign_ports_random(int k, const PortCatalog& catalog,
                                            std::uint64_t seed) {
  std::vector<double> w = catalog.frequency_weights();
  Rng rng = Rng(seed).stream("ports-random");
  std::vector<int> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) out.push_back(static_cast<int>(rng.weighted_index(w)) + 1);
  return out;
}

// Density-tilted port draws: the frequency distribution biased toward
// higher-power types by (power_j / max_power)^(rho / rho_max). At rho = 0
// this reduces exactly to the frequency rule.
inline std::vector<int> assign_ports_density(std::span<const Point> locations,
                                             const PopulationRaster& raster,
                                             const PortCatalog& catalog, std::uint64_t seed) {
  Rng rng = Rng(seed).stream("ports-density");
  std::vector<int> out;
  out.reserve(locations.size());
  for (const Point& p : locations) {
    double expo = raster.density_at(p) / raster.rho_max();
    std::vector<double> w = catalog.frequency_weights();
    for (int j = 1; j <= catalog.size(); ++j)
      w[j - 1] *= std::pow(catalog.type(j).power_kw / catalog.max_power_kw(), expo);
    out.push_back(static_cast<int>(rng.weighted_index(w)) + 1);
  }
  return out;
}

enum class PortStrategy { random, density };

inline void apply_port_strategy(PlacementPlan& plan, PortStrategy strategy,
                                const Scenario& scenario, std::uint64_t seed) {
  std::vector<int> types;
  if (strategy == PortStrategy::random) {
    types = assign_ports_random(static_cast<int>(plan.stations.size()), PortCatalog::standard(),
                                seed);
  } else {
    std::vector<Point> locs;
    for (const auto& s : plan.stations) locs.push_back(s.location);
    types = assign_ports_density(locs, scenario.raster, PortCatalog::standard(), seed);
  }
  for (std::size_t i = 0; i < plan.stations.size(); ++i) plan.stations[i].port_type = types[i];
}

}  // namespace voltsite
