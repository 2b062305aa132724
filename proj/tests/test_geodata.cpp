#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "voltsite/geometry.hpp"
#include "voltsite/raster.hpp"
#include "voltsite/rng.hpp"
#include "voltsite/roads.hpp"
#include "voltsite/scenario.hpp"
#include "voltsite/synthetic.hpp"
#include "test_helpers.hpp"

using namespace voltsite;

TEST_CASE("planar distance basics") {
  CHECK(distance({0, 0}, {3, 4}, CoordinateMode::planar) == 5.0);
  CHECK(distance({2.5, -1}, {2.5, -1}, CoordinateMode::planar) == 0.0);
}

TEST_CASE("geographic distance matches an independent haversine check") {
  Point a{0, 0, GeoTag{0.0, 0.0}};
  Point b{0, 0, GeoTag{0.0, 1.0}};
  double d = distance(a, b, CoordinateMode::geographic);
  // along the equator, one degree of longitude is R * pi / 180
  double expected = kEarthRadiusKm * kPi / 180.0;
  CHECK(d == Catch::Approx(expected).epsilon(1e-12));
  CHECK(d == Catch::Approx(111.195).margin(0.005));
  CHECK(distance(a, a, CoordinateMode::geographic) == 0.0);
}

TEST_CASE("geographic mode requires geo tags on both points") {
  Point tagged{0, 0, GeoTag{1.0, 2.0}};
  Point bare{0, 0};
  CHECK_THROWS_AS(distance(tagged, bare, CoordinateMode::geographic), std::invalid_argument);
  CHECK_NOTHROW(distance(tagged, bare, CoordinateMode::planar));
}

TEST_CASE("distance triangle inequality on random triples") {
  Rng rng(2024);
  for (int i = 0; i < 10000; ++i) {
    Point a{rng.uniform(-50, 50), rng.uniform(-50, 50)};
    Point b{rng.uniform(-50, 50), rng.uniform(-50, 50)};
    Point c{rng.uniform(-50, 50), rng.uniform(-50, 50)};
    double ab = distance(a, b, CoordinateMode::planar);
    double bc = distance(b, c, CoordinateMode::planar);
    double ac = distance(a, c, CoordinateMode::planar);
    REQUIRE(ac <= ab + bc + 1e-9);
  }
}

TEST_CASE("raster lookup follows the floor rule") {
  // 2x2 raster, cell size 1, values row-major
  PopulationRaster r({0, 0}, 1.0, 2, 2, {1.0, 2.0, 3.0, 4.0});
  CHECK(r.density_at({0.0, 0.0}) == 1.0);  // origin -> cell (0,0)
  CHECK(r.density_at({1.5, 0.5}) == 2.0);
  CHECK(r.density_at({0.5, 1.5}) == 3.0);
  // interior boundary x = 1: floor(1/1) = 1 -> column 1
  CHECK(r.density_at({1.0, 0.5}) == 2.0);
  CHECK(r.density_at({0.5, 1.0}) == 3.0);
  // the closed far edge folds into the last cell
  CHECK(r.density_at({2.0, 2.0}) == 4.0);
  CHECK_THROWS_AS(r.density_at({2.1, 0.5}), ValidationError);
  CHECK_THROWS_AS(r.density_at({-0.1, 0.5}), ValidationError);
}

TEST_CASE("uniform raster returns the constant everywhere") {
  PopulationRaster r({0, 0}, 0.5, 8, 8, std::vector<double>(64, 500.0));
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    Point p{rng.uniform(0, 4), rng.uniform(0, 4)};
    CHECK(r.density_at(p) == 500.0);
  }
}

TEST_CASE("density never leaves [0, rho_max]") {
  Rng rng(99);
  std::vector<double> cells(100);
  for (auto& c : cells) c = rng.uniform(0, 800);
  PopulationRaster r({0, 0}, 1.0, 10, 10, cells);
  for (int i = 0; i < 2000; ++i) {
    double d = r.density_at({rng.uniform(0, 10), rng.uniform(0, 10)});
    REQUIRE(d >= 0.0);
    REQUIRE(d <= r.rho_max());
  }
}

TEST_CASE("raster rejects negative cells") {
  CHECK_THROWS_AS(PopulationRaster({0, 0}, 1.0, 2, 2, {1.0, -0.5, 2.0, 3.0}), ValidationError);
}

TEST_CASE("shortest path on trivial graphs") {
  RoadNetwork net({{0, 0}, {2, 0}}, {{0, 1, 2.0}});
  auto same = net.shortest_path(0, 0);
  CHECK(same.nodes == std::vector<int>{0});
  CHECK(same.length_km == 0.0);
  auto p = net.shortest_path(0, 1);
  CHECK(p.nodes == std::vector<int>{0, 1});
  CHECK(p.length_km == 2.0);
}

TEST_CASE("shortest path picks the 3 km route over the 4 km one") {
  // 0 -(1)- 1 -(2)- 4 and 0 -(2)- 2 -(1)- 3 -(1)- 4
  std::vector<Point> nodes{{0, 0}, {1, 0}, {0.5, 0.5}, {1.5, 0.5}, {2, 0}};
  std::vector<RoadEdge> edges{{0, 1, 1.0}, {1, 4, 2.0}, {0, 2, 2.0}, {2, 3, 1.0}, {3, 4, 1.0}};
  RoadNetwork net(nodes, edges);
  auto p = net.shortest_path(0, 4);
  CHECK(p.length_km == 3.0);
  CHECK(p.nodes == std::vector<int>{0, 1, 4});
}

namespace {

// every simple path, by brute force
void enumerate_paths(const std::vector<std::vector<std::pair<int, double>>>& adj, int u, int goal,
                     double len, std::vector<bool>& used, double& best) {
  if (u == goal) {
    best = std::min(best, len);
    return;
  }
  for (auto [v, w] : adj[u]) {
    if (used[v]) continue;
    used[v] = true;
    enumerate_paths(adj, v, goal, len + w, used, best);
    used[v] = false;
  }
}

}  // namespace

TEST_CASE("shortest path matches exhaustive enumeration on small random graphs") {
  Rng rng(4242);
  for (int trial = 0; trial < 30; ++trial) {
    int n = rng.uniform_int(2, 8);
    std::vector<Point> nodes;
    for (int i = 0; i < n; ++i) nodes.push_back({rng.uniform(0, 10), rng.uniform(0, 10)});
    std::vector<RoadEdge> edges;
    // spanning chain keeps it connected, then random extras
    for (int i = 1; i < n; ++i)
      edges.push_back({i - 1, i, planar_distance(nodes[i - 1], nodes[i]) + rng.uniform(0, 2)});
    int extra = rng.uniform_int(0, n);
    for (int e = 0; e < extra; ++e) {
      int a = rng.uniform_int(0, n - 1);
      int b = rng.uniform_int(0, n - 1);
      if (a == b) continue;
      edges.push_back({a, b, planar_distance(nodes[a], nodes[b]) + rng.uniform(0.1, 3)});
    }
    RoadNetwork net(nodes, edges);
    std::vector<std::vector<std::pair<int, double>>> adj(n);
    for (const auto& e : edges) {
      adj[e.a].push_back({e.b, e.length_km});
      adj[e.b].push_back({e.a, e.length_km});
    }
    int a = rng.uniform_int(0, n - 1);
    int b = rng.uniform_int(0, n - 1);
    double best = std::numeric_limits<double>::infinity();
    std::vector<bool> used(n, false);
    used[a] = true;
    enumerate_paths(adj, a, b, 0.0, used, best);
    auto p = net.shortest_path(a, b);
    REQUIRE(p.length_km <= best + 1e-9);
    REQUIRE(p.length_km >= best - 1e-9);
  }
}

TEST_CASE("road network validation") {
  CHECK_THROWS_AS(RoadNetwork({{0, 0}, {5, 0}}, {{0, 1, 4.0}}), ValidationError);  // too short
  CHECK_THROWS_AS(RoadNetwork({{0, 0}, {1, 0}}, {{0, 1, 0.0}}), ValidationError);  // zero length
  // disconnected: two components
  CHECK_THROWS_AS(RoadNetwork({{0, 0}, {1, 0}, {5, 5}, {6, 5}}, {{0, 1, 1.0}, {2, 3, 1.0}}),
                  ValidationError);
}

TEST_CASE("scenario json round trip and validation errors") {
  Scenario s = voltsite::testing::mini_scenario();
  nlohmann::json j = scenario_to_json(s);
  Scenario back = scenario_from_json(j);
  CHECK(scenario_to_json(back) == j);

  nlohmann::json bad = j;
  bad["stations"][0]["x"] = 99.0;  // outside the 10x10 domain
  try {
    scenario_from_json(bad);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("s0") != std::string::npos);
  }

  nlohmann::json bad2 = j;
  bad2["raster"]["cells"][3] = -5.0;
  CHECK_THROWS_AS(scenario_from_json(bad2), ValidationError);
}

TEST_CASE("minimal scenario file loads") {
  nlohmann::json j;
  j["coordinate_mode"] = "planar";
  j["domain"] = {{"min_x", 0}, {"min_y", 0}, {"max_x", 2}, {"max_y", 2}};
  j["raster"] = {{"origin", {{"x", 0}, {"y", 0}}},
                 {"cell_size_km", 1.0},
                 {"rows", 2},
                 {"cols", 2},
                 {"cells", {10.0, 10.0, 10.0, 10.0}}};
  j["roads"] = {{"nodes", {{{"x", 0}, {"y", 0}}, {{"x", 2}, {"y", 0}}}},
                {"edges", {{{"a", 0}, {"b", 1}, {"length_km", 2.0}}}}};
  j["buildings"] = {{{"x", 0}, {"y", 0}}, {{"x", 2}, {"y", 0}}};
  j["substations"] = {{{"x", 1}, {"y", 1}}};
  j["stations"] = {{{"id", "s0"},
                    {"x", 1},
                    {"y", 0},
                    {"ports", {{{"type", 2}, {"count", 1}}}}}};
  j["fleet"] = {{{"model", "m"}, {"capacity_kwh", 42.0}, {"consumption_kwh_per_km", 0.15}, {"count", 1}}};
  Scenario s = scenario_from_json(j);
  CHECK(s.stations.size() == 1);
  CHECK(s.stations[0].ports.size() == 1);
  CHECK(s.stations[0].ports[0].power_kw == 11.0);
  CHECK(s.fleet_total() == 1);
}

TEST_CASE("synthetic generation is a pure function of config and seed") {
  SynthConfig cfg = desk_config();
  Scenario a = generate_synthetic(cfg, 42);
  Scenario b = generate_synthetic(cfg, 42);
  CHECK(scenario_to_json(a).dump() == scenario_to_json(b).dump());
  Scenario c = generate_synthetic(cfg, 43);
  CHECK(scenario_to_json(a).dump() != scenario_to_json(c).dump());
}

TEST_CASE("synthetic respects the requested station count") {
  SynthConfig cfg = desk_config();
  Scenario s = generate_synthetic(cfg, 42);
  CHECK(static_cast<int>(s.stations.size()) == cfg.n_stations);
  CHECK(s.fleet_total() == 200);
}

TEST_CASE("synthetic with zero hotspot weight gives a uniform raster") {
  SynthConfig cfg = desk_config();
  cfg.hotspot_weight = 0.0;
  Scenario s = generate_synthetic(cfg, 5);
  CHECK(s.raster.rho_max() == Catch::Approx(cfg.base_density));
  for (double c : s.raster.cells()) CHECK(c == Catch::Approx(cfg.base_density));
}

TEST_CASE("synthetic scenario files are byte identical across writes") {
  namespace fs = std::filesystem;
  SynthConfig cfg = desk_config();
  fs::path dir = fs::temp_directory_path() / "voltsite_synth_test";
  fs::create_directories(dir);
  save_scenario(generate_synthetic(cfg, 7), dir / "a.json");
  save_scenario(generate_synthetic(cfg, 7), dir / "b.json");
  std::ifstream fa(dir / "a.json"), fb(dir / "b.json");
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(!sa.str().empty());
}

TEST_CASE("synthetic rejects infeasible station counts") {
  SynthConfig cfg = desk_config();
  cfg.n_stations = cfg.raster_rows * cfg.raster_cols + 1;
  CHECK_THROWS_AS(generate_synthetic(cfg, 1), ConfigError);
}
