#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "voltsite/rng.hpp"
#include "voltsite/voronoi.hpp"

using namespace voltsite;

namespace {

bool on_boundary(const Point& v, const Rect& d, double tol = 1e-9) {
  return std::abs(v.x - d.min_x) < tol || std::abs(v.x - d.max_x) < tol ||
         std::abs(v.y - d.min_y) < tol || std::abs(v.y - d.max_y) < tol;
}

bool contains_point(const std::vector<Point>& pts, const Point& p, double tol = 1e-9) {
  return std::any_of(pts.begin(), pts.end(),
                     [&](const Point& q) { return planar_distance(p, q) <= tol; });
}

std::vector<double> sorted_site_distances(const Point& v, const std::vector<Point>& sites) {
  std::vector<double> d;
  for (const auto& s : sites) d.push_back(planar_distance(v, s));
  std::sort(d.begin(), d.end());
  return d;
}

}  // namespace

TEST_CASE("one site: region is the whole domain, vertices are the corners") {
  Rect d{0, 0, 10, 10};
  std::vector<Point> sites{{5, 5}};
  VoronoiDiagram v = compute_diagram(sites, d);
  REQUIRE(v.regions.size() == 1);
  REQUIRE(v.vertices.size() == 4);
  CHECK(contains_point(v.vertices, {0, 0}, 0.0));
  CHECK(contains_point(v.vertices, {0, 10}, 0.0));
  CHECK(contains_point(v.vertices, {10, 0}, 0.0));
  CHECK(contains_point(v.vertices, {10, 10}, 0.0));
}

TEST_CASE("two symmetric sites: boundary is the perpendicular bisector") {
  Rect d{0, 0, 10, 10};
  std::vector<Point> sites{{3, 5}, {7, 5}};
  VoronoiDiagram v = compute_diagram(sites, d);
  // the bisector x = 5 crosses the boundary at (5, 0) and (5, 10)
  CHECK(contains_point(v.vertices, {5, 0}, 1e-9));
  CHECK(contains_point(v.vertices, {5, 10}, 1e-9));
  CHECK(v.vertices.size() == 6);  // 4 corners + 2 bisector crossings
}

TEST_CASE("four sites on a centered square share the center vertex") {
  Rect d{0, 0, 10, 10};
  std::vector<Point> sites{{3, 3}, {7, 3}, {3, 7}, {7, 7}};
  VoronoiDiagram v = compute_diagram(sites, d);
  CHECK(contains_point(v.vertices, {5, 5}, 1e-12));
  for (const auto& region : v.regions)
    CHECK(contains_point(region.vertices, {5, 5}, 1e-9));
}

TEST_CASE("equilateral triangle sites include the circumcenter") {
  Rect d{-20, -20, 20, 20};
  double h = std::sqrt(3.0);
  std::vector<Point> sites{{-1, 0}, {1, 0}, {0, h}};
  VoronoiDiagram v = compute_diagram(sites, d);
  Point circumcenter{0.0, h / 3.0};  // equidistant to all three corners
  CHECK(contains_point(v.vertices, circumcenter, 1e-9));
}

TEST_CASE("interior vertices are equidistant to their nearest sites") {
  Rng rng(314159);
  for (int trial = 0; trial < 100; ++trial) {
    Rect d{0, 0, 10, 10};
    int n = rng.uniform_int(1, 30);
    std::vector<Point> sites;
    for (int i = 0; i < n; ++i) sites.push_back({rng.uniform(0, 10), rng.uniform(0, 10)});
    VoronoiDiagram v = compute_diagram(sites, d);
    for (const auto& vert : v.vertices) {
      auto dist = sorted_site_distances(vert, v.sites);
      if (on_boundary(vert, d)) {
        // boundary-clip vertices may touch only 1-2 cells
        continue;
      }
      REQUIRE(dist.size() >= 3);
      REQUIRE(dist[2] - dist[0] <= 1e-6);
    }
  }
}

TEST_CASE("regions cover the domain") {
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    Rect d{0, 0, 8, 8};
    int n = rng.uniform_int(2, 12);
    std::vector<Point> sites;
    for (int i = 0; i < n; ++i) sites.push_back({rng.uniform(0, 8), rng.uniform(0, 8)});
    VoronoiDiagram v = compute_diagram(sites, d);
    for (int k = 0; k < 200; ++k) {
      Point p{rng.uniform(0, 8), rng.uniform(0, 8)};
      // the region of the nearest site must contain p (half-plane test)
      int nearest = 0;
      for (int i = 1; i < static_cast<int>(v.sites.size()); ++i)
        if (planar_distance(p, v.sites[i]) < planar_distance(p, v.sites[nearest])) nearest = i;
      // p is inside cell(nearest) iff it is no farther from `nearest` than
      // from any other site, which holds by definition; instead verify the
      // polygon itself contains p via the supporting half-planes
      const auto& poly = v.regions[nearest].vertices;
      REQUIRE(!poly.empty());
      bool inside = true;
      for (std::size_t e = 0; e < poly.size() && inside; ++e) {
        const Point& a = poly[e];
        const Point& b = poly[(e + 1) % poly.size()];
        double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        if (cross < -1e-7) inside = false;
      }
      REQUIRE(inside);
    }
  }
}

TEST_CASE("duplicate sites merge and collinear sites do not crash") {
  Rect d{0, 0, 10, 10};
  std::vector<Point> sites{{2, 2}, {2.0 + 1e-12, 2.0}, {5, 5}, {8, 8}};
  VoronoiDiagram v = compute_diagram(sites, d);
  CHECK(v.sites.size() == 3);
  CHECK(v.regions.size() == 3);
}

TEST_CASE("empty or out-of-domain sites are rejected") {
  Rect d{0, 0, 10, 10};
  std::vector<Point> none;
  CHECK_THROWS_AS(compute_diagram(none, d), std::invalid_argument);
  std::vector<Point> outside{{11, 5}};
  CHECK_THROWS_AS(compute_diagram(outside, d), std::invalid_argument);
}

TEST_CASE("candidate vertices: ordering, separation filter, purity") {
  Rect d{0, 0, 10, 10};
  Rng rng(7);
  std::vector<Point> sites;
  for (int i = 0; i < 10; ++i) sites.push_back({rng.uniform(0, 10), rng.uniform(0, 10)});
  VoronoiDiagram v = compute_diagram(sites, d);
  auto c1 = candidate_vertices(v, sites, 0.05);
  auto c2 = candidate_vertices(v, sites, 0.05);
  REQUIRE(c1.size() == c2.size());
  for (std::size_t i = 0; i < c1.size(); ++i) {
    CHECK(c1[i].x == c2[i].x);
    CHECK(c1[i].y == c2[i].y);
    if (i > 0)
      CHECK((c1[i - 1].x < c1[i].x || (c1[i - 1].x == c1[i].x && c1[i - 1].y < c1[i].y)));
    for (const auto& s : sites) CHECK(planar_distance(c1[i], s) >= 0.05);
  }
  // every candidate is either a boundary point or equidistant to >= 2 sites
  for (const auto& cand : c1) {
    if (on_boundary(cand, d)) continue;
    auto dist = sorted_site_distances(cand, v.sites);
    CHECK(dist[1] - dist[0] <= 1e-6);
  }
}

TEST_CASE("single centered site yields exactly the four corners as candidates") {
  Rect d{0, 0, 4, 4};
  std::vector<Point> sites{{2, 2}};
  auto cands = candidate_vertices(compute_diagram(sites, d), sites);
  REQUIRE(cands.size() == 4);
  CHECK(cands[0].x == 0.0);
  CHECK(cands[0].y == 0.0);
  CHECK(cands[3].x == 4.0);
  CHECK(cands[3].y == 4.0);
}
