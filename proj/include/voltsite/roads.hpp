#pragma once

#include <algorithm>
#include <limits>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "voltsite/common.hpp"
#include "voltsite/geometry.hpp"

namespace voltsite {

struct RoadEdge {
  int a = 0;
  int b = 0;
  double length_km = 0.0;
};

struct RoutePath {
  std::vector<int> nodes;
  double length_km = 0.0;
};

// Undirected road graph. Construction validates edge lengths against the
// straight-line lower bound and rejects disconnected graphs outright, so
// routing never has to handle unreachable pairs.
class RoadNetwork {
 public:
  RoadNetwork() = default;

  RoadNetwork(std::vector<Point> nodes, std::vector<RoadEdge> edges)
      : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    if (nodes_.empty()) throw ValidationError("roads.nodes: must not be empty");
    adj_.assign(nodes_.size(), {});
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const RoadEdge& e = edges_[i];
      std::string path = "roads.edges[" + std::to_string(i) + "]";
      if (e.a < 0 || e.a >= static_cast<int>(nodes_.size()) || e.b < 0 ||
          e.b >= static_cast<int>(nodes_.size()))
        throw ValidationError(path + ": node index out of range");
      if (!(e.length_km > 0.0)) throw ValidationError(path + ".length_km: must be > 0");
      double straight = planar_distance(nodes_[e.a], nodes_[e.b]);
      if (e.length_km < straight - 1e-9)
        throw ValidationError(path + ".length_km: shorter than straight-line distance");
      adj_[e.a].push_back({e.b, e.length_km});
      adj_[e.b].push_back({e.a, e.length_km});
    }
    for (auto& nbrs : adj_) std::sort(nbrs.begin(), nbrs.end());
    if (!connected()) throw ValidationError("roads: graph is disconnected");
  }

  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<RoadEdge>& edges() const { return edges_; }

  int nearest_node(const Point& p) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      double d = planar_distance(p, nodes_[i]);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    return best;
  }

  // Dijkstra by edge length; ties broken toward the smaller predecessor index
  // so equal-length routes resolve the same way on every run.
  RoutePath shortest_path(int a, int b) const {
    int n = static_cast<int>(nodes_.size());
    if (a < 0 || a >= n || b < 0 || b >= n)
      throw std::invalid_argument("shortest_path: node index out of range");
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<int> pred(n, -1);
    std::vector<bool> done(n, false);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    dist[a] = 0.0;
    heap.push({0.0, a});
    while (!heap.empty()) {
      auto [d, u] = heap.top();
      heap.pop();
      if (done[u]) continue;
      done[u] = true;
      if (u == b) break;
      for (auto [v, w] : adj_[u]) {
        double nd = d + w;
        if (nd < dist[v]) {
          dist[v] = nd;
          pred[v] = u;
          heap.push({nd, v});
        } else if (nd == dist[v] && pred[v] > u) {
          pred[v] = u;
        }
      }
    }
    if (!done[b] && a != b) throw NoRouteError("shortest_path: no route between nodes");
    RoutePath path;
    path.length_km = dist[b];
    for (int v = b; v != -1; v = pred[v]) path.nodes.push_back(v);
    std::reverse(path.nodes.begin(), path.nodes.end());
    return path;
  }

  // Single-source distances; used for destination filtering.
  std::vector<double> distances_from(int a) const {
    int n = static_cast<int>(nodes_.size());
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<bool> done(n, false);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    dist[a] = 0.0;
    heap.push({0.0, a});
    while (!heap.empty()) {
      auto [d, u] = heap.top();
      heap.pop();
      if (done[u]) continue;
      done[u] = true;
      for (auto [v, w] : adj_[u]) {
        if (d + w < dist[v]) {
          dist[v] = d + w;
          heap.push({dist[v], v});
        }
      }
    }
    return dist;
  }

 private:
  bool connected() const {
    std::vector<bool> seen(nodes_.size(), false);
    std::vector<int> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (auto [v, w] : adj_[u]) {
        if (!seen[v]) {
          seen[v] = true;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == nodes_.size();
  }

  std::vector<Point> nodes_;
  std::vector<RoadEdge> edges_;
  std::vector<std::vector<std::pair<int, double>>> adj_;
};

}  // namespace voltsite
