#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "voltsite/geometry.hpp"
#include "voltsite/station.hpp"

namespace voltsite {

struct PlannedStation {
  Point location;
  int port_type = 0;  // 0 until a port strategy assigns one
  int port_count = 0;
};

// An ordered list of k new stations with provenance.
struct PlacementPlan {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<PlannedStation> stations;
};

inline std::vector<ChargingStation> plan_to_stations(const PlacementPlan& plan,
                                                     const std::string& id_prefix = "new") {
  std::vector<ChargingStation> out;
  out.reserve(plan.stations.size());
  for (std::size_t i = 0; i < plan.stations.size(); ++i) {
    const PlannedStation& p = plan.stations[i];
    out.push_back(make_station(id_prefix + std::to_string(i), p.location, p.port_type,
                               p.port_count));
  }
  return out;
}

inline nlohmann::json plan_to_json(const PlacementPlan& plan) {
  nlohmann::json j;
  j["method"] = plan.method;
  j["seed"] = plan.seed;
  j["stations"] = nlohmann::json::array();
  for (const auto& s : plan.stations)
    j["stations"].push_back({{"x", s.location.x},
                             {"y", s.location.y},
                             {"port_type", s.port_type},
                             {"port_count", s.port_count}});
  return j;
}

inline PlacementPlan plan_from_json(const nlohmann::json& j) {
  PlacementPlan plan;
  plan.method = j.at("method").get<std::string>();
  plan.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& sj : j.at("stations")) {
    PlannedStation s;
    s.location = {sj.at("x").get<double>(), sj.at("y").get<double>()};
    s.port_type = sj.at("port_type").get<int>();
    s.port_count = sj.at("port_count").get<int>();
    plan.stations.push_back(s);
  }
  return plan;
}

}  // namespace voltsite
