#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "voltsite/geometry.hpp"
#include "voltsite/simulator.hpp"
#include "voltsite/station.hpp"

namespace voltsite {

// Mean over all waiting episodes; zero-wait episodes count. Returns nullopt
// when no charging session ever started (no data, distinct from zero).
inline std::optional<double> mean_wait(const SimulationResult& r) {
  if (!r.any_sessions()) return std::nullopt;
  double sum = 0.0;
  for (double w : r.wait_episodes_hours) sum += w;
  return r.wait_episodes_hours.empty() ? 0.0 : sum / r.wait_episodes_hours.size();
}

// Relative wait reduction versus a baseline, in percent.
inline double gap_percent(double wait_baseline, double wait) {
  if (!(wait_baseline > 0.0)) throw std::invalid_argument("gap: baseline wait must be > 0");
  return 100.0 * (wait_baseline - wait) / wait_baseline;
}

// Mean distance of each new station to the nearest station existing at its
// placement time (plans are ordered, so earlier new stations count).
inline double mean_proximity(std::span<const Point> new_stations, std::span<const Point> existing,
                             CoordinateMode mode = CoordinateMode::planar) {
  if (new_stations.empty() || existing.empty())
    throw std::invalid_argument("mean_proximity: both lists must be non-empty");
  std::vector<Point> pool(existing.begin(), existing.end());
  double sum = 0.0;
  for (const Point& p : new_stations) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point& q : pool) best = std::min(best, distance(p, q, mode));
    sum += best;
    pool.push_back(p);
  }
  return sum / static_cast<double>(new_stations.size());
}

// Charging Station Sizing Index: mean over stations of the port counts
// weighted by the sizing scale s_j = 0.1 * j.
inline double cssi(std::span<const ChargingStation> stations,
                   const PortCatalog& catalog = PortCatalog::standard()) {
  if (stations.empty()) throw std::invalid_argument("cssi: at least one station required");
  double sum = 0.0;
  for (const auto& st : stations)
    for (const auto& p : st.ports) sum += catalog.type(p.type).sizing_scale;
  return sum / static_cast<double>(stations.size());
}

struct MetricsReport {
  std::string method;
  std::vector<std::uint64_t> seeds;
  double wait_hours = 0.0;  // median over seeds
  std::optional<double> gap = std::nullopt;
  double total_charging_hours = 0.0;
  std::optional<double> mean_proximity_km = std::nullopt;
  std::optional<double> cssi_value = std::nullopt;
  std::vector<double> per_seed_wait;
  std::vector<StationStats> per_station;  // from the first seed's run
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty input");
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline nlohmann::json report_to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["method"] = r.method;
  j["seeds"] = r.seeds;
  j["wait_hours"] = r.wait_hours;
  if (r.gap) j["gap_percent"] = *r.gap;
  j["total_charging_hours"] = r.total_charging_hours;
  if (r.mean_proximity_km) j["mean_proximity_km"] = *r.mean_proximity_km;
  if (r.cssi_value) j["cssi"] = *r.cssi_value;
  j["per_seed_wait"] = r.per_seed_wait;
  j["per_station"] = nlohmann::json::array();
  for (const auto& st : r.per_station)
    j["per_station"].push_back({{"id", st.id},
                                {"mean_wait_hours", st.mean_wait_hours},
                                {"wait_episodes", st.wait_episodes},
                                {"arrivals", st.arrivals},
                                {"sessions_completed", st.sessions_completed}});
  return j;
}

inline MetricsReport report_from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.method = j.at("method").get<std::string>();
  r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  r.wait_hours = j.at("wait_hours").get<double>();
  if (j.contains("gap_percent")) r.gap = j.at("gap_percent").get<double>();
  r.total_charging_hours = j.at("total_charging_hours").get<double>();
  if (j.contains("mean_proximity_km")) r.mean_proximity_km = j.at("mean_proximity_km").get<double>();
  if (j.contains("cssi")) r.cssi_value = j.at("cssi").get<double>();
  r.per_seed_wait = j.at("per_seed_wait").get<std::vector<double>>();
  for (const auto& sj : j.at("per_station")) {
    StationStats st;
    st.id = sj.at("id").get<std::string>();
    st.mean_wait_hours = sj.at("mean_wait_hours").get<double>();
    st.wait_episodes = sj.at("wait_episodes").get<int>();
    st.arrivals = sj.at("arrivals").get<int>();
    st.sessions_completed = sj.at("sessions_completed").get<int>();
    r.per_station.push_back(std::move(st));
  }
  return r;
}

// CSV: one header plus one row per station.
inline void write_report_csv(const MetricsReport& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report csv: " + path.string());
  out << "station_id,mean_wait_hours,wait_episodes,arrivals,sessions_completed\n";
  char buf[200];
  for (const auto& st : r.per_station) {
    std::snprintf(buf, sizeof(buf), "%s,%.9g,%d,%d,%d\n", st.id.c_str(), st.mean_wait_hours,
                  st.wait_episodes, st.arrivals, st.sessions_completed);
    out << buf;
  }
}

}  // namespace voltsite
