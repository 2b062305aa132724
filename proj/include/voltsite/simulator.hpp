#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "voltsite/common.hpp"
#include "voltsite/rng.hpp"
#include "voltsite/scenario.hpp"

namespace voltsite {

struct SimulationConfig {
  double duration_hours = 24.0;
  double tick_seconds = 60.0;
  double soc_consider_threshold = 0.30;  // users may decide to charge here
  double soc_stop_threshold = 0.80;      // users may decide to stop here
  double p_charge_at_30 = 0.5;
  double p_stop_at_80 = 0.5;
  double soc_forced_threshold = 0.10;    // below this, seeking is mandatory
  double min_trip_km = 1.0;
  double queue_factor = 2.0;             // queue capacity = ceil(factor * ports)
  double init_soc_min = 0.4;
  double init_soc_max = 1.0;
  double speed_min_kmh = 40.0;
  double speed_max_kmh = 50.0;
  std::uint64_t seed = 0;
  bool record_events = false;

  void validate() const {
    if (!(duration_hours > 0.0)) throw ConfigError("sim.duration_hours: must be > 0");
    if (!(tick_seconds > 0.0)) throw ConfigError("sim.tick_seconds: must be > 0");
    if (!(0.0 < soc_forced_threshold && soc_forced_threshold < soc_consider_threshold &&
          soc_consider_threshold < soc_stop_threshold && soc_stop_threshold <= 1.0))
      throw ConfigError("sim: need 0 < forced < consider < stop <= 1 thresholds");
    if (!(queue_factor >= 0.0)) throw ConfigError("sim.queue_factor: must be >= 0");
    if (!(init_soc_min >= 0.0 && init_soc_min <= init_soc_max && init_soc_max <= 1.0))
      throw ConfigError("sim.init_soc: need 0 <= min <= max <= 1");
  }
};

enum class VehicleMode { driving, seeking, queued, charging, idle, stranded };

struct VehicleState {
  int id = -1;
  VehicleSpec spec;
  double soc = 1.0;
  Point position;
  double speed_kmh = 45.0;
  VehicleMode mode = VehicleMode::driving;
  int destination_building = -1;
  bool declined_30 = false;
  double wait_clock_hours = 0.0;
  double enqueue_time_h = 0.0;

  // movement: polyline route with cumulative km per waypoint
  std::vector<Point> route;
  std::vector<double> route_cum;
  double progress_km = 0.0;
  int target_station = -1;
  std::vector<bool> rejected_stations;
  bool consider_armed = true;  // the 30% decision fires once per discharge cycle
};

struct StationStats {
  std::string id;
  double mean_wait_hours = 0.0;
  int wait_episodes = 0;
  int arrivals = 0;
  int sessions_completed = 0;
};

struct SimulationResult {
  std::vector<double> wait_episodes_hours;  // one entry per charging start
  std::vector<StationStats> per_station;
  double total_charging_hours = 0.0;  // time spent charging within the horizon
  double system_mean_wait_hours = 0.0;
  int sessions_started = 0;
  int sessions_completed = 0;
  int stranded = 0;
  int still_queued_at_end = 0;

  bool any_sessions() const { return sessions_started > 0; }
};

struct SimEvent {
  int tick = 0;
  int vehicle = -1;
  std::string event;
  std::string station;
  double soc = 0.0;
  double wait_hours = 0.0;
};

enum class ChargeDecision { start_seeking, keep_driving };
enum class ArrivalOutcome { charging, enqueued, rejected };
enum class StopChoice { stop, continue_to_full };

// Called when SoC first crosses the 30% threshold downward, and every tick at
// or below the forced threshold. Declining at 30% arms the forced branch.
inline ChargeDecision decide_charging(const VehicleState& v, const SimulationConfig& cfg,
                                      Rng& rng) {
  if (v.soc <= cfg.soc_forced_threshold) return ChargeDecision::start_seeking;
  return rng.bernoulli(cfg.p_charge_at_30) ? ChargeDecision::start_seeking
                                           : ChargeDecision::keep_driving;
}

inline StopChoice stop_decision(const VehicleState&, const SimulationConfig& cfg, Rng& rng) {
  return rng.bernoulli(cfg.p_stop_at_80) ? StopChoice::stop : StopChoice::continue_to_full;
}

// Linear charging model: hours to move between SoC levels at a fixed power.
inline double charging_duration(double capacity_kwh, double soc_from, double soc_to,
                                double power_kw) {
  if (!(power_kw > 0.0)) throw std::invalid_argument("charging_duration: power must be > 0");
  if (!(soc_from >= 0.0 && soc_to <= 1.0 && soc_from < soc_to))
    throw std::invalid_argument("charging_duration: need 0 <= soc_from < soc_to <= 1");
  return capacity_kwh * (soc_to - soc_from) / power_kw;
}

// Uniform choice among buildings at least min_trip away by road (never the
// current building); when none qualify, the farthest one.
inline int pick_destination_index(std::span<const double> building_distances,
                                  int current_building, double min_trip_km, Rng& rng) {
  std::vector<int> eligible;
  for (std::size_t b = 0; b < building_distances.size(); ++b) {
    if (static_cast<int>(b) == current_building) continue;
    if (building_distances[b] >= min_trip_km) eligible.push_back(static_cast<int>(b));
  }
  if (!eligible.empty())
    return eligible[rng.uniform_int(0, static_cast<int>(eligible.size()) - 1)];
  int best = -1;
  double best_d = -1.0;
  for (std::size_t b = 0; b < building_distances.size(); ++b) {
    if (static_cast<int>(b) == current_building && building_distances.size() > 1) continue;
    if (building_distances[b] > best_d) {
      best_d = building_distances[b];
      best = static_cast<int>(b);
    }
  }
  return best;
}

inline int pick_destination(const Point& position, int current_building, const Scenario& scn,
                            const SimulationConfig& cfg, Rng& rng) {
  int cur = scn.roads.nearest_node(position);
  std::vector<double> node_dist = scn.roads.distances_from(cur);
  std::vector<double> building_dist;
  building_dist.reserve(scn.buildings.size());
  for (const auto& b : scn.buildings)
    building_dist.push_back(node_dist[scn.roads.nearest_node(b)]);
  return pick_destination_index(building_dist, current_building, cfg.min_trip_km, rng);
}

// Port assignment on arrival: the highest-power free port (ties to the lowest
// index), else the FIFO queue, else rejection.
inline ArrivalOutcome arrive_at_station(ChargingStation& st, int vehicle_id,
                                        int* port_index_out = nullptr) {
  int best = -1;
  double best_power = -1.0;
  for (std::size_t i = 0; i < st.ports.size(); ++i)
    if (st.ports[i].occupant < 0 && st.ports[i].power_kw > best_power) {
      best_power = st.ports[i].power_kw;
      best = static_cast<int>(i);
    }
  if (best >= 0) {
    st.ports[best].occupant = vehicle_id;
    if (port_index_out) *port_index_out = best;
    return ArrivalOutcome::charging;
  }
  if (static_cast<int>(st.queue.size()) < st.queue_capacity) {
    st.queue.push_back(vehicle_id);
    return ArrivalOutcome::enqueued;
  }
  return ArrivalOutcome::rejected;
}

namespace detail {

struct Session {
  int vehicle = -1;
  int port = -1;
  double start_h = 0.0;
  double soc_start = 0.0;
  double phase_target = 1.0;
  double phase_end_h = 0.0;
  bool stop_decided = false;
};

class SimWorld {
 public:
  SimWorld(const Scenario& scenario, std::vector<ChargingStation> stations,
           const SimulationConfig& cfg, std::uint64_t seed, std::vector<SimEvent>* events)
      : scn_(scenario),
        stations_(std::move(stations)),
        cfg_(cfg),
        events_(events),
        rng_init_(Rng(seed).stream("vehicle-init")),
        rng_decisions_(Rng(seed).stream("decisions")),
        rng_destinations_(Rng(seed).stream("destinations")) {
    cfg_.validate();
    if (stations_.empty()) throw std::invalid_argument("run: station list must not be empty");
    int total_ports = 0;
    for (auto& st : stations_) {
      st.queue.clear();
      st.queue_capacity =
          static_cast<int>(std::ceil(cfg_.queue_factor * static_cast<double>(st.ports.size())));
      for (auto& p : st.ports) p.occupant = -1;
      total_ports += static_cast<int>(st.ports.size());
    }
    if (total_ports == 0) throw ConfigError("run: zero ports across all stations");
    sessions_.assign(stations_.size(), {});
    for (std::size_t i = 0; i < stations_.size(); ++i)
      sessions_[i].assign(stations_[i].ports.size(), std::nullopt);
    waits_by_station_.assign(stations_.size(), {});
    arrivals_.assign(stations_.size(), 0);
    completed_.assign(stations_.size(), 0);

    building_node_.reserve(scn_.buildings.size());
    for (const auto& b : scn_.buildings) building_node_.push_back(scn_.roads.nearest_node(b));

    dt_h_ = cfg_.tick_seconds / 3600.0;
    ticks_ = static_cast<int>(std::llround(cfg_.duration_hours / dt_h_));

    spawn_vehicles();
  }

  SimulationResult run() {
    for (tick_ = 0; tick_ < ticks_; ++tick_) {
      now_ = tick_ * dt_h_;
      process_completions();
      process_admissions();
      process_vehicles();
      check_invariants();
    }
    return collect();
  }

 private:
  void emit(int vehicle, const std::string& event, int station, double soc, double wait = 0.0) {
    if (!events_) return;
    events_->push_back(
        {tick_, vehicle, event, station >= 0 ? stations_[station].id : "", soc, wait});
  }

  void spawn_vehicles() {
    int id = 0;
    int n_nodes = static_cast<int>(scn_.roads.nodes().size());
    for (const auto& entry : scn_.fleet) {
      for (int k = 0; k < entry.count; ++k) {
        VehicleState v;
        v.id = id++;
        v.spec = entry.spec;
        v.speed_kmh = rng_init_.uniform(cfg_.speed_min_kmh, cfg_.speed_max_kmh);
        v.soc = rng_init_.uniform(cfg_.init_soc_min, cfg_.init_soc_max);
        v.position = scn_.roads.nodes()[rng_init_.uniform_int(0, n_nodes - 1)];
        v.consider_armed = v.soc > cfg_.soc_consider_threshold;
        v.rejected_stations.assign(stations_.size(), false);
        vehicles_.push_back(std::move(v));
      }
    }
    tick_ = 0;
    now_ = 0.0;
    for (auto& v : vehicles_) start_new_trip(v);
  }

  const std::vector<double>& road_distances(int node) {
    auto it = dist_cache_.find(node);
    if (it == dist_cache_.end())
      it = dist_cache_.emplace(node, scn_.roads.distances_from(node)).first;
    return it->second;
  }

  int pick_next_destination(VehicleState& v) {
    int cur_node = scn_.roads.nearest_node(v.position);
    const std::vector<double>& dist = road_distances(cur_node);
    std::vector<double> building_dist;
    building_dist.reserve(scn_.buildings.size());
    for (std::size_t b = 0; b < scn_.buildings.size(); ++b)
      building_dist.push_back(dist[building_node_[b]]);
    return pick_destination_index(building_dist, v.destination_building, cfg_.min_trip_km,
                                  rng_destinations_);
  }

  void set_route(VehicleState& v, const Point& goal) {
    v.route.clear();
    v.route_cum.clear();
    v.progress_km = 0.0;
    v.route.push_back(v.position);
    int n0 = scn_.roads.nearest_node(v.position);
    int n1 = scn_.roads.nearest_node(goal);
    RoutePath rp = scn_.roads.shortest_path(n0, n1);
    for (int node : rp.nodes) v.route.push_back(scn_.roads.nodes()[node]);
    v.route.push_back(goal);
    v.route_cum.push_back(0.0);
    for (std::size_t i = 1; i < v.route.size(); ++i)
      v.route_cum.push_back(v.route_cum.back() + planar_distance(v.route[i - 1], v.route[i]));
  }

  Point route_point(const VehicleState& v) const {
    double s = v.progress_km;
    for (std::size_t i = 1; i < v.route.size(); ++i) {
      if (s <= v.route_cum[i] || i + 1 == v.route.size()) {
        double seg = v.route_cum[i] - v.route_cum[i - 1];
        if (seg <= 0.0) continue;
        double t = std::clamp((s - v.route_cum[i - 1]) / seg, 0.0, 1.0);
        const Point& a = v.route[i - 1];
        const Point& b = v.route[i];
        return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
      }
    }
    return v.route.back();
  }

  void start_new_trip(VehicleState& v) {
    v.destination_building = pick_next_destination(v);
    std::fill(v.rejected_stations.begin(), v.rejected_stations.end(), false);
    v.target_station = -1;
    v.mode = VehicleMode::driving;
    set_route(v, scn_.buildings[v.destination_building]);
    emit(v.id, "destination", -1, v.soc);
  }

  void start_seeking(VehicleState& v) {
    v.mode = VehicleMode::seeking;
    if (!choose_station(v)) {
      v.mode = VehicleMode::idle;  // everything rejected: retry next tick
      return;
    }
    emit(v.id, "seek", v.target_station, v.soc);
  }

  bool choose_station(VehicleState& v) {
    int best = -1;
    double best_d = 0.0;
    for (std::size_t i = 0; i < stations_.size(); ++i) {
      if (v.rejected_stations[i]) continue;
      double d = planar_distance(v.position, stations_[i].location);
      if (best < 0 || d < best_d) {
        best = static_cast<int>(i);
        best_d = d;
      }
    }
    if (best < 0) return false;
    v.target_station = best;
    set_route(v, stations_[best].location);
    return true;
  }

  void begin_session(int si, int port, VehicleState& v, double wait_h) {
    const ChargingStation& st = stations_[si];
    Session ses;
    ses.vehicle = v.id;
    ses.port = port;
    ses.start_h = now_;
    ses.soc_start = v.soc;
    ses.stop_decided = cfg_.soc_stop_threshold >= 1.0 || v.soc >= cfg_.soc_stop_threshold;
    ses.phase_target = ses.stop_decided ? 1.0 : cfg_.soc_stop_threshold;
    ses.phase_end_h =
        now_ + charging_duration(v.spec.capacity_kwh, v.soc, ses.phase_target,
                                 st.ports[port].power_kw);
    sessions_[si][port] = ses;
    v.mode = VehicleMode::charging;
    v.target_station = si;
    wait_records_.push_back(wait_h);
    waits_by_station_[si].push_back(wait_h);
    ++sessions_started_;
    emit(v.id, "charge_start", si, v.soc, wait_h);
  }

  void process_completions() {
    for (std::size_t si = 0; si < stations_.size(); ++si) {
      for (std::size_t pi = 0; pi < stations_[si].ports.size(); ++pi) {
        auto& slot = sessions_[si][pi];
        while (slot && slot->phase_end_h <= now_ + 1e-12) {
          VehicleState& v = vehicles_[slot->vehicle];
          if (!slot->stop_decided) {
            v.soc = slot->phase_target;
            slot->stop_decided = true;
            if (stop_decision(v, cfg_, rng_decisions_) == StopChoice::continue_to_full) {
              double power = stations_[si].ports[pi].power_kw;
              slot->phase_end_h +=
                  charging_duration(v.spec.capacity_kwh, v.soc, 1.0, power);
              slot->phase_target = 1.0;
              continue;
            }
          }
          // session complete
          v.soc = slot->phase_target;
          double duration = slot->phase_end_h - slot->start_h;
          total_charging_h_ += duration;
          ++completed_[si];
          ++sessions_completed_;
          stations_[si].ports[pi].occupant = -1;
          v.declined_30 = false;
          v.consider_armed = v.soc > cfg_.soc_consider_threshold;
          emit(v.id, "charge_end", static_cast<int>(si), v.soc, duration);
          slot.reset();
          start_new_trip(v);
        }
      }
    }
  }

  void process_admissions() {
    for (std::size_t si = 0; si < stations_.size(); ++si) {
      ChargingStation& st = stations_[si];
      while (!st.queue.empty()) {
        int best = -1;
        double best_power = -1.0;
        for (std::size_t pi = 0; pi < st.ports.size(); ++pi)
          if (st.ports[pi].occupant < 0 && st.ports[pi].power_kw > best_power) {
            best_power = st.ports[pi].power_kw;
            best = static_cast<int>(pi);
          }
        if (best < 0) break;
        int vid = st.queue.front();
        st.queue.pop_front();
        st.ports[best].occupant = vid;
        VehicleState& v = vehicles_[vid];
        double wait = now_ - v.enqueue_time_h;  // enqueue-to-start, tick exact
        v.wait_clock_hours = 0.0;
        begin_session(static_cast<int>(si), best, v, wait);
      }
    }
  }

  void handle_arrival(VehicleState& v) {
    while (true) {
      int si = v.target_station;
      ChargingStation& st = stations_[si];
      ++arrivals_[si];
      emit(v.id, "arrive", si, v.soc);
      int port = -1;
      ArrivalOutcome out = arrive_at_station(st, v.id, &port);
      if (out == ArrivalOutcome::charging) {
        begin_session(si, port, v, 0.0);
        return;
      }
      if (out == ArrivalOutcome::enqueued) {
        v.mode = VehicleMode::queued;
        v.wait_clock_hours = 0.0;
        v.enqueue_time_h = now_;
        emit(v.id, "enqueue", si, v.soc);
        return;
      }
      v.rejected_stations[si] = true;
      emit(v.id, "reject", si, v.soc);
      if (!choose_station(v)) {
        v.mode = VehicleMode::idle;  // retry set resets next tick
        return;
      }
      // next-nearest target chosen; if already there (zero route), loop again
      if (v.route_cum.back() > 1e-12) return;
    }
  }

  void process_vehicles() {
    for (auto& v : vehicles_) {
      switch (v.mode) {
        case VehicleMode::charging:
        case VehicleMode::stranded:
          continue;
        case VehicleMode::queued:
          v.wait_clock_hours = now_ + dt_h_ - v.enqueue_time_h;
          continue;
        case VehicleMode::idle:
          std::fill(v.rejected_stations.begin(), v.rejected_stations.end(), false);
          start_seeking(v);
          continue;
        case VehicleMode::driving:
        case VehicleMode::seeking:
          break;
      }

      // advance along the route, truncated at its end
      double remaining = v.route_cum.back() - v.progress_km;
      double dist = std::min(v.speed_kmh * dt_h_, std::max(0.0, remaining));
      if (dist > 0.0) {
        v.progress_km += dist;
        v.position = route_point(v);
        v.soc -= dist * v.spec.consumption_kwh_per_km / v.spec.capacity_kwh;
      }
      if (v.soc <= 0.0) {
        v.soc = 0.0;
        v.mode = VehicleMode::stranded;
        ++stranded_;
        emit(v.id, "strand", -1, v.soc);
        continue;
      }

      if (v.mode == VehicleMode::driving) {
        if (v.soc <= cfg_.soc_forced_threshold) {
          start_seeking(v);
        } else if (v.consider_armed && v.soc <= cfg_.soc_consider_threshold) {
          v.consider_armed = false;
          if (decide_charging(v, cfg_, rng_decisions_) == ChargeDecision::start_seeking)
            start_seeking(v);
          else
            v.declined_30 = true;
        }
      }

      bool arrived = v.progress_km >= v.route_cum.back() - 1e-12;
      if (!arrived) continue;
      if (v.mode == VehicleMode::seeking)
        handle_arrival(v);
      else if (v.mode == VehicleMode::driving)
        start_new_trip(v);
    }
  }

  void check_invariants() const {
    for (const auto& v : vehicles_) {
      if (v.soc < -1e-12 || v.soc > 1.0 + 1e-12)
        throw std::logic_error("simulator invariant: SoC out of [0,1]");
      if (v.wait_clock_hours < 0.0)
        throw std::logic_error("simulator invariant: negative wait clock");
    }
    std::vector<bool> seen(vehicles_.size(), false);
    for (std::size_t si = 0; si < stations_.size(); ++si) {
      const auto& st = stations_[si];
      if (static_cast<int>(st.queue.size()) > st.queue_capacity)
        throw std::logic_error("simulator invariant: queue over capacity at " + st.id);
      for (const auto& p : st.ports)
        if (p.occupant >= 0) {
          if (seen[p.occupant])
            throw std::logic_error("simulator invariant: vehicle on two ports");
          seen[p.occupant] = true;
        }
    }
  }

  SimulationResult collect() const {
    SimulationResult r;
    r.wait_episodes_hours = wait_records_;
    double sum = 0.0;
    for (double w : wait_records_) sum += w;
    r.system_mean_wait_hours = wait_records_.empty() ? 0.0 : sum / wait_records_.size();
    r.total_charging_hours = total_charging_h_;
    double horizon = ticks_ * dt_h_;
    for (std::size_t si = 0; si < stations_.size(); ++si) {
      // in-progress sessions count their elapsed time toward the total
      for (const auto& slot : sessions_[si])
        if (slot) r.total_charging_hours += horizon - slot->start_h;
      StationStats st;
      st.id = stations_[si].id;
      st.arrivals = arrivals_[si];
      st.sessions_completed = completed_[si];
      st.wait_episodes = static_cast<int>(waits_by_station_[si].size());
      double s = 0.0;
      for (double w : waits_by_station_[si]) s += w;
      st.mean_wait_hours = waits_by_station_[si].empty() ? 0.0 : s / waits_by_station_[si].size();
      r.per_station.push_back(std::move(st));
    }
    r.sessions_started = sessions_started_;
    r.sessions_completed = sessions_completed_;
    r.stranded = stranded_;
    for (const auto& st : stations_) r.still_queued_at_end += static_cast<int>(st.queue.size());
    return r;
  }

  const Scenario& scn_;
  std::vector<ChargingStation> stations_;
  SimulationConfig cfg_;
  std::vector<SimEvent>* events_;
  Rng rng_init_;
  Rng rng_decisions_;
  Rng rng_destinations_;
  std::vector<VehicleState> vehicles_;
  std::vector<std::vector<std::optional<Session>>> sessions_;
  std::vector<std::vector<double>> waits_by_station_;
  std::vector<int> arrivals_;
  std::vector<int> completed_;
  std::vector<int> building_node_;
  std::map<int, std::vector<double>> dist_cache_;
  std::vector<double> wait_records_;
  double total_charging_h_ = 0.0;
  int sessions_started_ = 0;
  int sessions_completed_ = 0;
  int stranded_ = 0;
  double dt_h_ = 1.0 / 60.0;
  int ticks_ = 0;
  int tick_ = 0;
  double now_ = 0.0;
};

}  // namespace detail

// Run the 24-hour (by default) agent simulation over the given station set.
// Deterministic for fixed (scenario, stations, config, seed).
inline SimulationResult run_simulation(const Scenario& scenario,
                                       std::vector<ChargingStation> stations,
                                       const SimulationConfig& cfg, std::uint64_t seed,
                                       std::vector<SimEvent>* events = nullptr) {
  detail::SimWorld world(scenario, std::move(stations), cfg, seed, events);
  return world.run();
}

inline nlohmann::json result_to_json(const SimulationResult& r) {
  nlohmann::json j;
  j["system_mean_wait_hours"] = r.system_mean_wait_hours;
  j["total_charging_hours"] = r.total_charging_hours;
  j["sessions_started"] = r.sessions_started;
  j["sessions_completed"] = r.sessions_completed;
  j["stranded"] = r.stranded;
  j["still_queued_at_end"] = r.still_queued_at_end;
  j["wait_episodes_hours"] = r.wait_episodes_hours;
  j["per_station"] = nlohmann::json::array();
  for (const auto& st : r.per_station)
    j["per_station"].push_back({{"id", st.id},
                                {"mean_wait_hours", st.mean_wait_hours},
                                {"wait_episodes", st.wait_episodes},
                                {"arrivals", st.arrivals},
                                {"sessions_completed", st.sessions_completed}});
  return j;
}

inline void write_event_csv(const std::vector<SimEvent>& events, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write event log: " + path);
  out << "tick,vehicle_id,event,station_id,soc,wait_hours\n";
  char buf[160];
  for (const auto& e : events) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%s,%s,%.9g,%.9g\n", e.tick, e.vehicle,
                  e.event.c_str(), e.station.c_str(), e.soc, e.wait_hours);
    out << buf;
  }
}

}  // namespace voltsite
