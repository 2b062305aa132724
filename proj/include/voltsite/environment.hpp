#pragma once

#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voltsite/rewards.hpp"
#include "voltsite/rng.hpp"
#include "voltsite/scenario.hpp"
#include "voltsite/simulator.hpp"
#include "voltsite/voronoi.hpp"

namespace voltsite {

// Candidate features: distance to the nearest station and substation,
// population density, station count within the neighborhood radius, and the
// local mean waiting time from the most recent simulation.
struct StateVector {
  double d_nearest_km = 0.0;
  double d_nearest_sub_km = 0.0;
  double rho = 0.0;
  int n_stations = 0;
  double t_avg_hours = 0.0;
};

struct Action {
  int loc = 0;   // index into the current candidate list
  int port = 1;  // port type j in 1..10
};

inline StateVector observe(const Point& candidate, std::span<const ChargingStation> stations,
                           std::span<const Point> substations, const PopulationRaster& raster,
                           const SimulationResult* sim, const RewardWeights& weights,
                           CoordinateMode mode = CoordinateMode::planar) {
  if (stations.empty()) throw std::invalid_argument("observe: station list must not be empty");
  if (substations.empty())
    throw std::invalid_argument("observe: substation list must not be empty");
  StateVector s;
  s.d_nearest_km = std::numeric_limits<double>::infinity();
  for (const auto& st : stations)
    s.d_nearest_km = std::min(s.d_nearest_km, distance(candidate, st.location, mode));
  s.d_nearest_sub_km = std::numeric_limits<double>::infinity();
  for (const auto& sub : substations)
    s.d_nearest_sub_km = std::min(s.d_nearest_sub_km, distance(candidate, sub, mode));
  s.rho = raster.density_at(candidate);

  double wait_sum = 0.0;
  int wait_count = 0;
  for (const auto& st : stations) {
    if (distance(candidate, st.location, mode) > weights.neighborhood_radius_km) continue;
    ++s.n_stations;
    if (sim) {
      for (const auto& stat : sim->per_station)
        if (stat.id == st.id) {
          wait_sum += stat.mean_wait_hours;
          ++wait_count;
          break;
        }
    }
  }
  if (wait_count > 0)
    s.t_avg_hours = wait_sum / wait_count;
  else if (sim)
    s.t_avg_hours = sim->system_mean_wait_hours;  // no station within r: system mean
  return s;
}

struct EnvConfig {
  RewardWeights weights;
  ExistRewardForm exist_form = ExistRewardForm::prose;
  int ports_per_station = 4;
  double min_separation_km = 0.05;
  bool use_simulation = true;
  // ablation: score r_wait from the chosen candidate's pre-placement local
  // t_avg instead of the post-placement simulated system wait
  bool wait_reward_pre_placement = false;
  SimulationConfig sim;
};

struct StepOutcome {
  RewardBreakdown reward;
  std::optional<SimulationResult> sim;
};

struct RewardTraceRow {
  int step = 0;
  Point candidate;
  int port_type = 0;
  RewardBreakdown reward;
  double sim_mean_wait = 0.0;
};

// The placement world: a station set, its Voronoi candidate list, per-candidate
// states, and the last simulation outcome. step() mutates it by one placement.
class PlacementEnv {
 public:
  PlacementEnv(const Scenario& scenario, EnvConfig cfg)
      : scn_(&scenario), cfg_(std::move(cfg)) {}

  // Start from one uniformly random station with a frequency-weighted port type.
  void reset_single_random(std::uint64_t seed) {
    Rng rng = Rng(seed).stream("reset");
    Point p{rng.uniform(scn_->domain.min_x, scn_->domain.max_x),
            rng.uniform(scn_->domain.min_y, scn_->domain.max_y)};
    if (scn_->coordinate_mode == CoordinateMode::geographic && scn_->geo_origin)
      p.geo = geo_from_planar(p, *scn_->geo_origin);
    const PortCatalog& cat = PortCatalog::standard();
    std::vector<double> w = cat.frequency_weights();
    int type = static_cast<int>(rng.weighted_index(w)) + 1;
    stations_.clear();
    stations_.push_back(make_station("init0", p, type, cfg_.ports_per_station));
    placed_ = 0;
    after_station_change(Rng(seed).stream("init-sim").seed());
  }

  // Start from the scenario's existing station set.
  void reset_existing(std::uint64_t seed) {
    stations_ = scn_->stations;
    placed_ = 0;
    after_station_change(Rng(seed).stream("init-sim").seed());
  }

  StepOutcome step(const Action& a, std::uint64_t sim_seed) {
    if (a.loc < 0 || a.loc >= static_cast<int>(candidates_.size()))
      throw std::invalid_argument("step: candidate index out of range");
    if (a.port < 1 || a.port > 10) throw std::invalid_argument("step: port type out of range");

    const StateVector pre = states_[a.loc];
    Point site = candidates_[a.loc];

    StepOutcome out;
    out.reward.pop = reward_pop(pre.rho, scn_->raster.rho_max(), cfg_.weights);
    out.reward.exist = reward_exist(pre.d_nearest_km, cfg_.weights, cfg_.exist_form);
    out.reward.sub = reward_sub(pre.d_nearest_sub_km, cfg_.weights);

    ChargingStation st =
        make_station("rl" + std::to_string(placed_++), site, a.port, cfg_.ports_per_station);
    if (scn_->coordinate_mode == CoordinateMode::geographic && scn_->geo_origin && !st.location.geo)
      st.location.geo = geo_from_planar(st.location, *scn_->geo_origin);
    stations_.push_back(std::move(st));
    after_station_change(sim_seed);

    if (cfg_.use_simulation && !cfg_.wait_reward_pre_placement)
      out.reward.wait = reward_wait(last_sim_->system_mean_wait_hours, cfg_.weights);
    else
      out.reward.wait = reward_wait(pre.t_avg_hours, cfg_.weights);
    if (last_sim_) out.sim = *last_sim_;
    return out;
  }

  const std::vector<Point>& candidates() const { return candidates_; }
  const std::vector<StateVector>& candidate_states() const { return states_; }
  const std::vector<ChargingStation>& stations() const { return stations_; }
  const std::optional<SimulationResult>& last_sim() const { return last_sim_; }
  const Scenario& scenario() const { return *scn_; }
  const EnvConfig& config() const { return cfg_; }

 private:
  void after_station_change(std::uint64_t sim_seed) {
    if (cfg_.use_simulation)
      last_sim_ = run_simulation(*scn_, stations_, cfg_.sim, sim_seed);
    else
      last_sim_.reset();
    std::vector<Point> sites;
    sites.reserve(stations_.size());
    for (const auto& st : stations_) sites.push_back(st.location);
    VoronoiDiagram d = compute_diagram(sites, scn_->domain);
    candidates_ = candidate_vertices(d, sites, cfg_.min_separation_km);
    if (candidates_.empty())
      throw std::runtime_error("environment: empty candidate set after placement");
    if (scn_->coordinate_mode == CoordinateMode::geographic && scn_->geo_origin)
      for (auto& c : candidates_) c.geo = geo_from_planar(c, *scn_->geo_origin);
    states_.clear();
    states_.reserve(candidates_.size());
    for (const auto& c : candidates_)
      states_.push_back(observe(c, stations_, scn_->substations, scn_->raster,
                                last_sim_ ? &*last_sim_ : nullptr, cfg_.weights,
                                scn_->coordinate_mode));
  }

  const Scenario* scn_;
  EnvConfig cfg_;
  std::vector<ChargingStation> stations_;
  std::vector<Point> candidates_;
  std::vector<StateVector> states_;
  std::optional<SimulationResult> last_sim_;
  int placed_ = 0;
};

inline void write_reward_trace_csv(const std::vector<RewardTraceRow>& rows,
                                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write reward trace: " + path);
  out << "step,candidate_x,candidate_y,port_type,r_pop,r_exist,r_sub,r_wait,total,sim_mean_wait\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.step,
                  r.candidate.x, r.candidate.y, r.port_type, r.reward.pop, r.reward.exist,
                  r.reward.sub, r.reward.wait, r.reward.total(), r.sim_mean_wait);
    out << buf;
  }
}

}  // namespace voltsite
