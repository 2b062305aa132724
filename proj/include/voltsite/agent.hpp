#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "voltsite/environment.hpp"
#include "voltsite/network.hpp"
#include "voltsite/placement.hpp"
#include "voltsite/replay.hpp"

namespace voltsite {

struct TrainConfig {
  int episodes = 100;
  int steps_per_episode = 10;
  double gamma = 0.99;
  double epsilon_init = 1.0;
  double epsilon_decay = 0.995;  // per step
  double epsilon_min = 0.05;
  int batch = 8;
  double lr_alpha = 0.001;  // location network
  double lr_beta = 0.001;   // port network
  double tau_soft = 0.005;
  std::size_t replay_capacity = 10000;
  std::uint64_t seed = 0;

  void validate() const {
    if (episodes < 0 || steps_per_episode <= 0)
      throw ConfigError("train: episodes >= 0 and steps_per_episode > 0 required");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("train.gamma: must be in (0,1)");
    if (batch <= 0) throw ConfigError("train.batch: must be > 0");
  }
};

inline double epsilon_at(const TrainConfig& cfg, long step) {
  return std::max(cfg.epsilon_min, cfg.epsilon_init * std::pow(cfg.epsilon_decay, step));
}

// Feature scaling in front of the networks: distances by 10 km, density by
// rho_max, station count by 10, waits by 5 h.
struct StateNormalizer {
  double rho_max = 1.0;
  double d_scale = 10.0;
  double n_scale = 10.0;
  double t_scale = 5.0;

  Eigen::VectorXd operator()(const StateVector& s) const {
    Eigen::VectorXd v(5);
    v << s.d_nearest_km / d_scale, s.d_nearest_sub_km / d_scale, s.rho / rho_max,
        static_cast<double>(s.n_stations) / n_scale, s.t_avg_hours / t_scale;
    return v;
  }

  Eigen::MatrixXd batch(std::span<const StateVector> states) const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(states.size()), 5);
    for (std::size_t i = 0; i < states.size(); ++i)
      m.row(static_cast<Eigen::Index>(i)) = (*this)(states[i]).transpose();
    return m;
  }
};

inline constexpr int kStateSize = 5;
inline constexpr int kPortActions = 10;

// Dual Q-networks with their targets. The location network scores one
// candidate state at a time (scalar output) because the Voronoi candidate
// count changes every step; the port network has a 10-way output head.
struct DqnAgent {
  Network q_loc;
  Network q_loc_target;
  Network q_port;
  Network q_port_target;
  AdamOptimizer opt_loc;
  AdamOptimizer opt_port;
  StateNormalizer normalizer;

  static DqnAgent make(double rho_max, const TrainConfig& cfg) {
    Rng seeds(cfg.seed);
    DqnAgent a{Network::glorot(q_network_dims(kStateSize, 1), seeds.stream("q-loc").seed()),
               Network({1, 1}),
               Network::glorot(q_network_dims(kStateSize, kPortActions),
                               seeds.stream("q-port").seed()),
               Network({1, 1}),
               AdamOptimizer(),
               AdamOptimizer(),
               StateNormalizer{rho_max}};
    a.q_loc_target = a.q_loc;
    a.q_port_target = a.q_port;
    a.opt_loc = AdamOptimizer(a.q_loc, cfg.lr_alpha);
    a.opt_port = AdamOptimizer(a.q_port, cfg.lr_beta);
    return a;
  }
};

// Epsilon-greedy over per-candidate scalar scores; rows of `normalized` are
// candidate states. Greedy ties resolve to the lowest index.
inline int select_location(const Network& q_loc, const Eigen::MatrixXd& normalized, double epsilon,
                           Rng& rng) {
  if (normalized.rows() == 0)
    throw std::invalid_argument("select_location: candidate list must not be empty");
  if (rng.bernoulli(epsilon)) return rng.uniform_int(0, static_cast<int>(normalized.rows()) - 1);
  Eigen::MatrixXd scores = q_loc.forward(normalized);
  int best = 0;
  for (Eigen::Index i = 1; i < scores.rows(); ++i)
    if (scores(i, 0) > scores(best, 0)) best = static_cast<int>(i);
  return best;
}

// Epsilon-greedy over the 10 port-type Q-values; returns j in 1..10.
inline int select_port(const Network& q_port, const Eigen::VectorXd& normalized_state,
                       double epsilon, Rng& rng) {
  if (rng.bernoulli(epsilon)) return rng.uniform_int(1, kPortActions);
  Eigen::VectorXd q = q_port.forward_one(normalized_state);
  int best = 0;
  for (Eigen::Index j = 1; j < q.size(); ++j)
    if (q(j) > q(best)) best = static_cast<int>(j);
  return best + 1;
}

inline double td_target_loc(const Transition& t, const Network& q_loc_target,
                            const StateNormalizer& norm, double gamma) {
  if (t.terminal || t.next_states.empty()) return t.reward;
  Eigen::MatrixXd scores = q_loc_target.forward(norm.batch(t.next_states));
  return t.reward + gamma * scores.col(0).maxCoeff();
}

// The port target evaluates the next chosen candidate: the state the location
// target ranks highest (the same s' that realizes the location max).
inline double td_target_port(const Transition& t, const Network& q_port_target,
                             const Network& q_loc_target, const StateNormalizer& norm,
                             double gamma) {
  if (t.terminal || t.next_states.empty()) return t.reward;
  Eigen::MatrixXd normalized = norm.batch(t.next_states);
  Eigen::MatrixXd scores = q_loc_target.forward(normalized);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < scores.rows(); ++i)
    if (scores(i, 0) > scores(best, 0)) best = i;
  Eigen::VectorXd q = q_port_target.forward_one(normalized.row(best).transpose());
  return t.reward + gamma * q.maxCoeff();
}

struct StepLosses {
  double loc = 0.0;
  double port = 0.0;
};

// One learning update: sample a batch, square the TD errors of both networks,
// take an optimizer step each, then soft-update the targets. Returns nullopt
// (a no-op) while the replay is smaller than the batch.
inline std::optional<StepLosses> train_step(DqnAgent& agent, const ReplayBuffer& replay,
                                            const TrainConfig& cfg, Rng& rng) {
  if (replay.size() < static_cast<std::size_t>(cfg.batch)) return std::nullopt;
  std::vector<std::size_t> idx = replay.sample_indices(cfg.batch, rng);
  const Eigen::Index B = cfg.batch;

  Eigen::MatrixXd X(B, kStateSize);
  Eigen::VectorXd y_loc(B), y_port(B);
  Eigen::VectorXi ports(B);
  for (Eigen::Index i = 0; i < B; ++i) {
    const Transition& t = replay.at(idx[i]);
    X.row(i) = agent.normalizer(t.state).transpose();
    y_loc(i) = td_target_loc(t, agent.q_loc_target, agent.normalizer, cfg.gamma);
    y_port(i) = td_target_port(t, agent.q_port_target, agent.q_loc_target, agent.normalizer,
                               cfg.gamma);
    ports(i) = t.action_port;
  }

  StepLosses losses;

  Network::Trace trace_loc = agent.q_loc.forward_trace(X);
  Eigen::VectorXd q = trace_loc.act.back().col(0);
  Eigen::VectorXd err = q - y_loc;
  losses.loc = err.squaredNorm() / static_cast<double>(B);
  Eigen::MatrixXd dY_loc = (2.0 / static_cast<double>(B)) * err;
  agent.opt_loc.update(agent.q_loc, agent.q_loc.backward(trace_loc, dY_loc));

  Network::Trace trace_port = agent.q_port.forward_trace(X);
  Eigen::MatrixXd dY_port = Eigen::MatrixXd::Zero(B, kPortActions);
  double loss_port = 0.0;
  for (Eigen::Index i = 0; i < B; ++i) {
    double qp = trace_port.act.back()(i, ports(i) - 1);
    double e = qp - y_port(i);
    loss_port += e * e;
    dY_port(i, ports(i) - 1) = 2.0 * e / static_cast<double>(B);
  }
  losses.port = loss_port / static_cast<double>(B);
  agent.opt_port.update(agent.q_port, agent.q_port.backward(trace_port, dY_port));

  soft_update(agent.q_loc_target, agent.q_loc, cfg.tau_soft);
  soft_update(agent.q_port_target, agent.q_port, cfg.tau_soft);
  return losses;
}

struct StepRecord {
  long step = 0;
  int episode = 0;
  double loss_loc = std::numeric_limits<double>::quiet_NaN();
  double loss_port = std::numeric_limits<double>::quiet_NaN();
  double epsilon = 0.0;
  double reward = 0.0;
};

struct TrainingHistory {
  std::vector<StepRecord> steps;
  std::vector<double> episode_rewards;
};

inline void write_history_csv(const TrainingHistory& h, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write history: " + path);
  out << "step,episode,loss_loc,loss_port,epsilon,reward\n";
  char buf[200];
  for (const auto& r : h.steps) {
    std::string ll = std::isnan(r.loss_loc) ? "" : std::to_string(r.loss_loc);
    std::string lp = std::isnan(r.loss_port) ? "" : std::to_string(r.loss_port);
    std::snprintf(buf, sizeof(buf), "%ld,%d,%s,%s,%.9g,%.9g\n", r.step, r.episode, ll.c_str(),
                  lp.c_str(), r.epsilon, r.reward);
    out << buf;
  }
}

// Whole mutable training state; checkpointable at episode boundaries.
struct TrainState {
  DqnAgent agent;
  ReplayBuffer replay;
  long global_step = 0;
  int episodes_done = 0;
};

struct TrainOutput {
  TrainState state;
  TrainingHistory history;
  PlacementPlan plan;
};

namespace detail {

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t a,
                                 std::uint64_t b = 0) {
  return Rng(seed).stream(tag).stream(a).stream(b).seed();
}

}  // namespace detail

// Greedy rollout from the scenario's existing stations: k placements with
// epsilon = 0, simulation seeds derived from `seed`.
inline PlacementPlan greedy_rollout(const DqnAgent& agent, const Scenario& scenario,
                                    const EnvConfig& env_cfg, int k, std::uint64_t seed) {
  PlacementEnv env(scenario, env_cfg);
  env.reset_existing(detail::derive_seed(seed, "rollout-init", 0));
  PlacementPlan plan;
  plan.method = "dqn";
  plan.seed = seed;
  Rng dummy(0);
  for (int i = 0; i < k; ++i) {
    Eigen::MatrixXd X = agent.normalizer.batch(env.candidate_states());
    int loc = select_location(agent.q_loc, X, 0.0, dummy);
    int port = select_port(agent.q_port, X.row(loc).transpose(), 0.0, dummy);
    plan.stations.push_back(
        {env.candidates()[loc], port, env.config().ports_per_station});
    env.step({loc, port}, detail::derive_seed(seed, "rollout-sim", i));
  }
  return plan;
}

// The placement-training loop: per episode, reset to a single random station,
// then alternate candidate generation, dual epsilon-greedy selection,
// environment step, replay storage, learning, and target soft updates.
// Fully deterministic for a fixed seed; resumable at episode boundaries.
inline TrainOutput train(const Scenario& scenario, const EnvConfig& env_cfg,
                         const TrainConfig& cfg, const TrainState* resume_from = nullptr,
                         TrainingHistory history = {}) {
  cfg.validate();
  TrainState initial = resume_from ? *resume_from
                                   : TrainState{DqnAgent::make(scenario.raster.rho_max(), cfg),
                                                ReplayBuffer(cfg.replay_capacity), 0, 0};
  TrainOutput out{std::move(initial), std::move(history), {}};
  TrainState& st = out.state;
  PlacementEnv env(scenario, env_cfg);

  for (int ep = st.episodes_done; ep < cfg.episodes; ++ep) {
    Rng rng_actions = Rng(cfg.seed).stream("actions").stream(static_cast<std::uint64_t>(ep));
    Rng rng_replay = Rng(cfg.seed).stream("replay").stream(static_cast<std::uint64_t>(ep));
    env.reset_single_random(detail::derive_seed(cfg.seed, "reset", ep));
    double ep_reward = 0.0;
    for (int step = 0; step < cfg.steps_per_episode; ++step) {
      double eps = epsilon_at(cfg, st.global_step);
      const std::vector<StateVector> states = env.candidate_states();
      const std::vector<Point> candidates = env.candidates();
      Eigen::MatrixXd X = st.agent.normalizer.batch(states);
      int loc = select_location(st.agent.q_loc, X, eps, rng_actions);
      int port = select_port(st.agent.q_port, X.row(loc).transpose(), eps, rng_actions);

      StepOutcome sr = env.step({loc, port}, detail::derive_seed(cfg.seed, "sim", ep, step));
      double r = sr.reward.total();
      ep_reward += r;

      st.replay.push({states[loc], candidates[loc], port, r, env.candidate_states(),
                      step + 1 == cfg.steps_per_episode});

      StepRecord rec;
      rec.step = st.global_step;
      rec.episode = ep;
      rec.epsilon = eps;
      rec.reward = r;
      if (auto losses = train_step(st.agent, st.replay, cfg, rng_replay)) {
        rec.loss_loc = losses->loc;
        rec.loss_port = losses->port;
      }
      out.history.steps.push_back(rec);
      ++st.global_step;
    }
    out.history.episode_rewards.push_back(ep_reward);
    st.episodes_done = ep + 1;
  }

  out.plan = greedy_rollout(st.agent, scenario, env_cfg, cfg.steps_per_episode,
                            detail::derive_seed(cfg.seed, "final-rollout", 0));
  return out;
}

inline nlohmann::json state_vector_to_json(const StateVector& s) {
  return {{"d_nearest_km", s.d_nearest_km},
          {"d_nearest_sub_km", s.d_nearest_sub_km},
          {"rho", s.rho},
          {"n_stations", s.n_stations},
          {"t_avg_hours", s.t_avg_hours}};
}

inline StateVector state_vector_from_json(const nlohmann::json& j) {
  return {j.at("d_nearest_km").get<double>(), j.at("d_nearest_sub_km").get<double>(),
          j.at("rho").get<double>(), j.at("n_stations").get<int>(),
          j.at("t_avg_hours").get<double>()};
}

inline nlohmann::json checkpoint_to_json(const TrainState& st, const TrainConfig& cfg) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["q_loc"] = network_to_json(st.agent.q_loc);
  j["q_loc_target"] = network_to_json(st.agent.q_loc_target);
  j["q_port"] = network_to_json(st.agent.q_port);
  j["q_port_target"] = network_to_json(st.agent.q_port_target);
  adam_to_json(j["opt_loc"], st.agent.opt_loc);
  adam_to_json(j["opt_port"], st.agent.opt_port);
  j["normalizer"] = {{"rho_max", st.agent.normalizer.rho_max},
                     {"d_scale", st.agent.normalizer.d_scale},
                     {"n_scale", st.agent.normalizer.n_scale},
                     {"t_scale", st.agent.normalizer.t_scale}};
  j["global_step"] = st.global_step;
  j["episodes_done"] = st.episodes_done;
  j["train_config"] = {{"episodes", cfg.episodes},
                       {"steps_per_episode", cfg.steps_per_episode},
                       {"gamma", cfg.gamma},
                       {"epsilon_init", cfg.epsilon_init},
                       {"epsilon_decay", cfg.epsilon_decay},
                       {"epsilon_min", cfg.epsilon_min},
                       {"batch", cfg.batch},
                       {"lr_alpha", cfg.lr_alpha},
                       {"lr_beta", cfg.lr_beta},
                       {"tau_soft", cfg.tau_soft},
                       {"replay_capacity", cfg.replay_capacity},
                       {"seed", cfg.seed}};
  j["replay"] = nlohmann::json::array();
  for (std::size_t i = 0; i < st.replay.size(); ++i) {
    const Transition& t = st.replay.at(i);
    nlohmann::json tj;
    tj["state"] = state_vector_to_json(t.state);
    tj["action_loc"] = {{"x", t.action_loc.x}, {"y", t.action_loc.y}};
    tj["action_port"] = t.action_port;
    tj["reward"] = t.reward;
    tj["terminal"] = t.terminal;
    tj["next_states"] = nlohmann::json::array();
    for (const auto& s : t.next_states) tj["next_states"].push_back(state_vector_to_json(s));
    j["replay"].push_back(std::move(tj));
  }
  return j;
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  cfg.episodes = j.at("episodes").get<int>();
  cfg.steps_per_episode = j.at("steps_per_episode").get<int>();
  cfg.gamma = j.at("gamma").get<double>();
  cfg.epsilon_init = j.at("epsilon_init").get<double>();
  cfg.epsilon_decay = j.at("epsilon_decay").get<double>();
  cfg.epsilon_min = j.at("epsilon_min").get<double>();
  cfg.batch = j.at("batch").get<int>();
  cfg.lr_alpha = j.at("lr_alpha").get<double>();
  cfg.lr_beta = j.at("lr_beta").get<double>();
  cfg.tau_soft = j.at("tau_soft").get<double>();
  cfg.replay_capacity = j.at("replay_capacity").get<std::size_t>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

inline std::pair<TrainState, TrainConfig> checkpoint_from_json(const nlohmann::json& j) {
  TrainConfig cfg = train_config_from_json(j.at("train_config"));
  TrainState st{DqnAgent{network_from_json(j.at("q_loc")), network_from_json(j.at("q_loc_target")),
                         network_from_json(j.at("q_port")),
                         network_from_json(j.at("q_port_target")), AdamOptimizer(),
                         AdamOptimizer(), StateNormalizer{}},
                ReplayBuffer(cfg.replay_capacity), 0, 0};
  st.agent.opt_loc = adam_from_json(j.at("opt_loc"), st.agent.q_loc);
  st.agent.opt_port = adam_from_json(j.at("opt_port"), st.agent.q_port);
  const auto& nj = j.at("normalizer");
  st.agent.normalizer = {nj.at("rho_max").get<double>(), nj.at("d_scale").get<double>(),
                         nj.at("n_scale").get<double>(), nj.at("t_scale").get<double>()};
  st.global_step = j.at("global_step").get<long>();
  st.episodes_done = j.at("episodes_done").get<int>();
  for (const auto& tj : j.at("replay")) {
    Transition t;
    t.state = state_vector_from_json(tj.at("state"));
    t.action_loc = {tj.at("action_loc").at("x").get<double>(),
                    tj.at("action_loc").at("y").get<double>()};
    t.action_port = tj.at("action_port").get<int>();
    t.reward = tj.at("reward").get<double>();
    t.terminal = tj.at("terminal").get<bool>();
    for (const auto& sj : tj.at("next_states"))
      t.next_states.push_back(state_vector_from_json(sj));
    st.replay.push(std::move(t));
  }
  return {std::move(st), cfg};
}

inline void save_checkpoint(const TrainState& st, const TrainConfig& cfg,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << checkpoint_to_json(st, cfg).dump() << "\n";
}

inline std::pair<TrainState, TrainConfig> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  nlohmann::json j;
  in >> j;
  return checkpoint_from_json(j);
}

}  // namespace voltsite
