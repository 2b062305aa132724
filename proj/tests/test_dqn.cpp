#include <catch2/catch_amalgamated.hpp>

#include "voltsite/agent.hpp"
#include "test_helpers.hpp"

using namespace voltsite;

namespace {

// location net that returns d_nearest_km as the score (undoes the /10 scaling)
Network distance_probe_net() {
  Network net({5, 1});
  net.weights(0) << 10.0, 0.0, 0.0, 0.0, 0.0;
  return net;
}

StateVector state_with_d(double d_nearest) {
  StateVector s;
  s.d_nearest_km = d_nearest;
  return s;
}

}  // namespace

TEST_CASE("epsilon schedule is exact") {
  TrainConfig cfg;
  for (long t : {0L, 1L, 7L, 100L, 500L, 2000L}) {
    double expect = std::max(0.05, 1.0 * std::pow(0.995, t));
    CHECK(epsilon_at(cfg, t) == expect);
  }
  CHECK(epsilon_at(cfg, 0) == 1.0);
  CHECK(epsilon_at(cfg, 100000) == 0.05);
}

TEST_CASE("select_location is uniform under full exploration") {
  Network net = distance_probe_net();
  StateNormalizer norm{1.0};
  std::vector<StateVector> states{state_with_d(1), state_with_d(2), state_with_d(3),
                                  state_with_d(4)};
  Eigen::MatrixXd X = norm.batch(states);
  Rng rng(8);
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 10000; ++i) ++counts[select_location(net, X, 1.0, rng)];
  for (int c : counts) {
    CHECK(c > 2200);
    CHECK(c < 2800);
  }
}

TEST_CASE("select_location greedy cases") {
  Network net = distance_probe_net();
  StateNormalizer norm{1.0};
  Rng rng(3);
  std::vector<StateVector> one{state_with_d(2)};
  CHECK(select_location(net, norm.batch(one), 0.0, rng) == 0);

  std::vector<StateVector> three{state_with_d(1), state_with_d(2), state_with_d(5)};
  CHECK(select_location(net, norm.batch(three), 0.0, rng) == 2);

  // ties resolve to the lowest index
  std::vector<StateVector> tied{state_with_d(4), state_with_d(4), state_with_d(4)};
  CHECK(select_location(net, norm.batch(tied), 0.0, rng) == 0);

  Eigen::MatrixXd empty(0, 5);
  CHECK_THROWS_AS(select_location(net, empty, 0.5, rng), std::invalid_argument);
}

TEST_CASE("select_port greedy and exploration") {
  StateNormalizer norm{1.0};
  Eigen::VectorXd x = norm(state_with_d(1));
  Rng rng(4);

  Network zero(q_network_dims(5, 10));
  CHECK(select_port(zero, x, 0.0, rng) == 1);  // all-equal tie rule

  Network biased({5, 10});
  biased.biases(0)(6) = 3.0;  // favor j = 7
  CHECK(select_port(biased, x, 0.0, rng) == 7);

  std::vector<int> counts(11, 0);
  for (int i = 0; i < 20000; ++i) ++counts[select_port(zero, x, 1.0, rng)];
  for (int j = 1; j <= 10; ++j) {
    CHECK(counts[j] > 1700);
    CHECK(counts[j] < 2300);
  }
}

TEST_CASE("td_target_loc hand cases") {
  StateNormalizer norm{1.0};
  Network target = distance_probe_net();

  Transition terminal;
  terminal.reward = 12.0;
  terminal.terminal = true;
  terminal.next_states = {state_with_d(9)};
  CHECK(td_target_loc(terminal, target, norm, 0.99) == 12.0);

  Transition t;
  t.reward = 7.5;
  t.next_states = {state_with_d(1), state_with_d(2)};
  CHECK(td_target_loc(t, target, norm, 0.0) == 7.5);

  // r = 10, gamma = 0.99, next candidate scores {1, 3, 2} -> 12.97
  t.reward = 10.0;
  t.next_states = {state_with_d(1), state_with_d(3), state_with_d(2)};
  double y = td_target_loc(t, target, norm, 0.99);
  CHECK(y == Catch::Approx(12.97).epsilon(1e-12));
  CHECK(y == 10.0 + 0.99 * target.forward_one(norm(state_with_d(3))) (0));
}

TEST_CASE("td_target_port hand cases") {
  StateNormalizer norm{1.0};
  Network loc_target = distance_probe_net();

  Transition terminal;
  terminal.reward = 5.0;
  terminal.terminal = true;
  CHECK(td_target_port(terminal, Network(q_network_dims(5, 10)), loc_target, norm, 0.99) == 5.0);

  // max next output 10 at gamma 0.99, r = 0 -> 9.9
  Network port_target({5, 10});
  port_target.biases(0)(4) = 10.0;
  Transition t;
  t.reward = 0.0;
  t.next_states = {state_with_d(2), state_with_d(4)};
  double y = td_target_port(t, port_target, loc_target, norm, 0.99);
  CHECK(y == Catch::Approx(9.9).epsilon(1e-12));

  // zero port target: y = r
  Network zero_port(q_network_dims(5, 10));
  CHECK(td_target_port(t, zero_port, loc_target, norm, 0.99) == t.reward);
}

TEST_CASE("replay buffer caps size with strict FIFO eviction") {
  ReplayBuffer buf(3);
  for (int i = 0; i < 5; ++i) {
    Transition t;
    t.reward = i;
    buf.push(t);
  }
  REQUIRE(buf.size() == 3);
  CHECK(buf.at(0).reward == 2.0);
  CHECK(buf.at(1).reward == 3.0);
  CHECK(buf.at(2).reward == 4.0);
}

TEST_CASE("replay sampling is uniform without replacement inside a batch") {
  ReplayBuffer buf(100);
  for (int i = 0; i < 20; ++i) {
    Transition t;
    t.reward = i;
    buf.push(t);
  }
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    auto idx = buf.sample_indices(8, rng);
    std::set<std::size_t> uniq(idx.begin(), idx.end());
    REQUIRE(uniq.size() == 8);
    for (auto i : idx) REQUIRE(i < 20);
  }
  CHECK_THROWS_AS(buf.sample_indices(21, rng), std::invalid_argument);
}

TEST_CASE("train_step is a no-op until the replay holds a batch") {
  TrainConfig cfg;
  cfg.batch = 8;
  DqnAgent agent = DqnAgent::make(1.0, cfg);
  ReplayBuffer buf(100);
  Rng rng(1);
  for (int i = 0; i < 7; ++i) {
    Transition t;
    t.terminal = true;
    buf.push(t);
    CHECK(!train_step(agent, buf, cfg, rng).has_value());
  }
  Transition t;
  t.terminal = true;
  buf.push(t);
  CHECK(train_step(agent, buf, cfg, rng).has_value());
}

TEST_CASE("self-consistent batch gives zero loss and unchanged parameters") {
  TrainConfig cfg;
  cfg.batch = 4;
  // zero networks + zero-reward terminal transitions: Q == y == 0 everywhere
  DqnAgent agent{Network(q_network_dims(5, 1)), Network(q_network_dims(5, 1)),
                 Network(q_network_dims(5, 10)), Network(q_network_dims(5, 10)),
                 AdamOptimizer(), AdamOptimizer(), StateNormalizer{1.0}};
  agent.opt_loc = AdamOptimizer(agent.q_loc, cfg.lr_alpha);
  agent.opt_port = AdamOptimizer(agent.q_port, cfg.lr_beta);
  ReplayBuffer buf(10);
  for (int i = 0; i < 4; ++i) {
    Transition t;
    t.state = state_with_d(i);
    t.terminal = true;
    t.action_port = 1 + i;
    buf.push(t);
  }
  Rng rng(2);
  auto losses = train_step(agent, buf, cfg, rng);
  REQUIRE(losses.has_value());
  CHECK(losses->loc == 0.0);
  CHECK(losses->port == 0.0);
  CHECK(agent.q_loc.weights(0).isZero(0.0));
  CHECK(agent.q_port.weights(0).isZero(0.0));
}

TEST_CASE("single-transition batch loss matches hand arithmetic") {
  TrainConfig cfg;
  cfg.batch = 1;
  DqnAgent agent{Network(q_network_dims(5, 1)), Network(q_network_dims(5, 1)),
                 Network(q_network_dims(5, 10)), Network(q_network_dims(5, 10)),
                 AdamOptimizer(), AdamOptimizer(), StateNormalizer{1.0}};
  agent.opt_loc = AdamOptimizer(agent.q_loc, cfg.lr_alpha);
  agent.opt_port = AdamOptimizer(agent.q_port, cfg.lr_beta);
  ReplayBuffer buf(10);
  Transition t;
  t.state = state_with_d(1);
  t.reward = 2.0;
  t.terminal = true;
  t.action_port = 3;
  buf.push(t);
  Rng rng(2);
  auto losses = train_step(agent, buf, cfg, rng);
  REQUIRE(losses.has_value());
  // zero nets: Q = 0, y = r = 2 -> loss = (0 - 2)^2 = 4 on both heads
  CHECK(losses->loc == 4.0);
  CHECK(losses->port == 4.0);
}

TEST_CASE("losses are finite and non-negative on random batches") {
  TrainConfig cfg;
  cfg.batch = 8;
  DqnAgent agent = DqnAgent::make(500.0, cfg);
  ReplayBuffer buf(100);
  Rng rng(77);
  for (int i = 0; i < 40; ++i) {
    Transition t;
    t.state = {rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(0, 500),
               rng.uniform_int(0, 5), rng.uniform(0, 3)};
    t.reward = rng.uniform(0, 40);
    t.action_port = rng.uniform_int(1, 10);
    t.terminal = rng.bernoulli(0.2);
    int n = rng.uniform_int(1, 6);
    for (int k = 0; k < n; ++k)
      t.next_states.push_back({rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(0, 500),
                               rng.uniform_int(0, 5), rng.uniform(0, 3)});
    buf.push(t);
  }
  for (int i = 0; i < 20; ++i) {
    auto losses = train_step(agent, buf, cfg, rng);
    REQUIRE(losses.has_value());
    REQUIRE(losses->loc >= 0.0);
    REQUIRE(losses->port >= 0.0);
    REQUIRE(std::isfinite(losses->loc));
    REQUIRE(std::isfinite(losses->port));
  }
  CHECK(agent.q_loc.all_finite());
  CHECK(agent.q_port.all_finite());
}

TEST_CASE("zero episodes trains nothing") {
  Scenario s = voltsite::testing::mini_scenario();
  EnvConfig env_cfg;
  env_cfg.use_simulation = false;
  TrainConfig cfg;
  cfg.episodes = 0;
  cfg.steps_per_episode = 3;
  TrainOutput out = train(s, env_cfg, cfg);
  CHECK(out.history.steps.empty());
  CHECK(out.history.episode_rewards.empty());
  CHECK(out.state.global_step == 0);
}

TEST_CASE("no-sim training is bit-reproducible") {
  Scenario s = voltsite::testing::mini_scenario();
  EnvConfig env_cfg;
  env_cfg.use_simulation = false;
  TrainConfig cfg;
  cfg.episodes = 5;
  cfg.steps_per_episode = 4;
  cfg.seed = 99;
  TrainOutput a = train(s, env_cfg, cfg);
  TrainOutput b = train(s, env_cfg, cfg);
  CHECK(checkpoint_to_json(a.state, cfg).dump() == checkpoint_to_json(b.state, cfg).dump());
  CHECK(plan_to_json(a.plan).dump() == plan_to_json(b.plan).dump());
  REQUIRE(a.history.steps.size() == b.history.steps.size());
  REQUIRE(a.history.steps.size() == 20);
  for (std::size_t i = 0; i < a.history.steps.size(); ++i) {
    CHECK(a.history.steps[i].reward == b.history.steps[i].reward);
    CHECK(a.history.steps[i].epsilon == epsilon_at(cfg, static_cast<long>(i)));
  }
  // a different seed diverges
  TrainConfig cfg2 = cfg;
  cfg2.seed = 100;
  TrainOutput c = train(s, env_cfg, cfg2);
  CHECK(checkpoint_to_json(a.state, cfg).dump() != checkpoint_to_json(c.state, cfg2).dump());
}

TEST_CASE("resume from a checkpoint matches the unbroken run") {
  Scenario s = voltsite::testing::mini_scenario();
  EnvConfig env_cfg;
  env_cfg.use_simulation = false;
  TrainConfig cfg;
  cfg.episodes = 4;
  cfg.steps_per_episode = 3;
  cfg.seed = 7;
  TrainOutput full = train(s, env_cfg, cfg);

  TrainConfig half = cfg;
  half.episodes = 2;
  TrainOutput part = train(s, env_cfg, half);
  // round-trip the checkpoint through json, then continue to 4 episodes
  auto [restored, restored_cfg] = checkpoint_from_json(checkpoint_to_json(part.state, cfg));
  TrainOutput resumed = train(s, env_cfg, cfg, &restored);

  CHECK(checkpoint_to_json(resumed.state, cfg).dump() ==
        checkpoint_to_json(full.state, cfg).dump());
  CHECK(plan_to_json(resumed.plan).dump() == plan_to_json(full.plan).dump());
  // the resumed history covers episodes 2..3 and matches the tail of the full run
  REQUIRE(resumed.history.steps.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(resumed.history.steps[i].reward == full.history.steps[6 + i].reward);
    CHECK(resumed.history.steps[i].step == full.history.steps[6 + i].step);
  }
}
