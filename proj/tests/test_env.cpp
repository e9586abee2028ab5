#include <doctest.h>

#include <cmath>
#include <sstream>

#include "swarm/env.hpp"
#include "swarm/errors.hpp"

using namespace swarm;

namespace {

WorldConfig small_config() {
  WorldConfig cfg;
  cfg.num_uavs = 3;
  cfg.num_base_stations = 2;
  cfg.num_targets = 12;
  cfg.max_resolved = 3;
  cfg.message_dim = 4;
  cfg.max_steps = 5;
  return cfg;
}

std::vector<std::vector<double>> messages(std::size_t n, std::size_t s, double base) {
  std::vector<std::vector<double>> out(n, std::vector<double>(s));
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t k = 0; k < s; ++k) out[m][k] = base + 10.0 * m + k;
  }
  return out;
}

}  // namespace

TEST_CASE("moves and clipping") {
  WorldConfig cfg;
  const Position3D p{500, 500, 25};
  CHECK(apply_move(p, 0, cfg).x == 520);
  CHECK(apply_move(p, 3, cfg).y == 480);
  const Position3D diag = apply_move(p, 4, cfg);
  CHECK(std::abs(distance(p, diag) - 20.0) < 1e-12);
  CHECK(apply_move({995, 10, 25}, 0, cfg).x == 1000);
  CHECK(apply_move({5, 10, 25}, 7, cfg).x == 0);
  CHECK(apply_move({5, 10, 25}, 7, cfg).y == 0);
  CHECK_THROWS_AS(apply_move(p, 8, cfg), ShapeError);
}

TEST_CASE("observation layout and padding") {
  WorldConfig cfg = small_config();
  cfg.max_resolved = 2;
  World w = build_world(cfg);
  w.base_stations[0].position = {0, 0, 30};
  w.base_stations[1].position = {1000, 1000, 30};
  for (auto& t : w.targets) t = {{900, 900, 50}, -60.0};
  w.targets[3] = {{100, 50, 40}, 0.0};
  const Position3D uav{120, 60, 25};
  const auto snap = sense(w, std::vector<Position3D>{uav}, 1);
  const Observation o = build_observation(w, uav, snap.per_uav[0]);
  REQUIRE(o.size() == 2 + 6 * 2);
  CHECK(o[0] == 120.0 / 1000);
  CHECK(o[1] == 60.0 / 1000);
  const double snr = sensing_snr(w.base_stations[0], w.targets[3], uav, cfg);
  CHECK(o[2] == snr / 50.0);
  CHECK(o[3] == 0.1);
  CHECK(o[4] == 0.05);
  CHECK(o[5] == 0.4);
  CHECK(o[6] == 0.0);
  CHECK(o[7] == 0.0);
  CHECK(o[8] == -100.0 / 50.0);
  for (std::size_t k = 9; k < 14; ++k) CHECK(o[k] == 0.0);
  CHECK(observation_size(WorldConfig{}) == 32);
}

TEST_CASE("a target counted through two stations fills one block") {
  WorldConfig cfg = small_config();
  cfg.num_base_stations = 2;
  World w = build_world(cfg);
  w.base_stations[0].position = {0, 0, 30};
  w.base_stations[1].position = {60, 0, 30};
  for (auto& t : w.targets) t = {{900, 900, 50}, -60.0};
  w.targets[0] = {{40, 0, 30}, 0.0};
  const Position3D uav{40, 20, 25};
  const auto snap = sense(w, std::vector<Position3D>{uav}, 1);
  const Observation o = build_observation(w, uav, snap.per_uav[0]);
  CHECK(o[6] == 60.0 / 1000);          // nearer station wins
  CHECK(o[8] == -100.0 / 50.0);        // second block unused
}

TEST_CASE("adapted messages for each reception class") {
  const std::vector<std::vector<double>> emitted{{1, 2}, {3, 4}, {5, 6}};
  const std::vector<ReceptionOutcome> outcomes{ReceptionOutcome::kDetectedOnly,
                                               ReceptionOutcome::kLost,
                                               ReceptionOutcome::kDecoded};
  RngStream rng(9, 9), mirror(9, 9);
  const auto msgs = adapt_messages(1, emitted, outcomes, rng);
  REQUIRE(msgs.size() == 2);
  CHECK(msgs[0].sender == 0);
  CHECK(msgs[0].status == MessageStatus::kDetectedOnly);
  CHECK(msgs[0].payload[0] == mirror.normal());
  CHECK(msgs[0].payload[1] == mirror.normal());
  CHECK(msgs[1].sender == 2);
  CHECK(msgs[1].payload == std::vector<double>{5, 6});
  CHECK(msgs[1].encode() == std::vector<double>{5, 6, 1, 3});
  CHECK(msgs[0].encode()[2] == 0.0);
  AdaptedMessage lost{{0.0}, MessageStatus::kLost, 0};
  CHECK(lost.encode() == std::vector<double>{0.0, -1.0, 1.0});
}

TEST_CASE("reset and step semantics") {
  const WorldConfig cfg = small_config();
  SwarmEnv env(build_world(cfg), RngStream(1, 1));
  const std::vector<ActionPair> actions(3, ActionPair{0, 4});
  const auto emitted = messages(3, 4, 0.5);
  CHECK_THROWS_AS(env.step(actions, emitted), StateError);

  const StepResult r0 = env.reset();
  CHECK(env.time() == 0);
  REQUIRE(r0.messages.size() == 3);
  for (const auto& per : r0.messages) {
    REQUIRE(per.size() == 2);
    for (const auto& m : per) {
      CHECK(m.status == MessageStatus::kDecoded);
      CHECK(m.payload == std::vector<double>(4, 0.0));
    }
  }

  const auto start = env.positions()[0];
  const StepResult r1 = env.step(actions, emitted);
  CHECK(env.time() == 1);
  CHECK(env.positions()[0].x == std::min(start.x + 20.0, 1000.0));
  CHECK(r1.receptions.size() == 6);
  CHECK(r1.reward.total_snr == total_reward(env.world(), env.positions(), 1).total_snr);
  for (std::size_t m = 0; m < 3; ++m) {
    for (const auto& msg : r1.messages[m]) {
      CHECK(msg.sender != m);
      if (msg.status == MessageStatus::kDecoded) CHECK(msg.payload == emitted[msg.sender]);
    }
  }
  for (int t = 1; t < 5; ++t) {
    CHECK_FALSE(env.done());
    env.step(actions, emitted);
  }
  CHECK(env.done());
  CHECK_THROWS_AS(env.step(actions, emitted), StateError);

  env.reset();
  const std::vector<ActionPair> bad_power(3, ActionPair{0, 9});
  CHECK_THROWS_AS(env.step(bad_power, emitted), ShapeError);
  CHECK_THROWS_AS(env.step(std::vector<ActionPair>(2), emitted), ShapeError);
}

TEST_CASE("episodes replay identically from the same streams") {
  const WorldConfig cfg = small_config();
  auto run = [&] {
    SwarmEnv env(build_world(cfg, 7), RngStream(3, 11));
    env.reset();
    std::string log;
    RngStream actions(4, 4);
    while (!env.done()) {
      std::vector<ActionPair> a;
      for (int m = 0; m < 3; ++m) a.push_back({actions.index(8), actions.index(5)});
      const auto r = env.step(a, messages(3, 4, 1.0));
      std::ostringstream row;
      row.precision(17);
      row << r.reward.total_snr;
      for (const auto& per : r.messages) {
        for (const auto& m : per) row << ',' << m.payload[0];
      }
      log += row.str() + "\n";
    }
    return log;
  };
  CHECK(run() == run());
}

TEST_CASE("trajectory csv rows") {
  WorldConfig cfg;
  std::ostringstream out;
  write_trajectory_header(out);
  const std::vector<Position3D> pos{{1, 2, 25}};
  const std::vector<ActionPair> act{{3, 1}};
  write_trajectory_rows(out, 4, pos, act, cfg, 12.5, 7);
  CHECK(out.str() ==
        "step,uav,x,y,move,power_dbm,reward,covered_targets\n"
        "4,0,1.000000,2.000000,3,55.000000,12.500000,7\n");
}
