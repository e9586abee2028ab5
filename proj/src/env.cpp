#include "swarm/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "swarm/errors.hpp"

namespace swarm {

std::size_t observation_size(const WorldConfig& cfg) { return 2 + 6 * cfg.max_resolved; }

const std::array<std::array<double, 2>, kMoveCount>& move_directions() {
  static const double d = 1.0 / std::sqrt(2.0);
  static const std::array<std::array<double, 2>, kMoveCount> dirs{{
      {1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}, {d, d}, {d, -d}, {-d, d}, {-d, -d},
  }};
  return dirs;
}

MessageStatus status_of(ReceptionOutcome outcome) {
  switch (outcome) {
    case ReceptionOutcome::kDecoded: return MessageStatus::kDecoded;
    case ReceptionOutcome::kDetectedOnly: return MessageStatus::kDetectedOnly;
    case ReceptionOutcome::kLost: return MessageStatus::kLost;
  }
  return MessageStatus::kLost;
}

std::vector<double> AdaptedMessage::encode() const {
  std::vector<double> v(payload);
  v.push_back(static_cast<double>(static_cast<int>(status)));
  v.push_back(static_cast<double>(sender + 1));
  return v;
}

Position3D apply_move(const Position3D& p, std::size_t move, const WorldConfig& cfg) {
  if (move >= kMoveCount) throw ShapeError("move index out of range");
  const auto& dir = move_directions()[move];
  Position3D q = p;
  q.x = std::clamp(p.x + cfg.step_length() * dir[0], 0.0, cfg.arena_length);
  q.y = std::clamp(p.y + cfg.step_length() * dir[1], 0.0, cfg.arena_width);
  return q;
}

Observation build_observation(const World& world, const Position3D& uav,
                              std::span<const SensingLinkReport> ranked_links) {
  const auto& cfg = world.config;
  const bool norm = cfg.normalize_observations;
  const double sx = norm ? cfg.arena_length : 1.0;
  const double sy = norm ? cfg.arena_width : 1.0;
  const double ss = norm ? cfg.snr_scale : 1.0;
  const double sz = norm ? cfg.z_scale : 1.0;

  Observation obs(observation_size(cfg), 0.0);
  obs[0] = uav.x / sx;
  obs[1] = uav.y / sy;

  // Ranked order means the first counted link of a target is its best BS.
  std::vector<std::size_t> seen;
  std::size_t block = 0;
  for (const auto& link : ranked_links) {
    if (!link.counted) continue;
    if (std::find(seen.begin(), seen.end(), link.target) != seen.end()) continue;
    seen.push_back(link.target);
    const auto& t = world.targets[link.target].position;
    const auto& b = world.base_stations[link.bs].position;
    double* out = obs.data() + 2 + 6 * block;
    out[0] = link.snr_db / ss;
    out[1] = t.x / sx;
    out[2] = t.y / sy;
    out[3] = t.z / sz;
    out[4] = b.x / sx;
    out[5] = b.y / sy;
    if (++block == cfg.max_resolved) break;
  }
  for (; block < cfg.max_resolved; ++block) obs[2 + 6 * block] = kSentinelSnrDb / ss;
  return obs;
}

std::vector<AdaptedMessage> adapt_messages(std::size_t receiver,
                                           std::span<const std::vector<double>> emitted,
                                           std::span<const ReceptionOutcome> outcomes,
                                           RngStream& rng) {
  if (emitted.size() != outcomes.size()) {
    throw ShapeError("adapt_messages: one outcome per sender required");
  }
  std::vector<AdaptedMessage> out;
  out.reserve(emitted.size() > 0 ? emitted.size() - 1 : 0);
  for (std::size_t j = 0; j < emitted.size(); ++j) {
    if (j == receiver) continue;
    AdaptedMessage msg;
    msg.sender = j;
    msg.status = status_of(outcomes[j]);
    if (msg.status == MessageStatus::kDecoded) {
      msg.payload = emitted[j];
    } else {
      msg.payload.resize(emitted[j].size());
      for (auto& v : msg.payload) v = rng.normal();
    }
    out.push_back(std::move(msg));
  }
  return out;
}

SwarmEnv::SwarmEnv(World world, RngStream rng) : world_(std::move(world)), rng_(rng) {}

std::vector<Observation> SwarmEnv::observe() const {
  std::vector<Observation> obs;
  obs.reserve(positions_.size());
  for (std::size_t m = 0; m < positions_.size(); ++m) {
    obs.push_back(build_observation(world_, positions_[m], sensing_.per_uav[m]));
  }
  return obs;
}

StepResult SwarmEnv::reset() {
  t_ = 0;
  started_ = true;
  done_ = false;
  positions_ = world_.uav_start;
  sensing_ = sense(world_, positions_, 0);

  const std::size_t n = positions_.size();
  StepResult r;
  r.observations = observe();
  r.messages.resize(n);
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == m) continue;
      r.messages[m].push_back(
          {std::vector<double>(world_.config.message_dim, 0.0), MessageStatus::kDecoded, j});
    }
  }
  r.reward = sensing_.reward;
  return r;
}

StepResult SwarmEnv::step(std::span<const ActionPair> actions,
                          std::span<const std::vector<double>> emitted) {
  if (!started_) throw StateError("step() called before reset()");
  if (done_) throw StateError("step() called on a finished episode");
  const auto& cfg = world_.config;
  const std::size_t n = positions_.size();
  if (actions.size() != n || emitted.size() != n) {
    throw ShapeError("step: one action and one message per UAV required");
  }

  for (std::size_t m = 0; m < n; ++m) {
    if (actions[m].power >= cfg.power_levels.size()) throw ShapeError("power index out of range");
    positions_[m] = apply_move(positions_[m], actions[m].move, cfg);
  }

  sensing_ = sense(world_, positions_, t_ + 1);

  std::vector<double> powers(n);
  for (std::size_t m = 0; m < n; ++m) powers[m] = cfg.power_levels[actions[m].power];
  const ShadowMatrix shadows = ShadowMatrix::draw(rng_, n, cfg.shadow_std);

  StepResult r;
  r.receptions = simulate_broadcasts(positions_, powers, shadows, world_.channels, cfg);
  r.reward = sensing_.reward;
  r.observations = observe();

  r.messages.resize(n);
  std::vector<ReceptionOutcome> incoming(n, ReceptionOutcome::kLost);
  for (std::size_t m = 0; m < n; ++m) {
    for (const auto& rec : r.receptions) {
      if (rec.rx == m) incoming[rec.tx] = rec.outcome;
    }
    r.messages[m] = adapt_messages(m, emitted, incoming, rng_);
  }

  ++t_;
  done_ = t_ >= cfg.max_steps;
  r.done = done_;
  return r;
}

void write_trajectory_header(std::ostream& out) {
  out << "step,uav,x,y,move,power_dbm,reward,covered_targets\n";
}

void write_trajectory_rows(std::ostream& out, std::size_t step,
                           std::span<const Position3D> positions,
                           std::span<const ActionPair> actions, const WorldConfig& cfg,
                           double reward, std::size_t covered_targets) {
  char buf[200];
  for (std::size_t m = 0; m < positions.size(); ++m) {
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.6f,%.6f,%zu,%.6f,%.6f,%zu\n", step, m,
                  positions[m].x, positions[m].y, actions[m].move,
                  cfg.power_levels[actions[m].power], reward, covered_targets);
    out << buf;
  }
}

}  // namespace swarm
