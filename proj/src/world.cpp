#include "swarm/world.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace swarm {

std::vector<Target> sample_targets(RngStream& rng, const WorldConfig& cfg) {
  std::vector<Target> targets;
  targets.reserve(cfg.num_targets);
  for (std::size_t i = 0; i < cfg.num_targets; ++i) {
    Target t;
    t.position.x = rng.uniform(0.0, cfg.arena_length);
    t.position.y = rng.uniform(0.0, cfg.arena_width);
    t.position.z = rng.uniform(cfg.target_alt_min, cfg.target_alt_max);
    t.rcs_dbsm = cfg.rcs_std > 0.0 ? rng.normal(cfg.rcs_mean, cfg.rcs_std) : cfg.rcs_mean;
    targets.push_back(t);
  }
  return targets;
}

World build_world(const WorldConfig& cfg, std::uint64_t world_index) {
  cfg.validate();
  World world;
  world.config = cfg;

  RngStream bs_rng(cfg.seed, StreamPurpose::kBaseStations, world_index);
  for (std::size_t k = 0; k < cfg.num_base_stations; ++k) {
    BaseStation bs;
    bs.position.x = bs_rng.uniform(0.0, cfg.arena_length);
    bs.position.y = bs_rng.uniform(0.0, cfg.arena_width);
    bs.position.z = cfg.bs_altitude;
    bs.tx_power_dbm = cfg.bs_tx_power;
    bs.tx_gain_dbi = cfg.bs_tx_gain;
    world.base_stations.push_back(bs);
  }

  RngStream target_rng(cfg.seed, StreamPurpose::kTargets, world_index);
  world.targets = sample_targets(target_rng, cfg);

  RngStream uav_rng(cfg.seed, StreamPurpose::kUavs, world_index);
  for (std::size_t m = 0; m < cfg.num_uavs; ++m) {
    Position3D p;
    p.x = uav_rng.uniform(0.0, cfg.arena_length);
    p.y = uav_rng.uniform(0.0, cfg.arena_width);
    p.z = cfg.uav_altitude;
    world.uav_start.push_back(p);
  }

  world.channels =
      make_channel_plan(cfg.num_uavs, cfg.comm_base_frequency, cfg.comm_channel_spacing);
  return world;
}

std::string canonical_dump(const World& world) {
  std::map<std::string, std::string> kv;
  char key[64];
  char value[64];
  auto put = [&](const char* fmt, std::size_t idx, const char* field, double v) {
    std::snprintf(key, sizeof key, fmt, idx, field);
    std::snprintf(value, sizeof value, "%.9f", v);
    kv[key] = value;
  };
  for (std::size_t k = 0; k < world.base_stations.size(); ++k) {
    const auto& bs = world.base_stations[k];
    put("bs.%04zu.%s", k, "x", bs.position.x);
    put("bs.%04zu.%s", k, "y", bs.position.y);
    put("bs.%04zu.%s", k, "z", bs.position.z);
    put("bs.%04zu.%s", k, "tx_power", bs.tx_power_dbm);
    put("bs.%04zu.%s", k, "tx_gain", bs.tx_gain_dbi);
  }
  for (std::size_t i = 0; i < world.targets.size(); ++i) {
    const auto& t = world.targets[i];
    put("target.%04zu.%s", i, "x", t.position.x);
    put("target.%04zu.%s", i, "y", t.position.y);
    put("target.%04zu.%s", i, "z", t.position.z);
    put("target.%04zu.%s", i, "rcs", t.rcs_dbsm);
  }
  for (std::size_t m = 0; m < world.uav_start.size(); ++m) {
    const auto& p = world.uav_start[m];
    put("uav.%04zu.%s", m, "x", p.x);
    put("uav.%04zu.%s", m, "y", p.y);
    put("uav.%04zu.%s", m, "z", p.z);
    put("uav.%04zu.%s", m, "carrier_hz", world.channels.carriers_hz[m]);
  }
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

}  // namespace swarm
