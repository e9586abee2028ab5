#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swarm/comm.hpp"
#include "swarm/config.hpp"
#include "swarm/geometry.hpp"
#include "swarm/rng.hpp"

namespace swarm {

struct Target {
  Position3D position;
  double rcs_dbsm = 0.0;
};

struct BaseStation {
  Position3D position;
  double tx_power_dbm = 0.0;
  double tx_gain_dbi = 0.0;
};

/// Immutable snapshot of one episode's physical layout.
struct World {
  WorldConfig config;
  std::vector<BaseStation> base_stations;
  std::vector<Target> targets;
  std::vector<Position3D> uav_start;
  ChannelPlan channels;
};

/// q targets: x ~ U(0, L), y ~ U(0, H), z ~ U(alt_min, alt_max),
/// rcs ~ Normal(rcs_mean, rcs_std) dBsm. Draw order per target: x, y, z, rcs.
std::vector<Target> sample_targets(RngStream& rng, const WorldConfig& cfg);

/// Places base stations, targets and UAVs from dedicated substreams of
/// cfg.seed. `world_index` selects an independent layout (training samples a
/// fresh one per episode). Throws ConfigError when cfg is invalid.
World build_world(const WorldConfig& cfg, std::uint64_t world_index = 0);

/// Sorted key=value listing, 9 decimals, used for determinism comparisons.
std::string canonical_dump(const World& world);

}  // namespace swarm
