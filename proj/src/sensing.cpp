#include "swarm/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "swarm/errors.hpp"

namespace swarm {

double sensing_constant_db(double carrier_hz) {
  const double four_pi = 4.0 * std::numbers::pi;
  return 10.0 * std::log10((kSpeedOfLight * kSpeedOfLight) /
                           (four_pi * four_pi * four_pi * carrier_hz * carrier_hz));
}

double sensing_snr(const BaseStation& bs, const Target& target, const Position3D& uav,
                   const WorldConfig& cfg) {
  const double d_bs_target = distance(bs.position, target.position);
  const double d_target_uav = distance(target.position, uav);
  if (!(d_bs_target > 0.0) || !(d_target_uav > 0.0)) {
    throw DomainError("bistatic SNR undefined for a zero-length leg");
  }
  return bs.tx_power_dbm + bs.tx_gain_dbi + cfg.uav_rx_gain - cfg.noise_power +
         sensing_constant_db(cfg.carrier_frequency) + target.rcs_dbsm -
         20.0 * std::log10(d_bs_target * d_target_uav);
}

std::vector<SensingLinkReport> gate_links(std::size_t uav, std::vector<LinkSnr> links,
                                          const WorldConfig& cfg) {
  std::sort(links.begin(), links.end(), [](const LinkSnr& a, const LinkSnr& b) {
    if (a.snr_db != b.snr_db) return a.snr_db > b.snr_db;
    if (a.bs != b.bs) return a.bs < b.bs;
    return a.target < b.target;
  });
  std::vector<SensingLinkReport> out;
  out.reserve(links.size());
  for (std::size_t r = 0; r < links.size(); ++r) {
    SensingLinkReport rep;
    rep.uav = uav;
    rep.bs = links[r].bs;
    rep.target = links[r].target;
    rep.snr_db = links[r].snr_db;
    rep.rank = r + 1;
    rep.counted = rep.snr_db >= cfg.sensing_threshold && rep.rank <= cfg.max_resolved;
    out.push_back(rep);
  }
  return out;
}

SensingSnapshot sense(const World& world, std::span<const Position3D> uavs, std::size_t step) {
  const auto& cfg = world.config;
  SensingSnapshot snap;
  snap.per_uav.reserve(uavs.size());
  snap.reward.step = step;
  for (std::size_t m = 0; m < uavs.size(); ++m) {
    std::vector<LinkSnr> links;
    links.reserve(world.base_stations.size() * world.targets.size());
    for (std::size_t k = 0; k < world.base_stations.size(); ++k) {
      for (std::size_t i = 0; i < world.targets.size(); ++i) {
        links.push_back({k, i, sensing_snr(world.base_stations[k], world.targets[i], uavs[m], cfg)});
      }
    }
    snap.per_uav.push_back(gate_links(m, std::move(links), cfg));

    std::vector<SensingLinkReport> counted;
    for (const auto& rep : snap.per_uav.back()) {
      if (rep.counted) counted.push_back(rep);
    }
    std::sort(counted.begin(), counted.end(), [](const auto& a, const auto& b) {
      return a.bs != b.bs ? a.bs < b.bs : a.target < b.target;
    });
    for (const auto& rep : counted) {
      snap.reward.total_snr += rep.snr_db;
      snap.reward.covered_targets.insert(rep.target);
      snap.reward.counted_links.push_back(rep);
    }
  }
  return snap;
}

RewardRecord total_reward(const World& world, std::span<const Position3D> uavs,
                          std::size_t step) {
  return sense(world, uavs, step).reward;
}

void write_link_report_header(std::ostream& out) {
  out << "step,uav,bs,target,snr_db,rank,counted\n";
}

void write_link_report_rows(std::ostream& out, std::size_t step, const SensingSnapshot& snap) {
  char buf[160];
  for (const auto& links : snap.per_uav) {
    for (const auto& r : links) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%zu,%.6f,%zu,%d\n", step, r.uav, r.bs,
                    r.target, r.snr_db, r.rank, r.counted ? 1 : 0);
      out << buf;
    }
  }
}

}  // namespace swarm
