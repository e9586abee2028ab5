#pragma once

#include <cstddef>
#include <iosfwd>
#include <set>
#include <span>
#include <vector>

#include "swarm/config.hpp"
#include "swarm/world.hpp"

namespace swarm {

inline constexpr double kSpeedOfLight = 299792458.0;

/// 10 log10(c^2 / ((4 pi)^3 f_c^2)), the wavelength term of the bistatic
/// radar equation.
double sensing_constant_db(double carrier_hz);

/// Bistatic SNR (dB) of target `target` illuminated by `bs` and received at
/// `uav`:
///   P_tx + G_tx + G_r - P_n + C(f_c) + rcs - 20 log10(d_bs,target * d_target,uav)
/// Throws DomainError if either leg has zero length.
double sensing_snr(const BaseStation& bs, const Target& target, const Position3D& uav,
                   const WorldConfig& cfg);

struct LinkSnr {
  std::size_t bs = 0;
  std::size_t target = 0;
  double snr_db = 0.0;
};

struct SensingLinkReport {
  std::size_t uav = 0;
  std::size_t bs = 0;
  std::size_t target = 0;
  double snr_db = 0.0;
  std::size_t rank = 0;  // 1-based among all K*q links at this UAV
  bool counted = false;
};

/// Ranks one UAV's links by descending SNR (ties: ascending (bs, target))
/// and marks a link counted iff snr >= gamma_s and rank <= q_max. The result
/// is in rank order.
std::vector<SensingLinkReport> gate_links(std::size_t uav, std::vector<LinkSnr> links,
                                          const WorldConfig& cfg);

struct RewardRecord {
  std::size_t step = 0;
  double total_snr = 0.0;
  /// Counted links in (uav, bs, target) order; total_snr is their sum in
  /// this order.
  std::vector<SensingLinkReport> counted_links;
  std::set<std::size_t> covered_targets;
};

/// Per-UAV ranked reports plus the team reward for one step.
struct SensingSnapshot {
  std::vector<std::vector<SensingLinkReport>> per_uav;
  RewardRecord reward;
};

SensingSnapshot sense(const World& world, std::span<const Position3D> uavs, std::size_t step);

/// Team reward R^t = sum over (m, k, i) of snr * Pi. Every agent receives
/// this same scalar.
RewardRecord total_reward(const World& world, std::span<const Position3D> uavs,
                          std::size_t step);

/// step,uav,bs,target,snr_db,rank,counted
void write_link_report_header(std::ostream& out);
void write_link_report_rows(std::ostream& out, std::size_t step, const SensingSnapshot& snap);

}  // namespace swarm
