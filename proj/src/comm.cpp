#include "swarm/comm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "swarm/errors.hpp"

namespace swarm {

ChannelPlan make_channel_plan(std::size_t uav_count, double base_hz, double spacing_hz) {
  ChannelPlan plan{base_hz, spacing_hz, {}};
  plan.carriers_hz.reserve(uav_count);
  for (std::size_t m = 0; m < uav_count; ++m) {
    plan.carriers_hz.push_back(base_hz + static_cast<double>(m) * spacing_hz);
  }
  return plan;
}

std::string_view to_string(ReceptionOutcome outcome) {
  switch (outcome) {
    case ReceptionOutcome::kDecoded: return "decoded";
    case ReceptionOutcome::kDetectedOnly: return "detected";
    case ReceptionOutcome::kLost: return "lost";
  }
  return "?";
}

double path_loss_db(double distance_m, double shadow_db) {
  if (!(distance_m > 0.0)) throw DomainError("path loss undefined at zero distance");
  return 68.08 + 22.5 * std::log10(distance_m) + shadow_db;
}

double path_loss_db(const Position3D& tx, const Position3D& rx, double shadow_db) {
  return path_loss_db(distance(tx, rx), shadow_db);
}

double air_path_loss_db(const Position3D& tx, const Position3D& rx, double shadow_db) {
  return path_loss_db(std::max(distance(tx, rx), kMinUavSeparation), shadow_db);
}

double channel_attenuation_db(std::size_t j, std::size_t l, const ChannelPlan& plan) {
  if (j >= plan.carriers_hz.size() || l >= plan.carriers_hz.size()) {
    throw ShapeError("channel index outside the channel plan");
  }
  const std::size_t spectral = j > l ? j - l : l - j;
  switch (spectral) {
    case 0: return 0.0;
    case 1: return 20.0;
    case 2: return 40.0;
    case 3: return 50.0;
    case 4: return 60.0;
    default: break;
  }
  const double fj = plan.carriers_hz[j];
  const double fl = plan.carriers_hz[l];
  return std::abs((fj - fl) / fj) <= 0.05 ? 95.0 : 110.0;
}

ShadowMatrix ShadowMatrix::draw(RngStream& rng, std::size_t uavs, double stddev_db) {
  ShadowMatrix shadows(uavs);
  for (std::size_t tx = 0; tx < uavs; ++tx) {
    for (std::size_t rx = 0; rx < uavs; ++rx) {
      if (tx == rx) continue;
      shadows.at(tx, rx) = stddev_db > 0.0 ? rng.normal(0.0, stddev_db) : 0.0;
    }
  }
  return shadows;
}

double interference_dbm(std::size_t rx, std::size_t tx, std::span<const double> tx_powers_dbm,
                        std::span<const Position3D> positions, const ShadowMatrix& shadows,
                        const ChannelPlan& plan) {
  if (tx_powers_dbm.size() != positions.size() || shadows.size() != positions.size()) {
    throw ShapeError("interference: one power, position and shadow row per UAV required");
  }
  double linear_mw = 0.0;
  bool any = false;
  for (std::size_t l = 0; l < positions.size(); ++l) {
    if (l == tx || l == rx) continue;
    const double received =
        tx_powers_dbm[l] - air_path_loss_db(positions[l], positions[rx], shadows.at(l, rx));
    linear_mw += std::pow(10.0, (received - channel_attenuation_db(rx, l, plan)) / 10.0);
    any = true;
  }
  if (!any) return kNoPowerDbm;
  return 10.0 * std::log10(linear_mw);
}

ReceptionOutcome classify_reception(double sinr_db, double gamma1, double gamma2) {
  if (sinr_db >= gamma2) return ReceptionOutcome::kDecoded;
  if (sinr_db > gamma1) return ReceptionOutcome::kDetectedOnly;
  return ReceptionOutcome::kLost;
}

LinkBudget link_budget(double tx_power_dbm, double path_loss, double interference,
                       const WorldConfig& cfg) {
  LinkBudget b;
  b.tx_power_dbm = tx_power_dbm;
  b.path_loss_db = path_loss;
  b.rx_power_dbm = tx_power_dbm - path_loss;
  b.interference_dbm = interference;
  if (interference == kNoPowerDbm) {
    b.sinr_db = b.rx_power_dbm - cfg.noise_power - cfg.sinr_offset;
  } else if (cfg.literal_db_sinr) {
    b.sinr_db = b.rx_power_dbm - interference - cfg.noise_power - cfg.sinr_offset;
  } else {
    const double floor_mw = std::pow(10.0, (cfg.noise_power + cfg.sinr_offset) / 10.0);
    const double interference_mw = std::pow(10.0, interference / 10.0);
    b.sinr_db = b.rx_power_dbm - 10.0 * std::log10(interference_mw + floor_mw);
  }
  return b;
}

std::vector<Reception> simulate_broadcasts(std::span<const Position3D> positions,
                                           std::span<const double> tx_powers_dbm,
                                           const ShadowMatrix& shadows, const ChannelPlan& plan,
                                           const WorldConfig& cfg) {
  const std::size_t n = positions.size();
  std::vector<Reception> out;
  out.reserve(n * (n > 0 ? n - 1 : 0));
  for (std::size_t tx = 0; tx < n; ++tx) {
    for (std::size_t rx = 0; rx < n; ++rx) {
      if (tx == rx) continue;
      const double pl = air_path_loss_db(positions[tx], positions[rx], shadows.at(tx, rx));
      const double interference =
          interference_dbm(rx, tx, tx_powers_dbm, positions, shadows, plan);
      Reception r;
      r.tx = tx;
      r.rx = rx;
      r.budget = link_budget(tx_powers_dbm[tx], pl, interference, cfg);
      r.outcome = classify_reception(r.budget.sinr_db, cfg.gamma1, cfg.gamma2);
      out.push_back(r);
    }
  }
  return out;
}

void write_comm_log_header(std::ostream& out) {
  out << "step,tx,rx,tx_power_dbm,path_loss_db,interference_dbm,sinr_db,outcome\n";
}

void write_comm_log_rows(std::ostream& out, std::size_t step, std::span<const Reception> rows) {
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%.6f,%.6f,%.6f,%.6f,", step, r.tx, r.rx,
                  r.budget.tx_power_dbm, r.budget.path_loss_db, r.budget.interference_dbm,
                  r.budget.sinr_db);
    out << buf << to_string(r.outcome) << '\n';
  }
}

}  // namespace swarm
