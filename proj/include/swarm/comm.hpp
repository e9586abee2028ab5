#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "swarm/config.hpp"
#include "swarm/geometry.hpp"
#include "swarm/rng.hpp"

namespace swarm {

/// Sentinel for "no power": an empty interferer set.
inline constexpr double kNoPowerDbm = -std::numeric_limits<double>::infinity();

/// One carrier per UAV on an arithmetic grid.
struct ChannelPlan {
  double base_hz = 0.0;
  double spacing_hz = 0.0;
  std::vector<double> carriers_hz;
};

ChannelPlan make_channel_plan(std::size_t uav_count, double base_hz, double spacing_hz);

enum class ReceptionOutcome { kDecoded, kDetectedOnly, kLost };

std::string_view to_string(ReceptionOutcome outcome);

/// 68.08 + 22.5 log10(d) + shadow. Throws DomainError for d == 0.
double path_loss_db(double distance_m, double shadow_db);
double path_loss_db(const Position3D& tx, const Position3D& rx, double shadow_db);

/// UAVs fly at one altitude and are clipped to the same arena edges, so two
/// of them can coincide. Links between UAVs use at least this separation.
inline constexpr double kMinUavSeparation = 1.0;

/// path_loss_db with the distance floored at kMinUavSeparation; used for all
/// UAV-to-UAV links.
double air_path_loss_db(const Position3D& tx, const Position3D& rx, double shadow_db);

/// Inter-channel attenuation by spectral distance |j - l|:
/// 0,1,2,3,4 -> 0,20,40,50,60 dB; >= 5 -> 95 dB if the relative carrier
/// offset |f_j - f_l| / f_j is at most 5 %, otherwise 110 dB.
double channel_attenuation_db(std::size_t j, std::size_t l, const ChannelPlan& plan);

/// Shadow-fading samples for every directed link of one step, indexed
/// [tx][rx]. Diagonal entries are zero and never drawn.
class ShadowMatrix {
 public:
  explicit ShadowMatrix(std::size_t uavs) : n_(uavs), values_(uavs * uavs, 0.0) {}

  /// Draws in (tx, rx) lexicographic order, skipping tx == rx.
  static ShadowMatrix draw(RngStream& rng, std::size_t uavs, double stddev_db);

  double at(std::size_t tx, std::size_t rx) const { return values_[tx * n_ + rx]; }
  double& at(std::size_t tx, std::size_t rx) { return values_[tx * n_ + rx]; }
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  std::vector<double> values_;
};

/// Aggregate interference at receiver `rx` while `tx` transmits: every other
/// UAV l (l != tx, l != rx) contributes P_l - PL(l->rx) - T(C_rx, C_l). Terms
/// are summed as linear milliwatts. Returns kNoPowerDbm when no interferer
/// exists.
double interference_dbm(std::size_t rx, std::size_t tx, std::span<const double> tx_powers_dbm,
                        std::span<const Position3D> positions, const ShadowMatrix& shadows,
                        const ChannelPlan& plan);

struct LinkBudget {
  double tx_power_dbm = 0.0;
  double path_loss_db = 0.0;
  double rx_power_dbm = 0.0;
  double interference_dbm = kNoPowerDbm;
  double sinr_db = 0.0;
};

/// Gamma >= gamma2 -> Decoded; gamma1 < Gamma < gamma2 -> DetectedOnly;
/// Gamma <= gamma1 -> Lost.
ReceptionOutcome classify_reception(double sinr_db, double gamma1, double gamma2);

/// SINR of one directed link. Interference and the (noise + offset) floor are
/// combined as linear powers unless cfg.literal_db_sinr is set, in which case
/// the dB terms are subtracted directly.
LinkBudget link_budget(double tx_power_dbm, double path_loss_db, double interference_dbm,
                       const WorldConfig& cfg);

struct Reception {
  std::size_t tx = 0;
  std::size_t rx = 0;
  LinkBudget budget;
  ReceptionOutcome outcome = ReceptionOutcome::kLost;
};

/// All M(M-1) directed receptions of one broadcast round, in (tx, rx) order.
std::vector<Reception> simulate_broadcasts(std::span<const Position3D> positions,
                                           std::span<const double> tx_powers_dbm,
                                           const ShadowMatrix& shadows, const ChannelPlan& plan,
                                           const WorldConfig& cfg);

/// step,tx,rx,tx_power_dbm,path_loss_db,interference_dbm,sinr_db,outcome
void write_comm_log_header(std::ostream& out);
void write_comm_log_rows(std::ostream& out, std::size_t step, std::span<const Reception> rows);

}  // namespace swarm
