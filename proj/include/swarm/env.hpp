#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "swarm/comm.hpp"
#include "swarm/rng.hpp"
#include "swarm/sensing.hpp"
#include "swarm/world.hpp"

namespace swarm {

/// [x/L, y/H] then q_max blocks of
/// [snr/snr_scale, target x/L, y/H, z/z_scale, bs x/L, bs y/H].
using Observation = std::vector<double>;

inline constexpr std::size_t kMoveCount = 8;
/// SNR sentinel for unused observation blocks (before scaling).
inline constexpr double kSentinelSnrDb = -100.0;

std::size_t observation_size(const WorldConfig& cfg);

/// Unit direction of each discrete move: +x, -x, +y, -y, then the diagonals
/// (+,+), (+,-), (-,+), (-,-) with components 1/sqrt(2).
const std::array<std::array<double, 2>, kMoveCount>& move_directions();

enum class MessageStatus : int { kDecoded = 1, kDetectedOnly = 0, kLost = -1 };

MessageStatus status_of(ReceptionOutcome outcome);

/// Receiver-side view of one sender's transmission.
struct AdaptedMessage {
  std::vector<double> payload;  // sender's message if decoded, else N(0, I) noise
  MessageStatus status = MessageStatus::kDecoded;
  std::size_t sender = 0;  // 0-based UAV index

  /// [payload..., status, sender + 1]; the index feature is 1-based.
  std::vector<double> encode() const;
};

struct ActionPair {
  std::size_t move = 0;
  std::size_t power = 0;

  friend bool operator==(const ActionPair&, const ActionPair&) = default;
};

/// Moves by step_length along the chosen direction and clips to the arena.
Position3D apply_move(const Position3D& p, std::size_t move, const WorldConfig& cfg);

/// Up to q_max counted targets at UAV m, one block each, using for each
/// target the base station with the highest SNR; blocks in descending SNR
/// order, remaining blocks padded with the sentinel.
Observation build_observation(const World& world, const Position3D& uav,
                              std::span<const SensingLinkReport> ranked_links);

/// One message per sender j != receiver, ascending j. `outcomes[j]` is the
/// outcome of j -> receiver (the receiver's own entry is ignored).
std::vector<AdaptedMessage> adapt_messages(std::size_t receiver,
                                           std::span<const std::vector<double>> emitted,
                                           std::span<const ReceptionOutcome> outcomes,
                                           RngStream& rng);

struct StepResult {
  std::vector<Observation> observations;
  std::vector<std::vector<AdaptedMessage>> messages;  // [receiver][sender slot]
  RewardRecord reward;
  std::vector<Reception> receptions;  // (tx, rx) order
  bool done = false;
};

/// Decentralized partially observed environment with inter-UAV messaging.
/// Within a step all UAVs move, then sense, then broadcast.
class SwarmEnv {
 public:
  SwarmEnv(World world, RngStream rng);

  /// t = 0, UAVs at their start positions, previous messages zero with
  /// status Decoded.
  StepResult reset();

  /// Throws StateError after the episode finished or before reset.
  StepResult step(std::span<const ActionPair> actions,
                  std::span<const std::vector<double>> emitted);

  std::size_t time() const { return t_; }
  bool done() const { return done_; }
  const World& world() const { return world_; }
  std::span<const Position3D> positions() const { return positions_; }
  const SensingSnapshot& sensing() const { return sensing_; }

 private:
  std::vector<Observation> observe() const;

  World world_;
  RngStream rng_;
  std::vector<Position3D> positions_;
  SensingSnapshot sensing_;
  std::size_t t_ = 0;
  bool started_ = false;
  bool done_ = false;
};

/// step,uav,x,y,move,power_dbm,reward,covered_targets
void write_trajectory_header(std::ostream& out);
void write_trajectory_rows(std::ostream& out, std::size_t step,
                           std::span<const Position3D> positions,
                           std::span<const ActionPair> actions, const WorldConfig& cfg,
                           double reward, std::size_t covered_targets);

}  // namespace swarm
