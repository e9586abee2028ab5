#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <set>
#include <vector>

#include "swarm/config.hpp"
#include "swarm/env.hpp"
#include "swarm/policy.hpp"

namespace swarm {

/// Inputs seen and actions taken at one step of an episode.
struct StepTrace {
  std::vector<Observation> observations;              // [agent]
  std::vector<std::vector<AdaptedMessage>> messages;  // [agent][sender slot]
  std::vector<ActionPair> actions;                    // [agent]
  double reward = 0.0;                                // R^t, shared by all agents
  std::set<std::size_t> covered;  // targets with a counted link at this step
  std::size_t decoded = 0;        // decoded directed transmissions
  std::size_t transmissions = 0;  // M (M - 1)
};

/// Everything needed to replay an episode's forward pass exactly.
struct EpisodeTrace {
  std::uint64_t world_index = 0;
  std::size_t num_targets = 0;
  std::vector<AgentRuntime> initial;  // recurrent state at t = 0, per agent
  std::vector<StepTrace> steps;
};

/// Per-step forward records and decisions, [t][agent].
struct EpisodeRecord {
  std::vector<std::vector<AgentStepRecord>> steps;
  std::vector<std::vector<AgentDecision>> decisions;
};

struct RolloutBatch {
  std::vector<EpisodeTrace> episodes;
  std::vector<EpisodeRecord> records;  // forward pass under the rollout parameters
  std::size_t agents = 0;
  std::size_t horizon = 0;

  /// T'_max = B * T_max.
  std::size_t total_iterations() const { return episodes.size() * horizon; }
};

/// True when the payload of message slot `slot` seen by `agent` at step `t`
/// is the sender's decoder output from step t - 1 (decoded, and t >= 1);
/// gradients flow back into the sender through such payloads.
bool payload_is_linked(const EpisodeTrace& trace, std::size_t t, std::size_t agent,
                       std::size_t slot);

/// Plays `batch_size` episodes starting at world index epoch * batch_size.
/// Each episode owns its world, environment, runtime and sampling substreams
/// so results do not depend on scheduling.
RolloutBatch rollout(const AgentNet& net, const ParameterSet& params, const Config& config,
                     std::uint64_t epoch, SampleMode mode);

/// Recomputes the forward pass of a recorded episode under `params`, feeding
/// decoded payloads from the recomputed sender messages.
EpisodeRecord replay_episode(const AgentNet& net, const ParameterSet& params,
                             const EpisodeTrace& trace);

/// return_to_go: G_t = R_t + gamma G_{t+1}; per_step: target = R_t.
std::vector<double> compute_returns(const std::vector<double>& rewards, double discount,
                                    AdvantageTarget mode);

/// [episode][t] value targets for a batch.
std::vector<std::vector<double>> batch_targets(const RolloutBatch& batch, double discount,
                                               AdvantageTarget mode);

/// [episode][t][agent] advantages target - V under the given records.
using Advantages = std::vector<std::vector<std::vector<double>>>;
Advantages compute_advantages(const std::vector<EpisodeRecord>& records,
                              const std::vector<std::vector<double>>& targets);

struct LossTerms {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
};

struct LossOptions {
  double value_coef = 0.014;
  double discount = 0.9;
  AdvantageTarget target = AdvantageTarget::kReturnToGo;
  std::size_t threads = 1;
};

/// L = (1/T') sum_episodes sum_t sum_m [ -(log pi_mov + log pi_pow) * A + beta (target - V)^2 ]
/// with A treated as a constant. Gradients run through the whole pipeline,
/// through time and through decoded messages between agents.
struct LossAndGrads {
  LossTerms loss;
  ParameterSet grads;
};

/// Throws StateError for an empty batch.
LossAndGrads loss_and_grads(const AgentNet& net, const ParameterSet& params,
                            const RolloutBatch& batch, const LossOptions& options);

/// Loss under `params` with advantages frozen to `advantages` (replays the
/// forward pass; used by finite-difference checks).
LossTerms loss_value(const AgentNet& net, const ParameterSet& params, const RolloutBatch& batch,
                     const LossOptions& options, const Advantages& advantages);

struct OptimizerState {
  ParameterSet accumulator;  // running mean of squared gradients
  double decay = 0.99;
  double epsilon = 1e-8;
  double learning_rate = 1e-4;
  std::size_t steps = 0;
};

OptimizerState make_optimizer(const ParameterSet& layout, const TrainingConfig& cfg);

/// acc = rho acc + (1 - rho) g^2;  theta -= lr g / (sqrt(acc) + eps)
void rmsprop_step(ParameterSet& params, const ParameterSet& grads, OptimizerState& state);

/// Rescales grads to L2 norm `max_norm` if larger; returns the original norm.
double clip_global_norm(ParameterSet& grads, double max_norm);

struct EpochMetrics;

struct TrainOptions {
  std::filesystem::path out_dir;
  bool resume = false;  // continue from out_dir's saved training state
  std::function<void(const EpochMetrics&)> on_epoch;
};

struct TrainResult {
  std::vector<EpochMetrics> metrics;  // every epoch of the run, including resumed ones
  ParameterSet params;
  OptimizerState optimizer;
};

/// For each epoch: rollout, loss_and_grads, clip, RMSProp step. Writes
/// manifest.txt, metrics.csv, checkpoints/ and the resume state into
/// out_dir. Throws IoError with the failing path.
TrainResult train(const Config& config, const TrainOptions& options);

/// Parameters initialized from the weight-init substream of config.world.seed.
ParameterSet initial_parameters(const AgentNet& net, const Config& config);

}  // namespace swarm
