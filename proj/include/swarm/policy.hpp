#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "swarm/config.hpp"
#include "swarm/env.hpp"
#include "swarm/nn/layers.hpp"
#include "swarm/nn/tensor.hpp"
#include "swarm/rng.hpp"

namespace swarm {

using nn::LstmState;
using nn::Mat;
using nn::ParameterSet;
using nn::Vec;

/// Dimensions of the per-agent network.
struct NetShape {
  std::size_t agents = 0;        // M; attention uses M + 1 heads
  std::size_t observation = 0;   // 2 + 6 q_max
  std::size_t message = 0;       // s, also every recurrent width
  std::size_t power_levels = 0;
  std::size_t ffn_width = 0;     // encoder FFN output (LSTM input) width
  std::size_t decoder_hidden = 0;
  std::size_t key_width = 0;     // d_k

  static NetShape from(const WorldConfig& world, const TrainingConfig& training);
  std::size_t adapted_message() const { return message + 2; }
};

/// Handles to every block of the pipeline. One instance plus one
/// ParameterSet drives all agents (parameters are shared).
///
/// Per agent and step:
///   o~, c   = obs_lstm(obs_ffn(o), o~_prev, c_prev)
///   m"_j    = msg_lstm(msg_ffn(m~_j), m"_j_prev, c~_j_prev)   for each sender j
///   h       = row 0 of MultiHead([o~; m"_j...])
///   message = decoder(h)          (two layers, ReLU)
///   pi_mov, pi_pow, V             all read `message`
class AgentNet {
 public:
  explicit AgentNet(const NetShape& shape);

  const NetShape& shape() const { return shape_; }
  /// Zero-filled parameters with this network's names and shapes.
  const ParameterSet& layout() const { return layout_; }
  /// Uniform(-sqrt(1/fan_in), sqrt(1/fan_in)) initialization.
  ParameterSet initialize(RngStream& rng) const;

  nn::Dense obs_ffn;
  nn::LstmCell obs_lstm;
  nn::Dense msg_ffn;
  nn::LstmCell msg_lstm;
  nn::MultiHeadAttention attention;
  nn::FeedForward2 decoder;
  nn::Dense move_head;
  nn::Dense power_head;
  nn::Dense value_head;

 private:
  NetShape shape_;
  ParameterSet layout_;
};

struct AgentRuntime {
  std::size_t agent = 0;
  LstmState observation;
  std::vector<LstmState> senders;  // M - 1 states, ascending sender index
  Vec last_message;
};

/// Recurrent states ~ N(0, 0.01 I); last message zero.
AgentRuntime init_runtime(std::size_t agent, const NetShape& shape, RngStream& rng);

struct AgentStepRecord {
  nn::Dense::Record obs_ffn;
  nn::LstmCell::Record obs_lstm;
  std::vector<nn::Dense::Record> msg_ffn;
  std::vector<nn::LstmCell::Record> msg_lstm;
  nn::MultiHeadAttention::Record attention;
  nn::FeedForward2::Record decoder;
  nn::Dense::Record move_head;
  nn::Dense::Record power_head;
  nn::Dense::Record value_head;
  bool recorded = false;
};

struct AgentDecision {
  Vec move_probs;
  Vec power_probs;
  Vec move_log_probs;
  Vec power_log_probs;
  Vec message;  // m_m^t, width s
  double value = 0.0;
  ActionPair action;
  double move_log_prob = 0.0;
  double power_log_prob = 0.0;
};

/// Forward pass without sampling. Advances `runtime` (recurrent states and
/// last message). Throws ShapeError for a wrong observation width or message
/// count.
AgentDecision evaluate_agent(const AgentNet& net, const ParameterSet& params,
                             AgentRuntime& runtime, const Observation& observation,
                             std::span<const AdaptedMessage> messages,
                             AgentStepRecord* record = nullptr);

enum class SampleMode { kSample, kGreedy, kUniform };

std::size_t sample_categorical(const Vec& probs, RngStream& rng);
std::size_t argmax(const Vec& values);

/// Picks both actions (categorical, argmax, or uniform over the action set)
/// and stores them with their log-probabilities under the network's heads.
void sample_action(AgentDecision& decision, RngStream& rng, SampleMode mode);

/// evaluate_agent followed by sample_action.
AgentDecision agent_forward(const AgentNet& net, const ParameterSet& params,
                            AgentRuntime& runtime, const Observation& observation,
                            std::span<const AdaptedMessage> messages, RngStream& rng,
                            SampleMode mode, AgentStepRecord* record = nullptr);

/// Gradients arriving at one agent step.
struct AgentStepUpstream {
  Vec move_logits;
  Vec power_logits;
  double value = 0.0;
  Vec message;                      // from receivers at the next step; may be empty
  LstmState observation;            // from the next step; may be empty
  std::vector<LstmState> senders;   // from the next step; may be empty
};

/// Gradients leaving one agent step towards earlier steps.
struct AgentStepInputGrads {
  LstmState observation;
  std::vector<LstmState> senders;
  std::vector<Vec> payloads;  // dL/d adapted-message payload, per sender slot
};

AgentStepInputGrads agent_backward(const AgentNet& net, const ParameterSet& params,
                                   ParameterSet& grads, const AgentStepRecord& record,
                                   const AgentStepUpstream& upstream);

}  // namespace swarm
