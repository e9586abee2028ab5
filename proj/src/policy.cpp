#include "swarm/policy.hpp"

#include <cmath>
#include <string>

#include "swarm/errors.hpp"

namespace swarm {
namespace {

Vec or_zero(const Vec& v, std::size_t n) {
  return v.size() == 0 ? Vec::Zero(static_cast<Eigen::Index>(n)) : v;
}

LstmState state_or_zero(const LstmState& s, std::size_t n) {
  return {or_zero(s.hidden, n), or_zero(s.cell, n)};
}

}  // namespace

NetShape NetShape::from(const WorldConfig& world, const TrainingConfig& training) {
  NetShape s;
  s.agents = world.num_uavs;
  s.observation = observation_size(world);
  s.message = world.message_dim;
  s.power_levels = world.power_levels.size();
  s.ffn_width = training.ffn_width ? training.ffn_width : world.message_dim;
  s.decoder_hidden = training.decoder_hidden ? training.decoder_hidden : world.message_dim;
  s.key_width = training.key_width ? training.key_width : world.message_dim;
  return s;
}

AgentNet::AgentNet(const NetShape& shape) : shape_(shape) {
  if (shape.agents == 0 || shape.message == 0 || shape.observation == 0 ||
      shape.power_levels == 0 || shape.ffn_width == 0 || shape.decoder_hidden == 0 ||
      shape.key_width == 0) {
    throw ShapeError("AgentNet: every dimension must be positive");
  }
  obs_ffn = nn::Dense::create(layout_, "obs_ffn", shape.observation, shape.ffn_width);
  obs_lstm = nn::LstmCell::create(layout_, "obs_lstm", shape.ffn_width, shape.message);
  msg_ffn = nn::Dense::create(layout_, "msg_ffn", shape.adapted_message(), shape.ffn_width);
  msg_lstm = nn::LstmCell::create(layout_, "msg_lstm", shape.ffn_width, shape.message);
  attention = nn::MultiHeadAttention::create(layout_, "attention", shape.agents + 1,
                                             shape.message, shape.key_width);
  decoder = nn::FeedForward2::create(layout_, "msg_dec", shape.message, shape.decoder_hidden,
                                     shape.message);
  move_head = nn::Dense::create(layout_, "pi_mov", shape.message, kMoveCount);
  power_head = nn::Dense::create(layout_, "pi_pow", shape.message, shape.power_levels);
  value_head = nn::Dense::create(layout_, "value", shape.message, 1);
}

ParameterSet AgentNet::initialize(RngStream& rng) const {
  ParameterSet params = layout_;
  nn::initialize_uniform(params, rng);
  return params;
}

AgentRuntime init_runtime(std::size_t agent, const NetShape& shape, RngStream& rng) {
  const auto s = static_cast<Eigen::Index>(shape.message);
  auto draw = [&] {
    Vec v(s);
    for (Eigen::Index k = 0; k < s; ++k) v[k] = rng.normal(0.0, 0.1);
    return v;
  };
  AgentRuntime rt;
  rt.agent = agent;
  rt.observation.hidden = draw();
  rt.observation.cell = draw();
  for (std::size_t j = 0; j + 1 < shape.agents; ++j) {
    LstmState st;
    st.hidden = draw();
    st.cell = draw();
    rt.senders.push_back(std::move(st));
  }
  rt.last_message = Vec::Zero(s);
  return rt;
}

AgentDecision evaluate_agent(const AgentNet& net, const ParameterSet& params,
                             AgentRuntime& runtime, const Observation& observation,
                             std::span<const AdaptedMessage> messages, AgentStepRecord* record) {
  const auto& shape = net.shape();
  if (observation.size() != shape.observation) {
    throw ShapeError("observation has width " + std::to_string(observation.size()) +
                     ", expected " + std::to_string(shape.observation));
  }
  if (messages.size() + 1 != shape.agents || runtime.senders.size() + 1 != shape.agents) {
    throw ShapeError("expected " + std::to_string(shape.agents - 1) + " adapted messages, got " +
                     std::to_string(messages.size()));
  }
  if (record) {
    record->msg_ffn.assign(messages.size(), {});
    record->msg_lstm.assign(messages.size(), {});
  }

  const auto s = static_cast<Eigen::Index>(shape.message);
  Mat stacked(static_cast<Eigen::Index>(shape.agents), s);

  const Vec obs_vec = Eigen::Map<const Vec>(observation.data(),
                                            static_cast<Eigen::Index>(observation.size()));
  const Vec obs_embed = net.obs_ffn.forward(params, obs_vec, record ? &record->obs_ffn : nullptr);
  runtime.observation = net.obs_lstm.forward(params, obs_embed, runtime.observation,
                                             record ? &record->obs_lstm : nullptr);
  stacked.row(0) = runtime.observation.hidden.transpose();

  for (std::size_t j = 0; j < messages.size(); ++j) {
    const std::vector<double> enc = messages[j].encode();
    if (enc.size() != shape.adapted_message()) throw ShapeError("adapted message width mismatch");
    const Vec in = Eigen::Map<const Vec>(enc.data(), static_cast<Eigen::Index>(enc.size()));
    const Vec embed = net.msg_ffn.forward(params, in, record ? &record->msg_ffn[j] : nullptr);
    runtime.senders[j] = net.msg_lstm.forward(params, embed, runtime.senders[j],
                                              record ? &record->msg_lstm[j] : nullptr);
    stacked.row(static_cast<Eigen::Index>(j) + 1) = runtime.senders[j].hidden.transpose();
  }

  const Mat attended =
      net.attention.forward(params, stacked, record ? &record->attention : nullptr);
  const Vec pooled = attended.row(0).transpose();

  AgentDecision d;
  d.message = net.decoder.forward(params, pooled, record ? &record->decoder : nullptr);
  const Vec move_logits =
      net.move_head.forward(params, d.message, record ? &record->move_head : nullptr);
  const Vec power_logits =
      net.power_head.forward(params, d.message, record ? &record->power_head : nullptr);
  d.value = net.value_head.forward(params, d.message, record ? &record->value_head : nullptr)[0];
  d.move_probs = nn::softmax(move_logits);
  d.power_probs = nn::softmax(power_logits);
  d.move_log_probs = nn::log_softmax(move_logits);
  d.power_log_probs = nn::log_softmax(power_logits);

  runtime.last_message = d.message;
  if (record) record->recorded = true;
  return d;
}

std::size_t sample_categorical(const Vec& probs, RngStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return static_cast<std::size_t>(k);
  }
  // Rounding left the cumulative sum just below u: take the last
  // positive-probability entry.
  for (Eigen::Index k = probs.size() - 1; k >= 0; --k) {
    if (probs[k] > 0.0) return static_cast<std::size_t>(k);
  }
  return 0;
}

std::size_t argmax(const Vec& values) {
  Eigen::Index best = 0;
  values.maxCoeff(&best);
  return static_cast<std::size_t>(best);
}

void sample_action(AgentDecision& d, RngStream& rng, SampleMode mode) {
  switch (mode) {
    case SampleMode::kSample:
      d.action.move = sample_categorical(d.move_probs, rng);
      d.action.power = sample_categorical(d.power_probs, rng);
      break;
    case SampleMode::kGreedy:
      d.action.move = argmax(d.move_probs);
      d.action.power = argmax(d.power_probs);
      break;
    case SampleMode::kUniform:
      d.action.move = rng.index(static_cast<std::uint64_t>(d.move_probs.size()));
      d.action.power = rng.index(static_cast<std::uint64_t>(d.power_probs.size()));
      break;
  }
  d.move_log_prob = d.move_log_probs[static_cast<Eigen::Index>(d.action.move)];
  d.power_log_prob = d.power_log_probs[static_cast<Eigen::Index>(d.action.power)];
}

AgentDecision agent_forward(const AgentNet& net, const ParameterSet& params,
                            AgentRuntime& runtime, const Observation& observation,
                            std::span<const AdaptedMessage> messages, RngStream& rng,
                            SampleMode mode, AgentStepRecord* record) {
  AgentDecision d = evaluate_agent(net, params, runtime, observation, messages, record);
  sample_action(d, rng, mode);
  return d;
}

AgentStepInputGrads agent_backward(const AgentNet& net, const ParameterSet& params,
                                   ParameterSet& grads, const AgentStepRecord& record,
                                   const AgentStepUpstream& up) {
  if (!record.recorded) throw StateError("agent_backward() without a recorded forward pass");
  const auto& shape = net.shape();
  const std::size_t s = shape.message;

  Vec d_message = or_zero(up.message, s);
  d_message += net.move_head.backward(params, grads, record.move_head,
                                      or_zero(up.move_logits, kMoveCount));
  d_message += net.power_head.backward(params, grads, record.power_head,
                                       or_zero(up.power_logits, shape.power_levels));
  d_message += net.value_head.backward(params, grads, record.value_head,
                                       Vec::Constant(1, up.value));

  const Vec d_pooled = net.decoder.backward(params, grads, record.decoder, d_message);
  Mat d_attended = Mat::Zero(static_cast<Eigen::Index>(shape.agents),
                             static_cast<Eigen::Index>(s));
  d_attended.row(0) = d_pooled.transpose();
  const Mat d_stacked = net.attention.backward(params, grads, record.attention, d_attended);

  AgentStepInputGrads out;
  {
    LstmState d_state = state_or_zero(up.observation, s);
    d_state.hidden += d_stacked.row(0).transpose();
    const auto g = net.obs_lstm.backward(params, grads, record.obs_lstm, d_state);
    net.obs_ffn.backward(params, grads, record.obs_ffn, g.input);
    out.observation = g.state;
  }
  const std::size_t senders = record.msg_lstm.size();
  out.senders.resize(senders);
  out.payloads.resize(senders);
  for (std::size_t j = 0; j < senders; ++j) {
    LstmState d_state = j < up.senders.size() ? state_or_zero(up.senders[j], s)
                                              : state_or_zero({}, s);
    d_state.hidden += d_stacked.row(static_cast<Eigen::Index>(j) + 1).transpose();
    const auto g = net.msg_lstm.backward(params, grads, record.msg_lstm[j], d_state);
    const Vec d_adapted = net.msg_ffn.backward(params, grads, record.msg_ffn[j], g.input);
    out.senders[j] = g.state;
    out.payloads[j] = d_adapted.head(static_cast<Eigen::Index>(s));
  }
  return out;
}

}  // namespace swarm
