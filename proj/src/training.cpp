#include "swarm/training.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "swarm/errors.hpp"
#include "swarm/metrics.hpp"
#include "swarm/nn/checkpoint.hpp"
#include "swarm/world.hpp"

namespace swarm {
namespace {

constexpr const char* kVersion = "swarm 0.1.0";

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index writes
/// only its own output slot, so the result is schedule-independent.
template <class Body>
void parallel_for(std::size_t n, std::size_t threads, Body body) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t workers = std::min(threads, n);
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

void run_episode(const AgentNet& net, const ParameterSet& params, const Config& config,
                 std::uint64_t epoch, std::size_t episode, SampleMode mode, EpisodeTrace& trace,
                 EpisodeRecord& record) {
  const auto& wc = config.world;
  const std::uint64_t world_index = epoch * config.training.batch_size + episode;
  SwarmEnv env(build_world(wc, world_index),
               RngStream(wc.seed, StreamPurpose::kEnvironment, epoch, episode));
  RngStream init_rng(wc.seed, StreamPurpose::kRuntimeInit, epoch, episode);
  RngStream action_rng(wc.seed, StreamPurpose::kActionSampling, epoch, episode);

  const std::size_t agents = wc.num_uavs;
  std::vector<AgentRuntime> runtimes;
  for (std::size_t m = 0; m < agents; ++m) runtimes.push_back(init_runtime(m, net.shape(), init_rng));

  trace.world_index = world_index;
  trace.num_targets = wc.num_targets;
  trace.initial = runtimes;
  trace.steps.assign(wc.max_steps, {});
  record.steps.assign(wc.max_steps, std::vector<AgentStepRecord>(agents));
  record.decisions.assign(wc.max_steps, {});

  StepResult current = env.reset();
  for (std::size_t t = 0; t < wc.max_steps; ++t) {
    StepTrace& st = trace.steps[t];
    st.observations = std::move(current.observations);
    st.messages = std::move(current.messages);

    std::vector<ActionPair> actions(agents);
    std::vector<std::vector<double>> emitted(agents);
    for (std::size_t m = 0; m < agents; ++m) {
      AgentDecision d = agent_forward(net, params, runtimes[m], st.observations[m],
                                      st.messages[m], action_rng, mode, &record.steps[t][m]);
      actions[m] = d.action;
      emitted[m] = to_std(d.message);
      record.decisions[t].push_back(std::move(d));
    }

    current = env.step(actions, emitted);
    st.actions = actions;
    st.reward = current.reward.total_snr;
    st.covered = current.reward.covered_targets;
    st.transmissions = current.receptions.size();
    for (const auto& r : current.receptions) {
      if (r.outcome == ReceptionOutcome::kDecoded) ++st.decoded;
    }
  }
}

void backward_episode(const AgentNet& net, const ParameterSet& params, const EpisodeTrace& trace,
                      const EpisodeRecord& record, const std::vector<double>& targets,
                      const std::vector<std::vector<double>>& advantages, double value_coef,
                      double inv_iterations, ParameterSet& grads) {
  const std::size_t horizon = trace.steps.size();
  const std::size_t agents = trace.initial.size();
  const std::size_t s = net.shape().message;

  std::vector<LstmState> obs_grad(agents);
  std::vector<std::vector<LstmState>> sender_grad(agents);
  std::vector<Vec> message_grad(agents);  // dL/d m_m^t from receivers at t + 1

  for (std::size_t t = horizon; t-- > 0;) {
    std::vector<Vec> earlier(agents, Vec::Zero(static_cast<Eigen::Index>(s)));
    for (std::size_t m = 0; m < agents; ++m) {
      const AgentDecision& d = record.decisions[t][m];
      const ActionPair& a = trace.steps[t].actions[m];
      const double adv = advantages[t][m] * inv_iterations;

      AgentStepUpstream up;
      up.move_logits = adv * d.move_probs;
      up.move_logits[static_cast<Eigen::Index>(a.move)] -= adv;
      up.power_logits = adv * d.power_probs;
      up.power_logits[static_cast<Eigen::Index>(a.power)] -= adv;
      up.value = -2.0 * value_coef * (targets[t] - d.value) * inv_iterations;
      up.message = message_grad[m];
      up.observation = obs_grad[m];
      up.senders = sender_grad[m];

      AgentStepInputGrads g = agent_backward(net, params, grads, record.steps[t][m], up);
      obs_grad[m] = std::move(g.observation);
      sender_grad[m] = std::move(g.senders);
      for (std::size_t slot = 0; slot < g.payloads.size(); ++slot) {
        if (payload_is_linked(trace, t, m, slot)) {
          earlier[trace.steps[t].messages[m][slot].sender] += g.payloads[slot];
        }
      }
    }
    message_grad = std::move(earlier);
  }
}

LossTerms episode_loss(const EpisodeTrace& trace, const EpisodeRecord& record,
                       const std::vector<double>& targets,
                       const std::vector<std::vector<double>>& advantages, double value_coef,
                       double inv_iterations) {
  LossTerms terms;
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    for (std::size_t m = 0; m < trace.initial.size(); ++m) {
      const AgentDecision& d = record.decisions[t][m];
      const double err = targets[t] - d.value;
      terms.policy -= (d.move_log_prob + d.power_log_prob) * advantages[t][m] * inv_iterations;
      terms.value += value_coef * err * err * inv_iterations;
    }
  }
  terms.total = terms.policy + terms.value;
  return terms;
}

std::string pad_epoch(std::size_t epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "epoch_%04zu", epoch);
  return buf;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void save_checkpoint(const std::filesystem::path& dir, const std::string& stem,
                     const ParameterSet& params, const std::string& hash, std::size_t epoch) {
  nn::save_parameters(dir / (stem + ".ckpt"), params);
  nn::write_manifest(dir / (stem + ".manifest"),
                     {{"config_hash", hash}, {"epoch", std::to_string(epoch)}, {"version", kVersion}});
}

}  // namespace

bool payload_is_linked(const EpisodeTrace& trace, std::size_t t, std::size_t agent,
                       std::size_t slot) {
  return t >= 1 && trace.steps[t].messages[agent][slot].status == MessageStatus::kDecoded;
}

RolloutBatch rollout(const AgentNet& net, const ParameterSet& params, const Config& config,
                     std::uint64_t epoch, SampleMode mode) {
  config.validate();
  const std::size_t b = config.training.batch_size;
  RolloutBatch batch;
  batch.agents = config.world.num_uavs;
  batch.horizon = config.world.max_steps;
  batch.episodes.resize(b);
  batch.records.resize(b);
  parallel_for(b, config.training.threads, [&](std::size_t e) {
    run_episode(net, params, config, epoch, e, mode, batch.episodes[e], batch.records[e]);
  });
  return batch;
}

EpisodeRecord replay_episode(const AgentNet& net, const ParameterSet& params,
                             const EpisodeTrace& trace) {
  const std::size_t agents = trace.initial.size();
  EpisodeRecord record;
  record.steps.assign(trace.steps.size(), std::vector<AgentStepRecord>(agents));
  record.decisions.assign(trace.steps.size(), {});
  std::vector<AgentRuntime> runtimes = trace.initial;

  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    const StepTrace& st = trace.steps[t];
    for (std::size_t m = 0; m < agents; ++m) {
      std::vector<AdaptedMessage> messages = st.messages[m];
      for (std::size_t slot = 0; slot < messages.size(); ++slot) {
        if (payload_is_linked(trace, t, m, slot)) {
          messages[slot].payload = to_std(record.decisions[t - 1][messages[slot].sender].message);
        }
      }
      AgentDecision d = evaluate_agent(net, params, runtimes[m], st.observations[m], messages,
                                       &record.steps[t][m]);
      d.action = st.actions[m];
      d.move_log_prob = d.move_log_probs[static_cast<Eigen::Index>(d.action.move)];
      d.power_log_prob = d.power_log_probs[static_cast<Eigen::Index>(d.action.power)];
      record.decisions[t].push_back(std::move(d));
    }
  }
  return record;
}

std::vector<double> compute_returns(const std::vector<double>& rewards, double discount,
                                    AdvantageTarget mode) {
  if (mode == AdvantageTarget::kPerStep) return rewards;
  std::vector<double> g(rewards.size());
  double acc = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    acc = rewards[t] + discount * acc;
    g[t] = acc;
  }
  return g;
}

std::vector<std::vector<double>> batch_targets(const RolloutBatch& batch, double discount,
                                               AdvantageTarget mode) {
  std::vector<std::vector<double>> out;
  for (const auto& ep : batch.episodes) {
    std::vector<double> rewards;
    for (const auto& st : ep.steps) rewards.push_back(st.reward);
    out.push_back(compute_returns(rewards, discount, mode));
  }
  return out;
}

Advantages compute_advantages(const std::vector<EpisodeRecord>& records,
                              const std::vector<std::vector<double>>& targets) {
  Advantages adv(records.size());
  for (std::size_t e = 0; e < records.size(); ++e) {
    const auto& rec = records[e];
    adv[e].resize(rec.decisions.size());
    for (std::size_t t = 0; t < rec.decisions.size(); ++t) {
      for (const auto& d : rec.decisions[t]) adv[e][t].push_back(targets[e][t] - d.value);
    }
  }
  return adv;
}

LossAndGrads loss_and_grads(const AgentNet& net, const ParameterSet& params,
                            const RolloutBatch& batch, const LossOptions& options) {
  if (batch.episodes.empty() || batch.total_iterations() == 0) {
    throw StateError("loss_and_grads: empty batch");
  }
  if (batch.records.size() != batch.episodes.size()) {
    throw StateError("loss_and_grads: batch has no recorded forward pass");
  }
  const auto targets = batch_targets(batch, options.discount, options.target);
  const auto advantages = compute_advantages(batch.records, targets);
  const double inv = 1.0 / static_cast<double>(batch.total_iterations());

  const std::size_t n = batch.episodes.size();
  std::vector<ParameterSet> partial(n);
  std::vector<LossTerms> terms(n);
  parallel_for(n, options.threads, [&](std::size_t e) {
    partial[e] = params.zeros_like();
    backward_episode(net, params, batch.episodes[e], batch.records[e], targets[e], advantages[e],
                     options.value_coef, inv, partial[e]);
    terms[e] = episode_loss(batch.episodes[e], batch.records[e], targets[e], advantages[e],
                            options.value_coef, inv);
  });

  LossAndGrads out;
  out.grads = params.zeros_like();
  for (std::size_t e = 0; e < n; ++e) {
    out.grads.add_scaled(partial[e], 1.0);
    out.loss.policy += terms[e].policy;
    out.loss.value += terms[e].value;
  }
  out.loss.total = out.loss.policy + out.loss.value;
  return out;
}

LossTerms loss_value(const AgentNet& net, const ParameterSet& params, const RolloutBatch& batch,
                     const LossOptions& options, const Advantages& advantages) {
  if (batch.episodes.empty() || batch.total_iterations() == 0) {
    throw StateError("loss_value: empty batch");
  }
  const auto targets = batch_targets(batch, options.discount, options.target);
  const double inv = 1.0 / static_cast<double>(batch.total_iterations());
  LossTerms total;
  for (std::size_t e = 0; e < batch.episodes.size(); ++e) {
    const EpisodeRecord rec = replay_episode(net, params, batch.episodes[e]);
    const LossTerms t =
        episode_loss(batch.episodes[e], rec, targets[e], advantages[e], options.value_coef, inv);
    total.policy += t.policy;
    total.value += t.value;
  }
  total.total = total.policy + total.value;
  return total;
}

OptimizerState make_optimizer(const ParameterSet& layout, const TrainingConfig& cfg) {
  OptimizerState s;
  s.accumulator = layout.zeros_like();
  s.decay = cfg.rms_decay;
  s.epsilon = cfg.rms_epsilon;
  s.learning_rate = cfg.learning_rate;
  return s;
}

void rmsprop_step(ParameterSet& params, const ParameterSet& grads, OptimizerState& state) {
  if (!params.same_layout(grads) || !params.same_layout(state.accumulator)) {
    throw ShapeError("rmsprop_step: parameter, gradient and accumulator layouts differ");
  }
  for (std::size_t p = 0; p < params.count(); ++p) {
    auto& theta = params.tensor(p).data;
    const auto& g = grads.tensor(p).data;
    auto& acc = state.accumulator.tensor(p).data;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      acc[k] = state.decay * acc[k] + (1.0 - state.decay) * g[k] * g[k];
      theta[k] -= state.learning_rate * g[k] / (std::sqrt(acc[k]) + state.epsilon);
    }
  }
  ++state.steps;
}

double clip_global_norm(ParameterSet& grads, double max_norm) {
  const double norm = std::sqrt(grads.squared_norm());
  if (max_norm > 0.0 && norm > max_norm) grads.scale(max_norm / norm);
  return norm;
}

ParameterSet initial_parameters(const AgentNet& net, const Config& config) {
  RngStream rng(config.world.seed, StreamPurpose::kWeightInit);
  return net.initialize(rng);
}

TrainResult train(const Config& config, const TrainOptions& options) {
  config.validate();
  namespace fs = std::filesystem;
  const fs::path out = options.out_dir;
  const fs::path ckpt_dir = out / "checkpoints";
  const fs::path state_dir = out / "state";
  std::error_code ec;
  fs::create_directories(ckpt_dir, ec);
  fs::create_directories(state_dir, ec);
  if (!fs::is_directory(ckpt_dir) || !fs::is_directory(state_dir)) {
    throw IoError("cannot create output directory '" + out.string() + "'");
  }

  const AgentNet net(NetShape::from(config.world, config.training));
  const std::string hash = config_hash(config);
  const fs::path metrics_path = out / "metrics.csv";

  TrainResult result;
  std::size_t start_epoch = 0;
  if (options.resume) {
    const auto state = nn::read_manifest(state_dir / "training_state.txt");
    if (state.at("config_hash") != hash) {
      throw ConfigError("resume: config hash " + hash + " does not match saved state " +
                        state.at("config_hash") + " in '" + state_dir.string() + "'");
    }
    start_epoch = std::stoull(state.at("next_epoch"));
    result.params = nn::load_parameters(state_dir / "params.ckpt", net.layout());
    result.optimizer = make_optimizer(net.layout(), config.training);
    result.optimizer.accumulator = nn::load_parameters(state_dir / "optimizer.ckpt", net.layout());
    result.optimizer.steps = std::stoull(state.at("optimizer_steps"));
    auto previous = read_metrics_csv(metrics_path);
    if (previous.size() < start_epoch) {
      throw IoError("resume: '" + metrics_path.string() + "' has fewer rows than saved epochs");
    }
    previous.resize(start_epoch);
    result.metrics = std::move(previous);
  } else {
    result.params = initial_parameters(net, config);
    result.optimizer = make_optimizer(net.layout(), config.training);
    save_checkpoint(ckpt_dir, pad_epoch(0), result.params, hash, 0);
  }

  std::map<std::string, std::string> manifest{
      {"config_hash", hash},
      {"seed", std::to_string(config.world.seed)},
      {"version", kVersion},
      {"start_time", utc_now()},
      {"resumed_from_epoch", std::to_string(start_epoch)},
      {"metrics_csv", metrics_path.string()},
      {"checkpoint_dir", ckpt_dir.string()},
      {"state_dir", state_dir.string()},
  };
  {
    std::istringstream cfg_text(to_config_text(config));
    std::string line, section;
    while (std::getline(cfg_text, line)) {
      if (line.empty()) continue;
      if (line.front() == '[') {
        section = line.substr(1, line.size() - 2);
        continue;
      }
      const auto eq = line.find(" = ");
      manifest["config." + section + "." + line.substr(0, eq)] = line.substr(eq + 3);
    }
  }
  nn::write_manifest(out / "manifest.txt", manifest);

  emit_metrics_csv(result.metrics, metrics_path);

  const LossOptions loss_options{config.training.value_coef, config.world.discount,
                                 config.training.advantage_target, config.training.threads};
  for (std::size_t epoch = start_epoch; epoch < config.training.epochs; ++epoch) {
    const RolloutBatch batch = rollout(net, result.params, config, epoch, SampleMode::kSample);
    LossAndGrads lg = loss_and_grads(net, result.params, batch, loss_options);
    EpochMetrics metrics = compute_epoch_metrics(batch, config.world.discount, epoch, lg.loss.total);
    clip_global_norm(lg.grads, config.training.grad_clip);
    rmsprop_step(result.params, lg.grads, result.optimizer);

    result.metrics.push_back(metrics);
    emit_metrics_csv(result.metrics, metrics_path);
    if (options.on_epoch) options.on_epoch(metrics);
    const std::size_t done = epoch + 1;
    if (config.training.checkpoint_interval > 0 && done % config.training.checkpoint_interval == 0) {
      save_checkpoint(ckpt_dir, pad_epoch(done), result.params, hash, done);
    }
  }

  const std::size_t final_epoch = std::max(start_epoch, config.training.epochs);
  save_checkpoint(ckpt_dir, "latest", result.params, hash, final_epoch);
  nn::save_parameters(state_dir / "params.ckpt", result.params);
  nn::save_parameters(state_dir / "optimizer.ckpt", result.optimizer.accumulator);
  nn::write_manifest(state_dir / "training_state.txt",
                     {{"config_hash", hash},
                      {"next_epoch", std::to_string(final_epoch)},
                      {"optimizer_steps", std::to_string(result.optimizer.steps)},
                      {"seed", std::to_string(config.world.seed)}});
  return result;
}

}  // namespace swarm
