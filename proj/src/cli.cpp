#include "swarm/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "swarm/errors.hpp"
#include "swarm/metrics.hpp"
#include "swarm/nn/checkpoint.hpp"
#include "swarm/selfcheck.hpp"
#include "swarm/training.hpp"
#include "swarm/world.hpp"

namespace swarm {
namespace {

namespace fs = std::filesystem;

// Evaluation worlds start far past any training epoch.
constexpr std::uint64_t kEvalEpoch = 1u << 30;

fs::path default_out(const std::string& fallback) {
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return fallback;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

ParameterSet load_policy(const AgentNet& net, const Config& config, const fs::path& checkpoint) {
  fs::path manifest = checkpoint;
  manifest.replace_extension(".manifest");
  if (fs::exists(manifest)) {
    const auto entries = nn::read_manifest(manifest);
    const auto it = entries.find("config_hash");
    if (it != entries.end() && it->second != config_hash(config)) {
      std::cerr << "warning: checkpoint config hash " << it->second << " differs from "
                << config_hash(config) << " (" << manifest.string() << ")\n";
    }
  }
  return nn::load_parameters(checkpoint, net.layout());
}

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed,
              std::optional<std::size_t> epochs, std::optional<std::string> out_dir,
              std::size_t runs, bool resume) {
  Config config = load_config(config_path);
  if (seed) config.world.seed = *seed;
  if (epochs) config.training.epochs = *epochs;
  const fs::path root = out_dir ? fs::path(*out_dir) : default_out("runs");

  std::vector<std::vector<EpochMetrics>> all;
  for (std::size_t r = 0; r < runs; ++r) {
    Config run_config = config;
    run_config.world.seed = config.world.seed + r;
    TrainOptions options;
    options.out_dir = runs == 1 ? root : root / ("run_" + std::to_string(r));
    options.resume = resume;
    options.on_epoch = [](const EpochMetrics& m) { std::cout << format_metrics_row(m) << "\n"; };
    std::cout << "# run " << r << " seed " << run_config.world.seed << " -> "
              << options.out_dir.string() << "\n"
              << kMetricsHeader << "\n";
    all.push_back(train(run_config, options).metrics);
  }

  if (runs > 1) {
    std::vector<EpochMetrics> mean = all.front();
    for (std::size_t e = 0; e < mean.size(); ++e) {
      EpochMetrics acc{};
      acc.epoch = mean[e].epoch;
      for (const auto& run : all) {
        acc.mean_discounted_reward += run[e].mean_discounted_reward / runs;
        acc.pct_targets_covered += run[e].pct_targets_covered / runs;
        acc.comm_efficiency_pct += run[e].comm_efficiency_pct / runs;
        acc.mean_loss += run[e].mean_loss / runs;
        acc.transmissions += run[e].transmissions;
        acc.decoded += run[e].decoded;
      }
      mean[e] = acc;
    }
    emit_metrics_csv(mean, root / "metrics.csv");
    std::cout << "# seed-averaged metrics -> " << (root / "metrics.csv").string() << "\n";
  }
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& config_path, bool greedy) {
  const Config config = load_config(config_path);
  const AgentNet net(NetShape::from(config.world, config.training));
  const ParameterSet params = load_policy(net, config, checkpoint);
  const RolloutBatch batch =
      rollout(net, params, config, kEvalEpoch, greedy ? SampleMode::kGreedy : SampleMode::kSample);
  const EpochMetrics m = compute_epoch_metrics(batch, config.world.discount, 0, 0.0);
  std::cout << kMetricsHeader << "\n" << format_metrics_row(m) << "\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& policy,
                 const std::string& checkpoint, std::optional<std::string> out_dir,
                 std::uint64_t world_index) {
  const Config config = load_config(config_path);
  const auto& wc = config.world;
  const AgentNet net(NetShape::from(wc, config.training));
  ParameterSet params;
  SampleMode mode = SampleMode::kSample;
  if (policy == "checkpoint") {
    if (checkpoint.empty()) throw ConfigError("simulate --policy checkpoint needs --checkpoint");
    params = load_policy(net, config, checkpoint);
  } else {
    params = initial_parameters(net, config);
    mode = SampleMode::kUniform;
  }

  const fs::path dir = out_dir ? fs::path(*out_dir) : default_out("sim");
  std::error_code ec;
  fs::create_directories(dir, ec);
  auto trajectory = open_out(dir / "trajectory.csv");
  auto links = open_out(dir / "link_report.csv");
  auto comm = open_out(dir / "comm_log.csv");
  write_trajectory_header(trajectory);
  write_link_report_header(links);
  write_comm_log_header(comm);

  SwarmEnv env(build_world(wc, world_index),
               RngStream(wc.seed, StreamPurpose::kEnvironment, kEvalEpoch, world_index));
  RngStream init_rng(wc.seed, StreamPurpose::kRuntimeInit, kEvalEpoch, world_index);
  RngStream action_rng(wc.seed, StreamPurpose::kActionSampling, kEvalEpoch, world_index);
  std::vector<AgentRuntime> runtimes;
  for (std::size_t m = 0; m < wc.num_uavs; ++m) {
    runtimes.push_back(init_runtime(m, net.shape(), init_rng));
  }

  StepResult current = env.reset();
  std::set<std::size_t> covered;
  double discounted = 0.0, weight = 1.0;
  std::size_t decoded = 0, sent = 0;
  while (!env.done()) {
    std::vector<ActionPair> actions;
    std::vector<std::vector<double>> emitted;
    for (std::size_t m = 0; m < wc.num_uavs; ++m) {
      const AgentDecision d = agent_forward(net, params, runtimes[m], current.observations[m],
                                            current.messages[m], action_rng, mode);
      actions.push_back(d.action);
      emitted.emplace_back(d.message.data(), d.message.data() + d.message.size());
    }
    current = env.step(actions, emitted);
    covered.insert(current.reward.covered_targets.begin(), current.reward.covered_targets.end());
    write_trajectory_rows(trajectory, env.time(), env.positions(), actions, wc,
                          current.reward.total_snr, covered.size());
    write_link_report_rows(links, env.time(), env.sensing());
    write_comm_log_rows(comm, env.time(), current.receptions);
    discounted += weight * current.reward.total_snr;
    weight *= wc.discount;
    for (const auto& r : current.receptions) decoded += r.outcome == ReceptionOutcome::kDecoded;
    sent += current.receptions.size();
  }

  std::printf("policy=%s world=%llu discounted_reward=%.6f pct_targets_covered=%.6f "
              "comm_efficiency_pct=%.6f\n",
              policy.c_str(), static_cast<unsigned long long>(world_index), discounted,
              100.0 * covered.size() / wc.num_targets,
              sent ? 100.0 * decoded / sent : 0.0);
  std::cout << "traces written to " << dir.string() << "\n";
  return 0;
}

int cmd_check() {
  int failures = 0;
  for (const auto& c : run_self_checks()) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    failures += !c.passed;
  }
  std::cout << (failures ? "some checks failed" : "all checks passed") << "\n";
  return failures ? 1 : 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"UAV swarm sensing and messaging simulator with multi-agent policy training"};
  app.require_subcommand(1);

  std::string config_path, checkpoint, policy = "random";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<std::string> out_dir;
  std::size_t runs = 1;
  std::uint64_t world_index = 0;
  bool resume = false, greedy = false;

  auto* train_cmd = app.add_subcommand("train", "train the swarm policy");
  train_cmd->add_option("--config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--seed", seed, "override world.seed");
  train_cmd->add_option("--epochs", epochs, "override training.epochs");
  train_cmd->add_option("--out", out_dir, std::string("output directory (default $") + kOutDirEnv + " or ./runs)");
  train_cmd->add_option("--runs", runs, "independent seeds, averaged into out/metrics.csv")
      ->check(CLI::PositiveNumber);
  train_cmd->add_flag("--resume", resume, "continue from the state saved in --out");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a saved policy on held-out worlds");
  eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_flag("--greedy", greedy, "take the most likely actions");

  auto* sim_cmd = app.add_subcommand("simulate", "play one episode and write CSV traces");
  sim_cmd->add_option("--config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--policy", policy, "random or checkpoint")
      ->check(CLI::IsMember({"random", "checkpoint"}));
  sim_cmd->add_option("--checkpoint", checkpoint, "checkpoint file for --policy checkpoint");
  sim_cmd->add_option("--out", out_dir, std::string("trace directory (default $") + kOutDirEnv + " or ./sim)");
  sim_cmd->add_option("--world", world_index, "world layout index");

  auto* check_cmd = app.add_subcommand("check", "run channel reference values and gradient checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train_cmd) return cmd_train(config_path, seed, epochs, out_dir, runs, resume);
    if (*eval_cmd) return cmd_eval(checkpoint, config_path, greedy);
    if (*sim_cmd) return cmd_simulate(config_path, policy, checkpoint, out_dir, world_index);
    if (*check_cmd) return cmd_check();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace swarm
