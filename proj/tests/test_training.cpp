#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "swarm/errors.hpp"
#include "swarm/metrics.hpp"
#include "swarm/nn/checkpoint.hpp"
#include "swarm/selfcheck.hpp"
#include "swarm/training.hpp"

using namespace swarm;
namespace fs = std::filesystem;

namespace {

Config small() {
  Config c;
  c.world.num_uavs = 3;
  c.world.num_base_stations = 2;
  c.world.num_targets = 10;
  c.world.max_resolved = 3;
  c.world.message_dim = 6;
  c.world.max_steps = 8;
  c.world.arena_length = c.world.arena_width = 400;
  c.training.batch_size = 3;
  c.training.epochs = 4;
  c.training.checkpoint_interval = 2;
  return c;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "swarm_test_training" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("returns to go") {
  const auto g = compute_returns({1, 1, 1}, 0.9, AdvantageTarget::kReturnToGo);
  CHECK(g[0] == doctest::Approx(2.71));
  CHECK(g[1] == doctest::Approx(1.9));
  CHECK(g[2] == 1.0);
  CHECK(compute_returns({3, -2}, 0.9, AdvantageTarget::kPerStep) == std::vector<double>{3, -2});
  CHECK(compute_returns({5}, 0.0, AdvantageTarget::kReturnToGo) == std::vector<double>{5});
}

TEST_CASE("rmsprop update against hand computation") {
  ParameterSet p;
  p.add("w", {2});
  p.flat(0) = 1.0;
  p.flat(1) = -1.0;
  ParameterSet g = p.zeros_like();
  g.flat(0) = 0.5;
  g.flat(1) = -2.0;
  TrainingConfig tc;
  OptimizerState opt = make_optimizer(p, tc);
  rmsprop_step(p, g, opt);
  const double acc0 = 0.01 * 0.25, acc1 = 0.01 * 4.0;
  CHECK(opt.accumulator.flat(0) == doctest::Approx(acc0));
  CHECK(p.flat(0) == doctest::Approx(1.0 - 1e-4 * 0.5 / (std::sqrt(acc0) + 1e-8)));
  CHECK(p.flat(1) == doctest::Approx(-1.0 + 1e-4 * 2.0 / (std::sqrt(acc1) + 1e-8)));
  rmsprop_step(p, g, opt);
  CHECK(opt.accumulator.flat(0) == doctest::Approx(0.99 * acc0 + 0.01 * 0.25));
  CHECK(opt.steps == 2);

  ParameterSet other;
  other.add("v", {3});
  CHECK_THROWS_AS(rmsprop_step(p, other, opt), ShapeError);
}

TEST_CASE("global norm clipping") {
  ParameterSet g;
  g.add("a", {2});
  g.flat(0) = 6.0;
  g.flat(1) = 8.0;
  CHECK(clip_global_norm(g, 5.0) == 10.0);
  CHECK(g.flat(0) == doctest::Approx(3.0));
  CHECK(g.flat(1) == doctest::Approx(4.0));
  CHECK(clip_global_norm(g, 5.0) == doctest::Approx(5.0));
  CHECK(g.flat(1) == doctest::Approx(4.0));
}

TEST_CASE("rollouts are deterministic and independent of thread count") {
  Config c = small();
  const AgentNet net(NetShape::from(c.world, c.training));
  const ParameterSet params = initial_parameters(net, c);
  const RolloutBatch a = rollout(net, params, c, 2, SampleMode::kSample);
  c.training.threads = 3;
  const RolloutBatch b = rollout(net, params, c, 2, SampleMode::kSample);
  REQUIRE(a.episodes.size() == 3);
  CHECK(a.total_iterations() == 24);
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(a.episodes[e].world_index == 6 + e);
    for (std::size_t t = 0; t < 8; ++t) {
      CHECK(a.episodes[e].steps[t].reward == b.episodes[e].steps[t].reward);
      CHECK(a.episodes[e].steps[t].actions == b.episodes[e].steps[t].actions);
      CHECK(a.episodes[e].steps[t].transmissions == 6);
    }
  }
  const auto la = loss_and_grads(net, params, a, {});
  LossOptions threaded;
  threaded.threads = 3;
  const auto lb = loss_and_grads(net, params, b, threaded);
  CHECK(la.loss.total == lb.loss.total);
  CHECK(la.grads == lb.grads);
}

TEST_CASE("replay reproduces the recorded forward pass") {
  const Config c = small();
  const AgentNet net(NetShape::from(c.world, c.training));
  const ParameterSet params = initial_parameters(net, c);
  const RolloutBatch batch = rollout(net, params, c, 0, SampleMode::kSample);
  for (std::size_t e = 0; e < batch.episodes.size(); ++e) {
    const EpisodeRecord rec = replay_episode(net, params, batch.episodes[e]);
    for (std::size_t t = 0; t < 8; ++t) {
      for (std::size_t m = 0; m < 3; ++m) {
        const auto& x = rec.decisions[t][m];
        const auto& y = batch.records[e].decisions[t][m];
        CHECK(x.value == y.value);
        CHECK(x.message == y.message);
        CHECK(x.move_log_prob == y.move_log_prob);
      }
      for (std::size_t slot = 0; slot < 2; ++slot) {
        if (t == 0) CHECK_FALSE(payload_is_linked(batch.episodes[e], t, 0, slot));
      }
    }
  }
}

TEST_CASE("full loss gradient matches central differences") {
  const auto report = pipeline_gradient_check(gradcheck_config(), 1e-4);
  INFO("worst " << report.worst_name << " err " << report.max_relative_error);
  CHECK(report.passed);
}

TEST_CASE("a small step along the negative gradient lowers the frozen loss") {
  const Config c = small();
  const AgentNet net(NetShape::from(c.world, c.training));
  ParameterSet params = initial_parameters(net, c);
  const RolloutBatch batch = rollout(net, params, c, 0, SampleMode::kSample);
  const LossOptions opts{c.training.value_coef, c.world.discount, c.training.advantage_target, 1};
  const LossAndGrads lg = loss_and_grads(net, params, batch, opts);
  const Advantages adv =
      compute_advantages(batch.records, batch_targets(batch, opts.discount, opts.target));
  const double before = loss_value(net, params, batch, opts, adv).total;
  CHECK(before == doctest::Approx(lg.loss.total).epsilon(1e-12));
  params.add_scaled(lg.grads, -1e-3 / std::sqrt(lg.grads.squared_norm()));
  CHECK(loss_value(net, params, batch, opts, adv).total < before);
}

TEST_CASE("empty batches are rejected") {
  const Config c = small();
  const AgentNet net(NetShape::from(c.world, c.training));
  const ParameterSet params = initial_parameters(net, c);
  CHECK_THROWS_AS(loss_and_grads(net, params, RolloutBatch{}, {}), StateError);
}

TEST_CASE("training writes its run directory and resumes exactly") {
  const Config c = small();
  const fs::path full = fresh_dir("full"), split = fresh_dir("split");
  TrainOptions o;
  o.out_dir = full;
  const TrainResult whole = train(c, o);
  CHECK(whole.metrics.size() == 4);
  CHECK(fs::exists(full / "manifest.txt"));
  CHECK(fs::exists(full / "checkpoints" / "epoch_0000.ckpt"));
  CHECK(fs::exists(full / "checkpoints" / "epoch_0002.ckpt"));
  CHECK(fs::exists(full / "checkpoints" / "epoch_0004.ckpt"));
  const auto manifest = nn::read_manifest(full / "manifest.txt");
  const auto ckpt = nn::read_manifest(full / "checkpoints" / "epoch_0002.manifest");
  CHECK(manifest.at("config_hash") == ckpt.at("config_hash"));
  CHECK(manifest.at("config.world.num_uavs") == "3");

  Config first = c;
  first.training.epochs = 2;
  o.out_dir = split;
  train(first, o);
  o.resume = true;
  const TrainResult resumed = train(c, o);
  CHECK(slurp(split / "metrics.csv") == slurp(full / "metrics.csv"));
  CHECK(resumed.params == whole.params);
  CHECK(resumed.optimizer.accumulator == whole.optimizer.accumulator);

  Config changed = c;
  changed.world.seed = 99;
  CHECK_THROWS_AS(train(changed, o), ConfigError);
}

TEST_CASE("zero epochs leaves a header-only metrics file and the initial checkpoint") {
  Config c = small();
  c.training.epochs = 0;
  const fs::path dir = fresh_dir("zero");
  TrainOptions o;
  o.out_dir = dir;
  const TrainResult r = train(c, o);
  CHECK(r.metrics.empty());
  CHECK(slurp(dir / "metrics.csv") == std::string(kMetricsHeader) + "\n");
  CHECK(fs::exists(dir / "checkpoints" / "epoch_0000.ckpt"));
  const AgentNet net(NetShape::from(c.world, c.training));
  CHECK(nn::load_parameters(dir / "checkpoints" / "epoch_0000.ckpt", net.layout()) ==
        initial_parameters(net, c));
}

TEST_CASE("unwritable output directory is reported") {
  Config c = small();
  c.training.epochs = 1;
  const fs::path blocker = fresh_dir("blocker");
  fs::create_directories(blocker.parent_path());
  std::ofstream(blocker) << "file, not a directory";
  TrainOptions o;
  o.out_dir = blocker / "run";
  CHECK_THROWS_AS(train(c, o), IoError);
}
