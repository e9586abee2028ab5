#include "swarm/selfcheck.hpp"

#include <cmath>
#include <cstdio>

#include "swarm/comm.hpp"
#include "swarm/nn/layers.hpp"
#include "swarm/sensing.hpp"
#include "swarm/training.hpp"
#include "swarm/world.hpp"

namespace swarm {
namespace {

using nn::GradCheckReport;
using nn::Mat;
using nn::ParameterSet;
using nn::Vec;

Vec random_vec(RngStream& rng, std::size_t n) {
  Vec v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = rng.normal(0.0, 1.0);
  return v;
}

Mat random_mat(RngStream& rng, std::size_t r, std::size_t c) {
  Mat m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, 1.0);
  return m;
}

std::vector<double> flatten(const Vec& v) { return {v.data(), v.data() + v.size()}; }
std::vector<double> flatten(const Mat& m) { return {m.data(), m.data() + m.size()}; }

Vec as_vec(const std::vector<double>& x, std::size_t offset, std::size_t n) {
  return Eigen::Map<const Vec>(x.data() + offset, static_cast<Eigen::Index>(n));
}

ParameterSet random_params(const ParameterSet& layout, RngStream& rng) {
  ParameterSet p = layout;
  nn::initialize_uniform(p, rng);
  return p;
}

void push(std::vector<SelfCheck>& out, std::string name, bool ok, std::string detail) {
  out.push_back({std::move(name), ok, std::move(detail)});
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

}  // namespace

std::vector<NamedGradCheck> block_gradient_checks(std::uint64_t seed, double tolerance) {
  std::vector<NamedGradCheck> out;
  RngStream rng(seed, 0x67726164ULL);

  {
    ParameterSet layout;
    const nn::Dense d = nn::Dense::create(layout, "dense", 5, 3);
    const ParameterSet p = random_params(layout, rng);
    const Vec x = random_vec(rng, 5), w = random_vec(rng, 3);
    nn::Dense::Record rec;
    d.forward(p, x, &rec);
    ParameterSet g = p.zeros_like();
    const Vec dx = d.backward(p, g, rec, w);
    out.push_back({"dense.params", nn::finite_difference_check(
                                       [&](const ParameterSet& q) { return w.dot(d.forward(q, x)); },
                                       p, g, tolerance)});
    out.push_back({"dense.input", nn::finite_difference_check(
                                      [&](const std::vector<double>& v) {
                                        return w.dot(d.forward(p, as_vec(v, 0, 5)));
                                      },
                                      flatten(x), flatten(dx), tolerance)});
  }

  {
    ParameterSet layout;
    const nn::FeedForward2 f = nn::FeedForward2::create(layout, "ffn", 4, 6, 3);
    const ParameterSet p = random_params(layout, rng);
    const Vec x = random_vec(rng, 4), w = random_vec(rng, 3);
    nn::FeedForward2::Record rec;
    f.forward(p, x, &rec);
    ParameterSet g = p.zeros_like();
    const Vec dx = f.backward(p, g, rec, w);
    out.push_back({"ffn2.params", nn::finite_difference_check(
                                      [&](const ParameterSet& q) { return w.dot(f.forward(q, x)); },
                                      p, g, tolerance)});
    out.push_back({"ffn2.input", nn::finite_difference_check(
                                     [&](const std::vector<double>& v) {
                                       return w.dot(f.forward(p, as_vec(v, 0, 4)));
                                     },
                                     flatten(x), flatten(dx), tolerance)});
  }

  {
    const std::size_t in = 3, width = 4;
    ParameterSet layout;
    const nn::LstmCell cell = nn::LstmCell::create(layout, "lstm", in, width);
    const ParameterSet p = random_params(layout, rng);
    const Vec x = random_vec(rng, in);
    const nn::LstmState prev{random_vec(rng, width), random_vec(rng, width)};
    const nn::LstmState w{random_vec(rng, width), random_vec(rng, width)};
    auto readout = [&](const nn::LstmState& s) { return w.hidden.dot(s.hidden) + w.cell.dot(s.cell); };
    nn::LstmCell::Record rec;
    cell.forward(p, x, prev, &rec);
    ParameterSet g = p.zeros_like();
    const auto grads = cell.backward(p, g, rec, w);
    out.push_back({"lstm.params", nn::finite_difference_check(
                                      [&](const ParameterSet& q) {
                                        return readout(cell.forward(q, x, prev));
                                      },
                                      p, g, tolerance)});
    std::vector<double> packed = flatten(x);
    for (double v : flatten(prev.hidden)) packed.push_back(v);
    for (double v : flatten(prev.cell)) packed.push_back(v);
    std::vector<double> analytic = flatten(grads.input);
    for (double v : flatten(grads.state.hidden)) analytic.push_back(v);
    for (double v : flatten(grads.state.cell)) analytic.push_back(v);
    out.push_back({"lstm.input_and_state",
                   nn::finite_difference_check(
                       [&](const std::vector<double>& v) {
                         const nn::LstmState s{as_vec(v, in, width), as_vec(v, in + width, width)};
                         return readout(cell.forward(p, as_vec(v, 0, in), s));
                       },
                       packed, analytic, tolerance)});
  }

  {
    const std::size_t rows = 4, width = 5, heads = 3, dk = 2;
    ParameterSet layout;
    const nn::MultiHeadAttention att =
        nn::MultiHeadAttention::create(layout, "attention", heads, width, dk);
    const ParameterSet p = random_params(layout, rng);
    const Mat x = random_mat(rng, rows, width), w = random_mat(rng, rows, width);
    auto readout = [&](const Mat& y) { return (w.array() * y.array()).sum(); };
    nn::MultiHeadAttention::Record rec;
    att.forward(p, x, &rec);
    ParameterSet g = p.zeros_like();
    const Mat dx = att.backward(p, g, rec, w);
    out.push_back({"attention.params", nn::finite_difference_check(
                                           [&](const ParameterSet& q) {
                                             return readout(att.forward(q, x));
                                           },
                                           p, g, tolerance)});
    out.push_back({"attention.input",
                   nn::finite_difference_check(
                       [&](const std::vector<double>& v) {
                         const Mat xm = Eigen::Map<const Mat>(v.data(), rows, width);
                         return readout(att.forward(p, xm));
                       },
                       flatten(x), flatten(dx), tolerance)});
  }
  return out;
}

Config gradcheck_config() {
  Config c;
  auto& w = c.world;
  w.arena_length = 200;
  w.arena_width = 200;
  w.num_uavs = 2;
  w.num_base_stations = 2;
  w.num_targets = 6;
  w.max_resolved = 2;
  w.message_dim = 4;
  w.max_steps = 3;
  w.seed = 7;
  c.training.batch_size = 2;
  c.training.epochs = 1;
  // Large enough to make the value term visible next to the policy term.
  c.training.value_coef = 0.5;
  return c;
}

nn::GradCheckReport pipeline_gradient_check(const Config& config, double tolerance) {
  const AgentNet net(NetShape::from(config.world, config.training));
  // At the initial scale attention is close to uniform and many coordinates
  // have gradients near 1e-7, under the round-off floor of a central
  // difference at eps = 1e-5. A wider draw keeps every coordinate measurable.
  ParameterSet params = initial_parameters(net, config);
  params.scale(kPipelineCheckScale);
  const RolloutBatch batch = rollout(net, params, config, 0, SampleMode::kSample);
  const LossOptions options{config.training.value_coef, config.world.discount,
                            config.training.advantage_target, 1};
  const LossAndGrads lg = loss_and_grads(net, params, batch, options);
  const Advantages frozen = compute_advantages(
      batch.records, batch_targets(batch, options.discount, options.target));
  return nn::finite_difference_check(
      [&](const ParameterSet& p) { return loss_value(net, p, batch, options, frozen).total; },
      params, lg.grads, tolerance);
}

std::vector<SelfCheck> run_self_checks() {
  std::vector<SelfCheck> out;
  WorldConfig cfg;

  const BaseStation bs{{0, 0, 0}, cfg.bs_tx_power, cfg.bs_tx_gain};
  const Target target{{100, 0, 0}, 0.0};
  const double near = sensing_snr(bs, target, {200, 0, 0}, cfg);
  push(out, "sensing_snr 100m/100m", std::abs(near - 14.62) <= 0.01,
       fmt("%.4f dB, expected %.2f", near, 14.62));
  const Target far_target{{500, 0, 0}, 0.0};
  const double far = sensing_snr(bs, far_target, {1000, 0, 0}, cfg);
  push(out, "sensing_snr 500m/500m", std::abs(far - (-13.34)) <= 0.01,
       fmt("%.4f dB, expected %.2f", far, -13.34));

  const double pl = path_loss_db(100.0, 0.0);
  push(out, "path_loss 100m", std::abs(pl - 113.08) <= 1e-9, fmt("%.6f dB, expected %.2f", pl, 113.08));

  const ChannelPlan plan = make_channel_plan(8, cfg.comm_base_frequency, cfg.comm_channel_spacing);
  const double table[] = {0, 20, 40, 50, 60, 95};
  bool ok = true;
  for (std::size_t d = 0; d < 6; ++d) ok = ok && channel_attenuation_db(0, d, plan) == table[d];
  push(out, "channel attenuation table", ok, "spectral distances 0..5");

  const LinkBudget lone = link_budget(60.0, 120.0, kNoPowerDbm, cfg);
  push(out, "sinr without interference", lone.sinr_db == 60.0 - 120.0 - cfg.noise_power - 30.0,
       fmt("%.6f dB, expected %.6f", lone.sinr_db, 60.0 - 120.0 - cfg.noise_power - 30.0));

  for (const auto& [name, report] : block_gradient_checks(1, 1e-4)) {
    push(out, "gradcheck " + name, report.passed,
         fmt("max relative error %.3g over %.0f scalars", report.max_relative_error,
             static_cast<double>(report.checked)));
  }
  const auto pipe = pipeline_gradient_check(gradcheck_config(), 1e-4);
  push(out, "gradcheck pipeline", pipe.passed,
       fmt("max relative error %.3g over %.0f parameters", pipe.max_relative_error,
           static_cast<double>(pipe.checked)) +
           (pipe.passed ? "" : " (worst " + pipe.worst_name + ")"));
  return out;
}

}  // namespace swarm
