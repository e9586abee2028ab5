#include "swarm/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "swarm/errors.hpp"

namespace swarm {

EpochMetrics compute_epoch_metrics(const RolloutBatch& batch, double discount,
                                   std::size_t epoch, double mean_loss) {
  EpochMetrics m;
  m.epoch = epoch;
  m.mean_loss = mean_loss;
  if (batch.episodes.empty()) return m;

  double reward_sum = 0.0;
  double coverage_sum = 0.0;
  for (const auto& ep : batch.episodes) {
    double weight = 1.0;
    double discounted = 0.0;
    std::set<std::size_t> covered;
    for (const auto& step : ep.steps) {
      discounted += weight * step.reward;
      weight *= discount;
      covered.insert(step.covered.begin(), step.covered.end());
      m.decoded += step.decoded;
      m.transmissions += step.transmissions;
    }
    reward_sum += discounted;
    if (ep.num_targets > 0) {
      coverage_sum += 100.0 * static_cast<double>(covered.size()) /
                      static_cast<double>(ep.num_targets);
    }
  }
  const auto episodes = static_cast<double>(batch.episodes.size());
  m.mean_discounted_reward = reward_sum / episodes;
  m.pct_targets_covered = coverage_sum / episodes;
  m.comm_efficiency_pct =
      m.transmissions > 0
          ? 100.0 * static_cast<double>(m.decoded) / static_cast<double>(m.transmissions)
          : 0.0;
  return m;
}

std::vector<double> coverage_curve(const EpisodeTrace& trace) {
  std::vector<double> curve;
  std::set<std::size_t> covered;
  for (const auto& step : trace.steps) {
    covered.insert(step.covered.begin(), step.covered.end());
    curve.push_back(trace.num_targets
                        ? 100.0 * static_cast<double>(covered.size()) /
                              static_cast<double>(trace.num_targets)
                        : 0.0);
  }
  return curve;
}

std::string format_metrics_row(const EpochMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.6f,%.6f", m.epoch, m.mean_discounted_reward,
                m.pct_targets_covered, m.comm_efficiency_pct, m.mean_loss);
  return buf;
}

void emit_metrics_csv(const std::vector<EpochMetrics>& records,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("metrics '" + path.string() + "': cannot open for writing");
  out << kMetricsHeader << '\n';
  for (const auto& m : records) out << format_metrics_row(m) << '\n';
  if (!out) throw IoError("metrics '" + path.string() + "': write failed");
}

std::vector<EpochMetrics> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("metrics '" + path.string() + "': cannot open for reading");
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw IoError("metrics '" + path.string() + "': unexpected header");
  }
  std::vector<EpochMetrics> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    EpochMetrics m;
    char tail = 0;
    const int n = std::sscanf(line.c_str(), "%zu,%lf,%lf,%lf,%lf%c", &m.epoch,
                              &m.mean_discounted_reward, &m.pct_targets_covered,
                              &m.comm_efficiency_pct, &m.mean_loss, &tail);
    if (n != 5) {
      throw IoError("metrics '" + path.string() + "':" + std::to_string(lineno) +
                    ": malformed row");
    }
    rows.push_back(m);
  }
  return rows;
}

}  // namespace swarm
