#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "swarm/training.hpp"

namespace swarm {

struct EpochMetrics {
  std::size_t epoch = 0;
  double mean_discounted_reward = 0.0;  // sum_t gamma^(t-1) R^t, batch mean
  double pct_targets_covered = 0.0;     // unique covered targets / q, batch mean, x100
  double comm_efficiency_pct = 0.0;     // decoded / directed transmissions, x100
  double mean_loss = 0.0;
  std::size_t transmissions = 0;  // B T_max M (M - 1)
  std::size_t decoded = 0;
};

/// A target is covered in an episode once any (uav, bs, step) link to it is
/// counted; only Decoded receptions count as delivered.
EpochMetrics compute_epoch_metrics(const RolloutBatch& batch, double discount,
                                   std::size_t epoch, double mean_loss);

/// Cumulative covered percentage after each step of one episode.
std::vector<double> coverage_curve(const EpisodeTrace& trace);

inline constexpr const char* kMetricsHeader =
    "epoch,mean_discounted_reward,pct_targets_covered,comm_efficiency_pct,mean_loss";

/// One CSV row, six decimals, no trailing newline.
std::string format_metrics_row(const EpochMetrics& m);

/// Header plus one newline-terminated row per record.
void emit_metrics_csv(const std::vector<EpochMetrics>& records,
                      const std::filesystem::path& path);

/// Parses a file written by emit_metrics_csv (denominator fields are zero).
std::vector<EpochMetrics> read_metrics_csv(const std::filesystem::path& path);

}  // namespace swarm
