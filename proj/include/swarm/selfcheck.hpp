#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swarm/config.hpp"
#include "swarm/nn/gradcheck.hpp"

namespace swarm {

struct NamedGradCheck {
  std::string name;
  nn::GradCheckReport report;
};

/// Finite-difference checks of each layer (parameters, inputs and recurrent
/// state) under a random linear read-out of its output.
std::vector<NamedGradCheck> block_gradient_checks(std::uint64_t seed, double tolerance);

/// Small world (2 UAVs, s = 4, 3 steps, 2 episodes) whose UAVs sit close enough to
/// decode each other, so gradients cross agents through messages.
Config gradcheck_config();

/// Factor applied to the initial weights before the pipeline check.
inline constexpr double kPipelineCheckScale = 2.5;

/// Full loss (policy and value terms, advantages frozen) against every
/// network parameter, on a rollout sampled at the scaled parameters.
nn::GradCheckReport pipeline_gradient_check(const Config& config, double tolerance);

struct SelfCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Channel reference values plus all gradient checks.
std::vector<SelfCheck> run_self_checks();

}  // namespace swarm
