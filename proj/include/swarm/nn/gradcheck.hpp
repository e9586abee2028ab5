#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "swarm/nn/tensor.hpp"

namespace swarm::nn {

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  std::string worst_name;  // parameter name, or "input" for flat checks
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  std::size_t checked = 0;
  bool passed = false;
};

/// Relative error |a - n| / max(|a|, |n|, floor). The floor keeps
/// near-zero gradients from amplifying rounding noise.
double relative_error(double analytic, double numeric, double floor = 1e-6);

/// Central differences (f(x + eps) - f(x - eps)) / 2 eps on every coordinate
/// of `x`, compared against `analytic`.
GradCheckReport finite_difference_check(const std::function<double(const std::vector<double>&)>& f,
                                        std::vector<double> x,
                                        const std::vector<double>& analytic, double tolerance,
                                        double eps = 1e-5);

/// Same over every scalar of a ParameterSet; `analytic` must share its layout.
GradCheckReport finite_difference_check(const std::function<double(const ParameterSet&)>& f,
                                        ParameterSet params, const ParameterSet& analytic,
                                        double tolerance, double eps = 1e-5);

}  // namespace swarm::nn
