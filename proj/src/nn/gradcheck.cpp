#include "swarm/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "swarm/errors.hpp"

namespace swarm::nn {
namespace {

void update(GradCheckReport& r, std::size_t index, double analytic, double numeric) {
  const double err = relative_error(analytic, numeric);
  if (r.checked == 0 || err > r.max_relative_error || !std::isfinite(err)) {
    r.max_relative_error = std::isfinite(err) ? err : INFINITY;
    r.worst_index = index;
    r.analytic_at_worst = analytic;
    r.numeric_at_worst = numeric;
  }
  ++r.checked;
}

}  // namespace

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport finite_difference_check(const std::function<double(const std::vector<double>&)>& f,
                                        std::vector<double> x,
                                        const std::vector<double>& analytic, double tolerance,
                                        double eps) {
  if (x.size() != analytic.size()) throw ShapeError("gradient check: size mismatch");
  GradCheckReport r;
  r.worst_name = "input";
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + eps;
    const double up = f(x);
    x[i] = saved - eps;
    const double down = f(x);
    x[i] = saved;
    update(r, i, analytic[i], (up - down) / (2.0 * eps));
  }
  r.passed = r.max_relative_error < tolerance;
  return r;
}

GradCheckReport finite_difference_check(const std::function<double(const ParameterSet&)>& f,
                                        ParameterSet params, const ParameterSet& analytic,
                                        double tolerance, double eps) {
  if (!params.same_layout(analytic)) throw ShapeError("gradient check: layout mismatch");
  GradCheckReport r;
  std::size_t flat = 0;
  std::size_t worst_param = 0;
  for (std::size_t p = 0; p < params.count(); ++p) {
    auto& data = params.tensor(p).data;
    for (std::size_t k = 0; k < data.size(); ++k, ++flat) {
      const double saved = data[k];
      data[k] = saved + eps;
      const double up = f(params);
      data[k] = saved - eps;
      const double down = f(params);
      data[k] = saved;
      const std::size_t before = r.worst_index;
      const std::size_t checked_before = r.checked;
      update(r, flat, analytic.tensor(p).data[k], (up - down) / (2.0 * eps));
      if (r.worst_index != before || checked_before == 0) worst_param = p;
    }
  }
  if (params.count() > 0) r.worst_name = params.name(worst_param);
  r.passed = r.max_relative_error < tolerance;
  return r;
}

}  // namespace swarm::nn
