#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace swarm::nn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row-major 64-bit tensor; data.size() == product(shape).
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims);

  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  std::size_t size() const { return data.size(); }
};

std::size_t element_count(const std::vector<std::size_t>& shape);

/// Named parameters in fixed insertion order. Also used, via zeros_like(),
/// as the gradient and optimizer-accumulator container.
class ParameterSet {
 public:
  /// Registers a new zero tensor and returns its handle. `init_bound` is the
  /// half-width of the uniform initializer. Duplicate names throw.
  std::size_t add(std::string name, std::vector<std::size_t> shape, double init_bound = 0.0);

  std::size_t count() const { return tensors_.size(); }
  std::size_t scalar_count() const;

  const std::string& name(std::size_t i) const { return names_[i]; }
  double init_bound(std::size_t i) const { return bounds_[i]; }
  Tensor& tensor(std::size_t i) { return tensors_[i]; }
  const Tensor& tensor(std::size_t i) const { return tensors_[i]; }
  std::optional<std::size_t> find(std::string_view name) const;

  Eigen::Map<Mat> matrix(std::size_t i);
  Eigen::Map<const Mat> matrix(std::size_t i) const;
  Eigen::Map<Vec> vector(std::size_t i);
  Eigen::Map<const Vec> vector(std::size_t i) const;

  ParameterSet zeros_like() const;
  bool same_layout(const ParameterSet& other) const;

  void fill(double value);
  /// this += scale * other. Layouts must match.
  void add_scaled(const ParameterSet& other, double scale);
  void scale(double factor);
  double squared_norm() const;
  bool all_finite() const;

  /// Flat views in canonical order (used by gradient checks).
  double& flat(std::size_t index);
  double flat(std::size_t index) const;

  friend bool operator==(const ParameterSet& a, const ParameterSet& b);

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
  std::vector<double> bounds_;
};

}  // namespace swarm::nn
