#include "swarm/nn/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "swarm/errors.hpp"

namespace swarm::nn {

std::size_t element_count(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(std::vector<std::size_t> dims)
    : shape(std::move(dims)), data(element_count(shape), 0.0) {}

std::size_t ParameterSet::add(std::string name, std::vector<std::size_t> shape,
                              double init_bound) {
  if (find(name)) throw ShapeError("duplicate parameter name '" + name + "'");
  if (shape.empty() || shape.size() > 2) throw ShapeError("parameters are rank 1 or 2");
  names_.push_back(std::move(name));
  tensors_.emplace_back(std::move(shape));
  bounds_.push_back(init_bound);
  return tensors_.size() - 1;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

std::optional<std::size_t> ParameterSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

Eigen::Map<Mat> ParameterSet::matrix(std::size_t i) {
  auto& t = tensors_[i];
  return {t.data.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}

Eigen::Map<const Mat> ParameterSet::matrix(std::size_t i) const {
  const auto& t = tensors_[i];
  return {t.data.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}

Eigen::Map<Vec> ParameterSet::vector(std::size_t i) {
  auto& t = tensors_[i];
  return {t.data.data(), static_cast<Eigen::Index>(t.size())};
}

Eigen::Map<const Vec> ParameterSet::vector(std::size_t i) const {
  const auto& t = tensors_[i];
  return {t.data.data(), static_cast<Eigen::Index>(t.size())};
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out = *this;
  out.fill(0.0);
  return out;
}

bool ParameterSet::same_layout(const ParameterSet& other) const {
  if (names_ != other.names_) return false;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (tensors_[i].shape != other.tensors_[i].shape) return false;
  }
  return true;
}

void ParameterSet::fill(double value) {
  for (auto& t : tensors_) std::fill(t.data.begin(), t.data.end(), value);
}

void ParameterSet::add_scaled(const ParameterSet& other, double scale) {
  if (!same_layout(other)) throw ShapeError("add_scaled: parameter layouts differ");
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    auto& a = tensors_[i].data;
    const auto& b = other.tensors_[i].data;
    for (std::size_t k = 0; k < a.size(); ++k) a[k] += scale * b[k];
  }
}

void ParameterSet::scale(double factor) {
  for (auto& t : tensors_) {
    for (auto& v : t.data) v *= factor;
  }
}

double ParameterSet::squared_norm() const {
  double s = 0.0;
  for (const auto& t : tensors_) {
    for (double v : t.data) s += v * v;
  }
  return s;
}

bool ParameterSet::all_finite() const {
  for (const auto& t : tensors_) {
    for (double v : t.data) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

double& ParameterSet::flat(std::size_t index) {
  for (auto& t : tensors_) {
    if (index < t.size()) return t.data[index];
    index -= t.size();
  }
  throw ShapeError("flat index out of range");
}

double ParameterSet::flat(std::size_t index) const {
  return const_cast<ParameterSet*>(this)->flat(index);
}

bool operator==(const ParameterSet& a, const ParameterSet& b) {
  if (!a.same_layout(b)) return false;
  for (std::size_t i = 0; i < a.tensors_.size(); ++i) {
    if (a.tensors_[i].data != b.tensors_[i].data) return false;
  }
  return true;
}

}  // namespace swarm::nn
