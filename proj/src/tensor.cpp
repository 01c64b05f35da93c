// SPDX-License-Identifier: Apache-2.0
#include "strap/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "strap/errors.hpp"

namespace strap {

static std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

Tensor::Tensor(std::vector<std::size_t> shape_, std::vector<double> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
  if (shape_product(shape) != data.size()) {
    throw DimensionError("tensor data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_str());
  }
}

Tensor Tensor::zeros(const std::vector<std::size_t>& shape) {
  return Tensor(shape, std::vector<double>(shape_product(shape), 0.0));
}

Tensor Tensor::vec(std::vector<double> values) {
  std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::mat(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

std::size_t Tensor::rows() const {
  if (shape.size() >= 2) return shape[0];
  return 1;
}

std::size_t Tensor::cols() const {
  if (shape.empty()) return 0;
  if (shape.size() >= 2) return shape[1];
  return shape[0];
}

bool Tensor::all_finite() const {
  for (double x : data) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void Tensor::fill(double value) {
  std::fill(data.begin(), data.end(), value);
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_str() +
                         " vs " + b.shape_str());
  }
}

double l2_norm(const std::vector<Tensor>& tensors) {
  double sq = 0.0;
  for (const Tensor& t : tensors) {
    for (double x : t.data) sq += x * x;
  }
  return std::sqrt(sq);
}

}  // namespace strap
