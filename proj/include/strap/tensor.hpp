// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace strap {

// Dense row-major tensor of 64-bit reals. Rank 1 (vectors) and rank 2
// (matrices, including row-batched activations) are what the model uses.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> shape_, std::vector<double> data_);

  static Tensor zeros(const std::vector<std::size_t>& shape);
  static Tensor vec(std::vector<double> values);
  static Tensor scalar(double value);
  // Row-major matrix literal.
  static Tensor mat(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  bool empty() const { return data.empty(); }

  // Rank-1 tensors are treated as a single row where a 2-d view is needed.
  std::size_t rows() const;
  std::size_t cols() const;

  double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }
  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  bool all_finite() const;
  void fill(double value);

  std::string shape_str() const;
};

// Throws DimensionError naming both shapes.
void check_same_shape(const Tensor& a, const Tensor& b, const char* op);

// Euclidean norm over the concatenation of all tensors.
double l2_norm(const std::vector<Tensor>& tensors);

}  // namespace strap
