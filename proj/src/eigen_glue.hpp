// SPDX-License-Identifier: Apache-2.0
#pragma once

// Internal: Eigen maps over Tensor storage for the dense kernels.
// Eigen never appears in public headers.

#define EIGEN_DONT_PARALLELIZE 1
#include <Eigen/Dense>

#include "strap/tensor.hpp"

namespace strap {

using EigenRowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MutMap = Eigen::Map<EigenRowMat>;
using ConstMap = Eigen::Map<const EigenRowMat>;

inline MutMap as_matrix(Tensor& t) {
  return MutMap(t.data.data(), static_cast<Eigen::Index>(t.rows()),
                static_cast<Eigen::Index>(t.cols()));
}

inline ConstMap as_matrix(const Tensor& t) {
  return ConstMap(t.data.data(), static_cast<Eigen::Index>(t.rows()),
                  static_cast<Eigen::Index>(t.cols()));
}

}  // namespace strap
