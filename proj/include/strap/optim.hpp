// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "strap/tensor.hpp"

namespace strap {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-5;

  void validate() const;
};

// Per-parameter first/second moments, kept parallel to the parameter list.
struct AdamWState {
  std::int64_t step_count = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  AdamWConfig hyper;

  static AdamWState init(const std::vector<Tensor*>& params, AdamWConfig hyper);
};

// If the global L2 norm exceeds max_norm, scales every gradient by
// max_norm / norm. Idempotent.
void clip_gradients(std::vector<Tensor>& grads, double max_norm);

// One AdamW step: bias-corrected Adam update plus decoupled weight decay
//   param -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * param).
// Throws NumericalError on non-finite gradients.
void adamw_step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
                AdamWState& state);

}  // namespace strap
