// SPDX-License-Identifier: Apache-2.0
#include "strap/optim.hpp"

#include <cmath>
#include <string>

#include "strap/errors.hpp"

namespace strap {

void AdamWConfig::validate() const {
  if (lr < 0.0 || beta1 <= 0.0 || beta1 >= 1.0 || beta2 <= 0.0 || beta2 >= 1.0 ||
      eps <= 0.0 || weight_decay < 0.0) {
    throw ConfigError("adamw: hyperparameters out of range (lr >= 0, 0 < beta < 1, "
                      "eps > 0, weight_decay >= 0)");
  }
}

AdamWState AdamWState::init(const std::vector<Tensor*>& params, AdamWConfig hyper) {
  hyper.validate();
  AdamWState s;
  s.hyper = hyper;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const Tensor* p : params) {
    s.m.push_back(Tensor::zeros(p->shape));
    s.v.push_back(Tensor::zeros(p->shape));
  }
  return s;
}

void clip_gradients(std::vector<Tensor>& grads, double max_norm) {
  if (max_norm <= 0.0) throw ConfigError("clip_gradients: max_norm must be positive");
  const double norm = l2_norm(grads);
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  for (Tensor& g : grads) {
    for (double& x : g.data) x *= scale;
  }
}

void adamw_step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
                AdamWState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw DimensionError("adamw_step: params/grads/state lists differ in length");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!grads[i].same_shape(*params[i])) {
      throw DimensionError("adamw_step: grad " + grads[i].shape_str() +
                           " does not match param " + params[i]->shape_str());
    }
    if (!grads[i].all_finite()) {
      throw NumericalError("adamw_step: non-finite gradient at parameter index " +
                           std::to_string(i));
    }
  }
  state.step_count += 1;
  const AdamWConfig& h = state.hyper;
  const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step_count));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    const Tensor& g = grads[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m.data[k] = h.beta1 * m.data[k] + (1.0 - h.beta1) * g.data[k];
      v.data[k] = h.beta2 * v.data[k] + (1.0 - h.beta2) * g.data[k] * g.data[k];
      const double m_hat = m.data[k] / bc1;
      const double v_hat = v.data[k] / bc2;
      p.data[k] -= h.lr * (m_hat / (std::sqrt(v_hat) + h.eps) + h.weight_decay * p.data[k]);
    }
  }
}

}  // namespace strap
