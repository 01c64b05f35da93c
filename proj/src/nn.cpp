// SPDX-License-Identifier: Apache-2.0
#include "strap/nn.hpp"

#include <cmath>
#include <string>

#include "strap/errors.hpp"

namespace strap {

GruParams GruParams::zeros(std::size_t d_h) {
  GruParams p;
  p.w_update = p.w_reset = p.w_cand = Tensor::zeros({d_h, d_h});
  p.u_update = p.u_reset = p.u_cand = Tensor::zeros({d_h, d_h});
  p.b_update = p.b_reset = p.b_cand = Tensor::zeros({d_h});
  return p;
}

void GruParams::validate() const {
  const std::size_t d = hidden_dim();
  for (const Tensor* w : {&w_update, &w_reset, &w_cand, &u_update, &u_reset, &u_cand}) {
    if (w->shape != std::vector<std::size_t>{d, d}) {
      throw DimensionError("gru: weight shape " + w->shape_str() + " is not square of extent " +
                           std::to_string(d));
    }
  }
  for (const Tensor* b : {&b_update, &b_reset, &b_cand}) {
    if (b->size() != d) {
      throw DimensionError("gru: bias shape " + b->shape_str() + " does not match hidden dim " +
                           std::to_string(d));
    }
  }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Tensor linear_forward(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (w.rank() != 2) {
    throw DimensionError("linear: weight must be rank 2, got " + w.shape_str());
  }
  const std::size_t d_out = w.shape[0], d_in = w.shape[1];
  if (x.size() != d_in || b.size() != d_out) {
    throw DimensionError("linear: x" + x.shape_str() + " W" + w.shape_str() + " b" +
                         b.shape_str() + " do not conform");
  }
  Tensor y = Tensor::zeros({d_out});
  for (std::size_t j = 0; j < d_out; ++j) {
    double acc = 0.0;
    const double* wrow = &w.data[j * d_in];
    for (std::size_t k = 0; k < d_in; ++k) acc += wrow[k] * x.data[k];
    y.data[j] = acc + b.data[j];
  }
  return y;
}

Tensor linear_forward_rows(const Tensor& x, const Tensor& w, const Tensor& b) {
  const std::size_t d_out = w.shape[0], d_in = w.shape[1];
  if (x.cols() != d_in || b.size() != d_out) {
    throw DimensionError("linear: x" + x.shape_str() + " W" + w.shape_str() + " b" +
                         b.shape_str() + " do not conform");
  }
  const std::size_t n = x.rows();
  Tensor y = Tensor::zeros({n, d_out});
  for (std::size_t i = 0; i < n; ++i) {
    const double* xrow = &x.data[i * d_in];
    for (std::size_t j = 0; j < d_out; ++j) {
      double acc = 0.0;
      const double* wrow = &w.data[j * d_in];
      for (std::size_t k = 0; k < d_in; ++k) acc += wrow[k] * xrow[k];
      y.data[i * d_out + j] = acc + b.data[j];
    }
  }
  return y;
}

Tensor gru_cell_forward(const Tensor& x, const Tensor& h_prev, const GruParams& p) {
  p.validate();
  const std::size_t d = p.hidden_dim();
  if (x.size() != d || h_prev.size() != d) {
    throw DimensionError("gru: x" + x.shape_str() + " h" + h_prev.shape_str() +
                         " do not match hidden dim " + std::to_string(d));
  }
  Tensor zx = linear_forward(x, p.w_update, p.b_update);
  Tensor rx = linear_forward(x, p.w_reset, p.b_reset);
  Tensor nx = linear_forward(x, p.w_cand, p.b_cand);
  Tensor h_next = Tensor::zeros({d});
  // Uz h and Ur h, then the reset-gated candidate term.
  Tensor rh = Tensor::zeros({d});
  for (std::size_t j = 0; j < d; ++j) {
    double zh = 0.0, rhj = 0.0;
    const double* uz = &p.u_update.data[j * d];
    const double* ur = &p.u_reset.data[j * d];
    for (std::size_t k = 0; k < d; ++k) {
      zh += uz[k] * h_prev.data[k];
      rhj += ur[k] * h_prev.data[k];
    }
    zx.data[j] = sigmoid(zx.data[j] + zh);
    rx.data[j] = sigmoid(rx.data[j] + rhj);
    rh.data[j] = rx.data[j] * h_prev.data[j];
  }
  for (std::size_t j = 0; j < d; ++j) {
    double nh = 0.0;
    const double* un = &p.u_cand.data[j * d];
    for (std::size_t k = 0; k < d; ++k) nh += un[k] * rh.data[k];
    const double n = std::tanh(nx.data[j] + nh);
    const double z = zx.data[j];
    h_next.data[j] = (1.0 - z) * n + z * h_prev.data[j];
  }
  return h_next;
}

Tensor mean_aggregate(const std::vector<Tensor>& members, std::size_t dim) {
  Tensor out = Tensor::zeros({dim});
  if (members.empty()) return out;
  for (const Tensor& m : members) {
    if (m.size() != dim) {
      throw DimensionError("mean_aggregate: member " + m.shape_str() +
                           " does not match dim " + std::to_string(dim));
    }
    for (std::size_t j = 0; j < dim; ++j) out.data[j] += m.data[j];
  }
  const double inv = 1.0 / static_cast<double>(members.size());
  for (std::size_t j = 0; j < dim; ++j) out.data[j] *= inv;
  return out;
}

double mae_loss(const Tensor& pred, const Tensor& target) {
  if (pred.size() == 0) throw DimensionError("mae_loss: empty input");
  check_same_shape(pred, target, "mae_loss");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += std::fabs(pred.data[i] - target.data[i]);
  return acc / static_cast<double>(pred.size());
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data) v = v > 0.0 ? v : 0.0;
  return y;
}

}  // namespace strap
