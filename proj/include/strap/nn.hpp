// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "strap/tensor.hpp"

namespace strap {

// Parameters of a single GRU cell with hidden size d_h. Input size equals
// the hidden size: transaction embeddings and hidden states share d_h.
struct GruParams {
  Tensor w_update, w_reset, w_cand;  // input-to-hidden, d_h x d_h
  Tensor u_update, u_reset, u_cand;  // hidden-to-hidden, d_h x d_h
  Tensor b_update, b_reset, b_cand;  // d_h

  std::size_t hidden_dim() const { return b_update.size(); }
  static GruParams zeros(std::size_t d_h);
  void validate() const;
};

double sigmoid(double x);

// y = W x + b for a rank-1 x. W is d_out x d_in row-major.
Tensor linear_forward(const Tensor& x, const Tensor& w, const Tensor& b);

// Batched variant: rows of x are instances, y = x W^T + b per row.
Tensor linear_forward_rows(const Tensor& x, const Tensor& w, const Tensor& b);

// Standard GRU cell:
//   z = sigmoid(Wz x + Uz h + bz)
//   r = sigmoid(Wr x + Ur h + br)
//   n = tanh(Wn x + Un (r*h) + bn)
//   h' = (1-z)*n + z*h
Tensor gru_cell_forward(const Tensor& x, const Tensor& h_prev, const GruParams& p);

// Elementwise mean of the given vectors, summed in the order given.
// Callers pass neighbor sets sorted by node id so runs are reproducible.
// The empty set maps to the zero vector of dimension `dim`.
Tensor mean_aggregate(const std::vector<Tensor>& members, std::size_t dim);

// Flat mean of |pred - target| over all entries. n >= 1.
double mae_loss(const Tensor& pred, const Tensor& target);

Tensor relu(const Tensor& x);

}  // namespace strap
