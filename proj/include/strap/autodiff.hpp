// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "strap/tensor.hpp"

namespace strap {

// Compressed sparse row matrix with fixed structure and values. Used for the
// normalized adjacency of the GCN baseline; not differentiated through.
struct CsrMatrix {
  std::size_t n_rows = 0, n_cols = 0;
  std::vector<std::size_t> row_ptr;  // n_rows + 1
  std::vector<std::size_t> col_idx;
  std::vector<double> values;

  static CsrMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                 std::vector<std::size_t> rows,
                                 std::vector<std::size_t> cols,
                                 std::vector<double> vals);
};

// Handle to a node on a Tape.
struct Value {
  int idx = -1;
  bool valid() const { return idx >= 0; }
};

// Reverse-mode tape. Nodes are appended in evaluation order (which is a
// topological order by construction); backward() walks them once in reverse.
//
// All activations are rank-2 row batches (n_rows x dim). Rank-1 leaves are
// treated as a single row. The loss node is a 1x1 tensor.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves. Parameters get gradient accumulators; constants do not.
  Value parameter(const Tensor& value);
  Value constant(Tensor value);
  Value zeros(std::size_t rows, std::size_t cols);

  // y = x W^T, with x (n x d_in) and W (d_out x d_in).
  Value matmul_nt(Value x, Value w);
  // Broadcast-add a rank-1 bias to every row.
  Value add_bias(Value x, Value b);
  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  Value mul(Value a, Value b);  // elementwise
  Value relu(Value x);
  Value sigmoid(Value x);
  Value tanh(Value x);
  Value one_minus(Value x);

  // Row re-indexing. Gradients scatter-add back.
  Value gather_rows(Value x, std::vector<std::size_t> rows);
  // Per-group mean of rows; an empty group yields a zero row.
  Value mean_group_rows(Value x, std::vector<std::vector<std::size_t>> groups);
  Value concat_rows(const std::vector<Value>& xs);
  Value concat_cols(Value a, Value b);

  // y = A x for a fixed sparse A. Gradient flows through x only.
  Value spmm(std::shared_ptr<const CsrMatrix> a, Value x);

  // Flat mean of |pred - target| over all entries; returns a 1x1 node.
  Value mean_abs_error(Value pred, Value target);

  // Populates gradients of every parameter reachable from `loss`.
  // Calling it twice on the same tape is an error: gradients would
  // double-accumulate without a fresh forward pass.
  void backward(Value loss);

  const Tensor& value(Value v) const { return node(v.idx).value; }
  const Tensor& grad(Value v) const;
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // allocated lazily for nodes that need it
    std::function<void()> backward_fn;
    bool needs_grad = false;
  };

  Node& node(int idx) { return nodes_[static_cast<std::size_t>(idx)]; }
  const Node& node(int idx) const { return nodes_[static_cast<std::size_t>(idx)]; }
  Value push(Tensor value, bool needs_grad, std::function<void()> backward_fn);
  Tensor& grad_buffer(int idx);
  Value unary_map(Value x, const char* name, double (*fwd)(double),
                  double (*bwd)(double value_out, double value_in));

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace strap
