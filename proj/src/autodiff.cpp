// SPDX-License-Identifier: Apache-2.0
#include "strap/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "eigen_glue.hpp"
#include "strap/errors.hpp"

namespace strap {

CsrMatrix CsrMatrix::from_triplets(std::size_t n_rows, std::size_t n_cols,
                                   std::vector<std::size_t> rows,
                                   std::vector<std::size_t> cols,
                                   std::vector<double> vals) {
  if (rows.size() != cols.size() || rows.size() != vals.size()) {
    throw DimensionError("csr: triplet arrays differ in length");
  }
  CsrMatrix m;
  m.n_rows = n_rows;
  m.n_cols = n_cols;
  m.row_ptr.assign(n_rows + 1, 0);
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rows[a] != rows[b]) return rows[a] < rows[b];
    return cols[a] < cols[b];
  });
  m.col_idx.resize(order.size());
  m.values.resize(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t k = order[i];
    if (rows[k] >= n_rows || cols[k] >= n_cols) {
      throw DimensionError("csr: triplet out of bounds");
    }
    m.col_idx[i] = cols[k];
    m.values[i] = vals[k];
    m.row_ptr[rows[k] + 1]++;
  }
  for (std::size_t r = 0; r < n_rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
  return m;
}

Value Tape::push(Tensor value, bool needs_grad, std::function<void()> backward_fn) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  n.backward_fn = std::move(backward_fn);
  nodes_.push_back(std::move(n));
  return Value{static_cast<int>(nodes_.size()) - 1};
}

Tensor& Tape::grad_buffer(int idx) {
  Node& n = node(idx);
  if (n.grad.empty()) n.grad = Tensor::zeros(n.value.shape);
  return n.grad;
}

const Tensor& Tape::grad(Value v) const {
  const Node& n = node(v.idx);
  if (n.grad.empty()) {
    throw NumericalError("grad: no gradient stored for this node (not a parameter "
                         "reachable from the loss, or backward not run)");
  }
  return n.grad;
}

Value Tape::parameter(const Tensor& value) { return push(value, true, {}); }

Value Tape::constant(Tensor value) { return push(std::move(value), false, {}); }

Value Tape::zeros(std::size_t rows, std::size_t cols) {
  return constant(Tensor::zeros({rows, cols}));
}

Value Tape::matmul_nt(Value x, Value w) {
  const Tensor& xv = value(x);
  const Tensor& wv = value(w);
  if (xv.cols() != wv.cols()) {
    throw DimensionError("matmul_nt: x" + xv.shape_str() + " W" + wv.shape_str() +
                         " do not conform");
  }
  Tensor out = Tensor::zeros({xv.rows(), wv.rows()});
  as_matrix(out).noalias() = as_matrix(xv) * as_matrix(wv).transpose();
  const bool ng = node(x.idx).needs_grad || node(w.idx).needs_grad;
  Value y = push(std::move(out), ng, {});
  if (ng) {
    node(y.idx).backward_fn = [this, x, w, y]() {
      const Tensor& dy = node(y.idx).grad;
      if (node(x.idx).needs_grad) {
        as_matrix(grad_buffer(x.idx)).noalias() += as_matrix(dy) * as_matrix(value(w));
      }
      if (node(w.idx).needs_grad) {
        as_matrix(grad_buffer(w.idx)).noalias() +=
            as_matrix(dy).transpose() * as_matrix(value(x));
      }
    };
  }
  return y;
}

Value Tape::add_bias(Value x, Value b) {
  const Tensor& xv = value(x);
  const Tensor& bv = value(b);
  if (xv.cols() != bv.size()) {
    throw DimensionError("add_bias: x" + xv.shape_str() + " b" + bv.shape_str() +
                         " do not conform");
  }
  Tensor out = xv;
  const std::size_t n = xv.rows(), d = xv.cols();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) out.data[i * d + j] += bv.data[j];
  }
  const bool ng = node(x.idx).needs_grad || node(b.idx).needs_grad;
  Value y = push(std::move(out), ng, {});
  if (ng) {
    node(y.idx).backward_fn = [this, x, b, y, n, d]() {
      const Tensor& dy = node(y.idx).grad;
      if (node(x.idx).needs_grad) {
        Tensor& dx = grad_buffer(x.idx);
        for (std::size_t i = 0; i < dy.size(); ++i) dx.data[i] += dy.data[i];
      }
      if (node(b.idx).needs_grad) {
        Tensor& db = grad_buffer(b.idx);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < d; ++j) db.data[j] += dy.data[i * d + j];
        }
      }
    };
  }
  return y;
}

Value Tape::add(Value a, Value b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  check_same_shape(av, bv, "add");
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += bv.data[i];
  const bool ng = node(a.idx).needs_grad || node(b.idx).needs_grad;
  Value y = push(std::move(out), ng, {});
  if (ng) {
    node(y.idx).backward_fn = [this, a, b, y]() {
      const Tensor& dy = node(y.idx).grad;
      for (Value in : {a, b}) {
        if (!node(in.idx).needs_grad) continue;
        Tensor& din = grad_buffer(in.idx);
        for (std::size_t i = 0; i < dy.size(); ++i) din.data[i] += dy.data[i];
      }
    };
  }
  return y;
}

Value Tape::sub(Value a, Value b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  check_same_shape(av, bv, "sub");
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= bv.data[i];
  const bool ng = node(a.idx).needs_grad || node(b.idx).needs_grad;
  Value y = push(std::move(out), ng, {});
  if (ng) {
    node(y.idx).backward_fn = [this, a, b, y]() {
      const Tensor& dy = node(y.idx).grad;
      if (node(a.idx).needs_grad) {
        Tensor& da = grad_buffer(a.idx);
        for (std::size_t i = 0; i < dy.size(); ++i) da.data[i] += dy.data[i];
      }
      if (node(b.idx).needs_grad) {
        Tensor& db = grad_buffer(b.idx);
        for (std::size_t i = 0; i < dy.size(); ++i) db.data[i] -= dy.data[i];
      }
    };
  }
  return y;
}

Value Tape::mul(Value a, Value b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  check_same_shape(av, bv, "mul");
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= bv.data[i];
  const bool ng = node(a.idx).needs_grad || node(b.idx).needs_grad;
  Value y = push(std::move(out), ng, {});
  if (ng) {
    node(y.idx).backward_fn = [this, a, b, y]() {
      const Tensor& dy = node(y.idx).grad;
      if (node(a.idx).needs_grad) {
        Tensor& da = grad_buffer(a.idx);
        const Tensor& bv2 = value(b);
        for (std::size_t i = 0; i < dy.size(); ++i) da.data[i] += dy.data[i] * bv2.data[i];
      }
      if (node(b.idx).needs_grad) {
        Tensor& db = grad_buffer(b.idx);
        const Tensor& av2 = value(a);
        for (std::size_t i = 0; i < dy.size(); ++i) db.data[i] += dy.data[i] * av2.data[i];
      }
    };
  }
  return y;
}

Value Tape::unary_map(Value x, const char*, double (*fwd)(double),
                      double (*bwd)(double, double)) {
  const Tensor& xv = value(x);
  Tensor out = xv;
  for (double& v : out.data) v = fwd(v);
  const bool ng = node(x.idx).needs_grad;
  Value y = push(std::move(out), ng, {});
  if (ng) {
    node(y.idx).backward_fn = [this, x, y, bwd]() {
      const Tensor& dy = node(y.idx).grad;
      const Tensor& yv = value(y);
      const Tensor& xv2 = value(x);
      Tensor& dx = grad_buffer(x.idx);
      for (std::size_t i = 0; i < dy.size(); ++i) {
        dx.data[i] += dy.data[i] * bwd(yv.data[i], xv2.data[i]);
      }
    };
  }
  return y;
}

Value Tape::relu(Value x) {
  return unary_map(
      x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
      [](double, double in) { return in > 0.0 ? 1.0 : 0.0; });
}

Value Tape::sigmoid(Value x) {
  return unary_map(
      x, "sigmoid", [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double out, double) { return out * (1.0 - out); });
}

Value Tape::tanh(Value x) {
  return unary_map(
      x, "tanh", [](double v) { return std::tanh(v); },
      [](double out, double) { return 1.0 - out * out; });
}

Value Tape::one_minus(Value x) {
  return unary_map(
      x, "one_minus", [](double v) { return 1.0 - v; },
      [](double, double) { return -1.0; });
}

Value Tape::gather_rows(Value x, std::vector<std::size_t> rows) {
  const Tensor& xv = value(x);
  const std::size_t d = xv.cols();
  Tensor out = Tensor::zeros({rows.size(), d});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= xv.rows()) throw DimensionError("gather_rows: index out of range");
    std::copy_n(&xv.data[rows[i] * d], d, &out.data[i * d]);
  }
  const bool ng = node(x.idx).needs_grad;
  Value y = push(std::move(out), ng, {});
  if (ng) {
    auto idx = std::make_shared<std::vector<std::size_t>>(std::move(rows));
    node(y.idx).backward_fn = [this, x, y, idx, d]() {
      const Tensor& dy = node(y.idx).grad;
      Tensor& dx = grad_buffer(x.idx);
      for (std::size_t i = 0; i < idx->size(); ++i) {
        double* dst = &dx.data[(*idx)[i] * d];
        const double* src = &dy.data[i * d];
        for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
      }
    };
  }
  return y;
}

Value Tape::mean_group_rows(Value x, std::vector<std::vector<std::size_t>> groups) {
  const Tensor& xv = value(x);
  const std::size_t d = xv.cols();
  Tensor out = Tensor::zeros({groups.size(), d});
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) continue;  // empty neighborhood -> zero row
    double* dst = &out.data[g * d];
    for (std::size_t m : groups[g]) {
      if (m >= xv.rows()) throw DimensionError("mean_group_rows: index out of range");
      const double* src = &xv.data[m * d];
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }
    const double inv = 1.0 / static_cast<double>(groups[g].size());
    for (std::size_t j = 0; j < d; ++j) dst[j] *= inv;
  }
  const bool ng = node(x.idx).needs_grad;
  Value y = push(std::move(out), ng, {});
  if (ng) {
    auto gr = std::make_shared<std::vector<std::vector<std::size_t>>>(std::move(groups));
    node(y.idx).backward_fn = [this, x, y, gr, d]() {
      const Tensor& dy = node(y.idx).grad;
      Tensor& dx = grad_buffer(x.idx);
      for (std::size_t g = 0; g < gr->size(); ++g) {
        const auto& members = (*gr)[g];
        if (members.empty()) continue;
        const double inv = 1.0 / static_cast<double>(members.size());
        const double* src = &dy.data[g * d];
        for (std::size_t m : members) {
          double* dst = &dx.data[m * d];
          for (std::size_t j = 0; j < d; ++j) dst[j] += src[j] * inv;
        }
      }
    };
  }
  return y;
}

Value Tape::concat_rows(const std::vector<Value>& xs) {
  if (xs.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t d = value(xs[0]).cols();
  std::size_t n = 0;
  bool ng = false;
  for (Value v : xs) {
    if (value(v).cols() != d) throw DimensionError("concat_rows: column mismatch");
    n += value(v).rows();
    ng = ng || node(v.idx).needs_grad;
  }
  Tensor out = Tensor::zeros({n, d});
  std::size_t at = 0;
  for (Value v : xs) {
    const Tensor& t = value(v);
    std::copy(t.data.begin(), t.data.end(), out.data.begin() + static_cast<long>(at));
    at += t.size();
  }
  Value y = push(std::move(out), ng, {});
  if (ng) {
    auto parts = std::make_shared<std::vector<Value>>(xs);
    node(y.idx).backward_fn = [this, parts, y]() {
      const Tensor& dy = node(y.idx).grad;
      std::size_t at2 = 0;
      for (Value v : *parts) {
        const std::size_t sz = value(v).size();
        if (node(v.idx).needs_grad) {
          Tensor& dv = grad_buffer(v.idx);
          for (std::size_t i = 0; i < sz; ++i) dv.data[i] += dy.data[at2 + i];
        }
        at2 += sz;
      }
    };
  }
  return y;
}

Value Tape::concat_cols(Value a, Value b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (av.rows() != bv.rows()) throw DimensionError("concat_cols: row mismatch");
  const std::size_t n = av.rows(), da = av.cols(), db = bv.cols();
  Tensor out = Tensor::zeros({n, da + db});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(&av.data[i * da], da, &out.data[i * (da + db)]);
    std::copy_n(&bv.data[i * db], db, &out.data[i * (da + db) + da]);
  }
  const bool ng = node(a.idx).needs_grad || node(b.idx).needs_grad;
  Value y = push(std::move(out), ng, {});
  if (ng) {
    node(y.idx).backward_fn = [this, a, b, y, n, da, db]() {
      const Tensor& dy = node(y.idx).grad;
      for (std::size_t i = 0; i < n; ++i) {
        if (node(a.idx).needs_grad) {
          Tensor& dav = grad_buffer(a.idx);
          for (std::size_t j = 0; j < da; ++j) dav.data[i * da + j] += dy.data[i * (da + db) + j];
        }
        if (node(b.idx).needs_grad) {
          Tensor& dbv = grad_buffer(b.idx);
          for (std::size_t j = 0; j < db; ++j)
            dbv.data[i * db + j] += dy.data[i * (da + db) + da + j];
        }
      }
    };
  }
  return y;
}

Value Tape::spmm(std::shared_ptr<const CsrMatrix> a, Value x) {
  const Tensor& xv = value(x);
  if (a->n_cols != xv.rows()) {
    throw DimensionError("spmm: A has " + std::to_string(a->n_cols) + " cols, x has " +
                         std::to_string(xv.rows()) + " rows");
  }
  const std::size_t d = xv.cols();
  Tensor out = Tensor::zeros({a->n_rows, d});
  for (std::size_t r = 0; r < a->n_rows; ++r) {
    double* dst = &out.data[r * d];
    for (std::size_t k = a->row_ptr[r]; k < a->row_ptr[r + 1]; ++k) {
      const double w = a->values[k];
      const double* src = &xv.data[a->col_idx[k] * d];
      for (std::size_t j = 0; j < d; ++j) dst[j] += w * src[j];
    }
  }
  const bool ng = node(x.idx).needs_grad;
  Value y = push(std::move(out), ng, {});
  if (ng) {
    node(y.idx).backward_fn = [this, a, x, y, d]() {
      // dx += A^T dy, accumulated row-by-row of A.
      const Tensor& dy = node(y.idx).grad;
      Tensor& dx = grad_buffer(x.idx);
      for (std::size_t r = 0; r < a->n_rows; ++r) {
        const double* src = &dy.data[r * d];
        for (std::size_t k = a->row_ptr[r]; k < a->row_ptr[r + 1]; ++k) {
          const double w = a->values[k];
          double* dst = &dx.data[a->col_idx[k] * d];
          for (std::size_t j = 0; j < d; ++j) dst[j] += w * src[j];
        }
      }
    };
  }
  return y;
}

Value Tape::mean_abs_error(Value pred, Value target) {
  const Tensor& pv = value(pred);
  const Tensor& tv = value(target);
  check_same_shape(pv, tv, "mean_abs_error");
  if (pv.size() == 0) throw DimensionError("mean_abs_error: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) acc += std::fabs(pv.data[i] - tv.data[i]);
  Tensor out = Tensor::mat(1, 1, {acc / static_cast<double>(pv.size())});
  const bool ng = node(pred.idx).needs_grad || node(target.idx).needs_grad;
  Value y = push(std::move(out), ng, {});
  if (ng) {
    node(y.idx).backward_fn = [this, pred, target, y]() {
      const double dy = node(y.idx).grad.data[0];
      const Tensor& pv2 = value(pred);
      const Tensor& tv2 = value(target);
      const double inv = dy / static_cast<double>(pv2.size());
      for (std::size_t i = 0; i < pv2.size(); ++i) {
        const double diff = pv2.data[i] - tv2.data[i];
        // subgradient at zero residual is zero
        const double s = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        if (node(pred.idx).needs_grad) grad_buffer(pred.idx).data[i] += inv * s;
        if (node(target.idx).needs_grad) grad_buffer(target.idx).data[i] -= inv * s;
      }
    };
  }
  return y;
}

void Tape::backward(Value loss) {
  if (backward_done_) {
    throw NumericalError("backward: called twice on the same tape without a new forward pass");
  }
  backward_done_ = true;
  const Tensor& lv = value(loss);
  if (lv.size() != 1) {
    throw DimensionError("backward: loss must be a scalar node, got " + lv.shape_str());
  }
  grad_buffer(loss.idx).data[0] = 1.0;
  for (int i = loss.idx; i >= 0; --i) {
    Node& n = node(i);
    if (n.backward_fn && !n.grad.empty()) n.backward_fn();
  }
}

}  // namespace strap
