// Copyright 2026 The HeteroGNN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense row-major matrices and a single-use reverse-mode tape.
//
// Usage:
//   Tape tape;
//   Var w = tape.leaf(params.w);          // gradient tracked
//   Var x = tape.constant_ref(features);  // no copy, no gradient
//   Var loss = sum(relu(matmul(x, w)));
//   tape.backward(loss);
//   const Tensor& gw = tape.grad(w);

#ifndef HGNN_TENSOR_HPP_
#define HGNN_TENSOR_HPP_

#include <cstddef>
#include <deque>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace hgnn {

class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Tensor from_rows(
      std::initializer_list<std::initializer_list<double>> rows);
  static Tensor identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool v) { requires_grad_ = v; }

  bool same_shape(const Tensor& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }
  bool all_finite() const;
  Tensor transpose() const;
  double frobenius_norm() const;
  std::string shape_string() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
  bool requires_grad_ = false;
};

// Plain (non-recorded) helpers.
Tensor matmul_plain(const Tensor& a, const Tensor& b);
double max_abs_diff(const Tensor& a, const Tensor& b);

class Tape;

// Handle to a tape node. Cheap to copy; valid while its tape lives.
class Var {
 public:
  Var() = default;
  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool requires_grad() const;
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  // Receives the tape and the node's own output gradient; accumulates into
  // parents via Tape::accumulate.
  using BackwardFn = std::function<void(Tape&, const Tensor& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Copies `value`; gradient is tracked iff value.requires_grad() or
  // `track` is set.
  Var leaf(const Tensor& value, bool track = true);
  Var constant(Tensor value);
  // References external storage. `value` must outlive the tape.
  Var constant_ref(const Tensor& value);

  // Records an op result. Gradient flows iff some parent requires it.
  Var record(Tensor value, std::vector<Var> parents, BackwardFn backward);

  void backward(Var loss);
  // Gradient of a node; zeros when nothing flowed into it.
  Tensor grad(Var v) const;
  void accumulate(Var v, const Tensor& g);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id_].requires_grad; }
  std::size_t size() const { return nodes_.size(); }
  bool backward_done() const { return backward_done_; }

 private:
  struct Node {
    Tensor owned;
    const Tensor* external = nullptr;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
    const Tensor& value() const { return external ? *external : owned; }
  };
  void check(Var v) const;

  std::deque<Node> nodes_;  // stable addresses: Var::value() refs survive growth
  bool backward_done_ = false;
};

// --- Differentiable ops ----------------------------------------------------

Var matmul(Var a, Var b);
Var add(Var a, Var b);
// a (n×m) plus a 1×m row broadcast over every row.
Var add_row(Var a, Var row);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var relu(Var a);
Var row_softmax(Var a, double temperature = 1.0);
Var concat_cols(const std::vector<Var>& parts);
// Columns [begin, end).
Var slice_cols(Var a, std::size_t begin, std::size_t end);
Var row_gather(Var a, std::span<const int> index);
Var segment_sum(Var a, std::span<const int> segment, std::size_t n_segments);
// Row i of the result is the flattened outer product s_i ⊗ h_i, so block t
// (columns [t·h.cols, (t+1)·h.cols)) is s(i,t)·h_i.
Var row_outer(Var s, Var h);
Var layer_norm(Var a, Var gamma, Var beta, double eps = 1e-5);
// Inverted dropout. keep_prob == 1 is the identity.
Var dropout(Var a, double keep_prob, std::uint64_t seed);
// Mean cross-entropy over rows listed in `mask`.
Var cross_entropy(Var logits, std::span<const int> labels,
                  std::span<const int> mask);
Var sum(Var a);
Var col_sum(Var a);
Var l2_norm_sq(Var a);
Var l2_norm(Var a);

// Splits columns into consecutive blocks of the given widths.
std::vector<Var> split_cols(Var a, std::span<const std::size_t> widths);

}  // namespace hgnn

#endif  // HGNN_TENSOR_HPP_
