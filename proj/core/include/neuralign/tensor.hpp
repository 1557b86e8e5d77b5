#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "neuralign/matrix.hpp"

namespace neuralign {

// Dense float64 tensor with an optional gradient buffer of identical shape.
// Rank-1 tensors behave as a single row when used as matrices.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor row(std::vector<double> values);
  static Tensor from_matrix(const Matrix& m);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t rows() const noexcept;
  std::size_t cols() const noexcept;

  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  bool has_grad() const noexcept { return grad_.size() == values_.size(); }
  void enable_grad();
  void zero_grad();
  std::vector<double>& grad();
  const std::vector<double>& grad() const { return grad_; }

  Matrix to_matrix() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
  std::vector<double> grad_;
};

class Graph;

// Handle to a node recorded on a Graph.
class Var {
 public:
  Var() = default;

  Graph* graph() const noexcept { return graph_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return graph_ != nullptr; }

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  double scalar() const;

 private:
  friend class Graph;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

// Per-batch reverse-mode tape. Nodes are recorded in evaluation order and
// back-propagated in reverse. Parameter leaves accumulate directly into the
// gradient buffer of the bound tensor.
class Graph {
 public:
  // A graph built with track_gradients = false records values only; it is
  // meant for inference and never back-propagates.
  explicit Graph(bool track_gradients = true) : track_gradients_(track_gradients) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Leaf owning a copy of `value`; receives no gradient.
  Var constant(Tensor value);
  // Leaf referencing `value` without copying; receives no gradient. The
  // tensor must outlive the graph.
  Var constant_ref(const Tensor& value);
  // Leaf bound to a trainable tensor. Binding the same tensor twice returns
  // the same node.
  Var parameter(Tensor& value);

  // Seeds d(root)/d(root) = 1 and runs every recorded backward function.
  void backward(Var root);

  std::size_t size() const noexcept { return nodes_.size(); }
  bool tracks_gradients() const noexcept { return track_gradients_; }

  // Interface used by operation implementations.
  Var record(Tensor value);
  void set_backward(Var node, std::function<void()> fn);
  const Tensor& value(Var v) const { return *nodes_.at(v.id()).tensor; }
  // Gradient buffer of a node, or nullptr when the node takes no gradient.
  double* grad(Var v);
  bool requires_grad(Var v) const { return nodes_.at(v.id()).requires_grad; }

 private:
  struct Node {
    const Tensor* tensor = nullptr;
    Tensor* mutable_tensor = nullptr;
    std::unique_ptr<Tensor> owned;
    std::function<void()> backprop;
    bool requires_grad = false;
  };

  bool track_gradients_ = true;
  std::vector<Node> nodes_;
  std::unordered_map<const Tensor*, std::size_t> bound_;
};

// ------------------------------------------------------------- operations
// Every operation records at most one node. Matrices are row-major; "rows" index
// items and "cols" index features.

// a [m x k] times b [k x n].
Var matmul(Var a, Var b);
// a [m x k] times b^T, b [n x k].
Var matmul_nt(Var a, Var b);
// x [s x n], weight [m x n], bias [m] -> x W^T + b, [s x m].
Var linear(Var x, Var weight, Var bias);
// Same as linear without a bias.
Var linear(Var x, Var weight);
Var add(Var a, Var b);
// x [m x n] plus a row vector [1 x n] broadcast over rows.
Var add_row(Var x, Var row);
Var scale(Var x, double factor);
Var hadamard(Var a, Var b);
// Elementwise clamp to [-1, 1]; subgradient 1 strictly inside, 0 elsewhere.
Var htanh(Var x);
Var tanh(Var x);
Var sigmoid(Var x);
Var concat_cols(std::span<const Var> parts);
Var stack_rows(std::span<const Var> parts);
Var slice_cols(Var x, std::size_t begin, std::size_t count);
// Rows `ids` of `table` (embedding lookup); ids may repeat.
Var select_rows(Var table, std::span<const int> ids);
// Columns `ids` of a row vector or matrix.
Var select_cols(Var x, std::span<const int> ids);
// Row-wise log-softmax. With a non-empty support only those columns take
// part; the others are -infinity and receive no gradient.
Var log_softmax(Var logits, std::span<const int> support = {});
// Valid 2-D correlation of a (2h+1) x (2h+1) filter sliding along the
// columns of ctx [(2h+1) x d]; output [1 x (d - 2h)].
Var conv_combine(Var ctx, Var filter);
// Training mode zeroes each entry with probability `rate` and scales the
// survivors by 1/(1-rate). Evaluation mode is the identity.
Var dropout(Var x, double rate, bool training, std::mt19937_64& rng);
Var dropout(Var x, double rate, bool training, std::uint64_t seed);
// sum(x .* weights) as a 1 x 1 node; `weights` must match x's size.
Var weighted_sum(Var x, const Tensor& weights);
Var sum(Var x);
Var add_scalars(std::span<const Var> scalars);
// One LSTM step. state = [h | c] as [1 x 2u]; x is row `row` of `inputs`.
// weight [4u x (d + u)] stacks the input, forget, output and candidate gates.
Var lstm_cell(Var inputs, std::size_t row, Var state, Var weight, Var bias);

}  // namespace neuralign
