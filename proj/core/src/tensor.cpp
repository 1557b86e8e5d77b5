#include "neuralign/tensor.hpp"

#include <functional>
#include <numeric>
#include <string>

#include "neuralign/errors.hpp"

namespace neuralign {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), values_(product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != product(shape_)) {
    throw ShapeError("tensor value count " + std::to_string(values_.size()) + " does not match its shape");
  }
}

Tensor Tensor::row(std::vector<double> values) {
  const auto n = values.size();
  return Tensor({1, n}, std::move(values));
}

Tensor Tensor::from_matrix(const Matrix& m) { return Tensor({m.rows(), m.cols()}, m.data()); }

std::size_t Tensor::rows() const noexcept {
  if (shape_.size() < 2) return 1;
  return values_.size() / shape_.back();
}

std::size_t Tensor::cols() const noexcept {
  if (shape_.empty()) return values_.size();
  return shape_.back();
}

void Tensor::enable_grad() {
  if (grad_.size() != values_.size()) grad_.assign(values_.size(), 0.0);
}

void Tensor::zero_grad() { grad_.assign(values_.size(), 0.0); }

std::vector<double>& Tensor::grad() {
  enable_grad();
  return grad_;
}

Matrix Tensor::to_matrix() const {
  Matrix m(rows(), cols());
  m.data() = values_;
  return m;
}

const Tensor& Var::value() const {
  if (graph_ == nullptr) throw Error("use of an empty Var");
  return graph_->value(*this);
}

double Var::scalar() const {
  const auto& v = value();
  if (v.size() != 1) throw ShapeError("scalar() on a tensor with " + std::to_string(v.size()) + " entries");
  return v[0];
}

Var Graph::constant(Tensor value) {
  Node node;
  node.owned = std::make_unique<Tensor>(std::move(value));
  node.tensor = node.owned.get();
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Graph::constant_ref(const Tensor& value) {
  Node node;
  node.tensor = &value;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Graph::parameter(Tensor& value) {
  const auto it = bound_.find(&value);
  if (it != bound_.end()) return Var(this, it->second);
  Node node;
  node.tensor = &value;
  node.mutable_tensor = &value;
  node.requires_grad = track_gradients_;
  if (node.requires_grad) value.enable_grad();
  nodes_.push_back(std::move(node));
  bound_.emplace(&value, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(Tensor value) {
  Node node;
  node.owned = std::make_unique<Tensor>(std::move(value));
  node.tensor = node.owned.get();
  node.mutable_tensor = node.owned.get();
  node.requires_grad = track_gradients_;
  if (node.requires_grad) node.owned->enable_grad();
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Graph::set_backward(Var node, std::function<void()> fn) {
  if (!track_gradients_) return;
  nodes_.at(node.id()).backprop = std::move(fn);
}

double* Graph::grad(Var v) {
  auto& node = nodes_.at(v.id());
  if (!node.requires_grad) return nullptr;
  return node.mutable_tensor->grad().data();
}

void Graph::backward(Var root) {
  if (!track_gradients_) throw Error("backward() on a graph that does not track gradients");
  if (root.graph() != this) throw Error("backward() root belongs to another graph");
  auto& node = nodes_.at(root.id());
  if (node.tensor->size() != 1) throw ShapeError("backward() needs a scalar root");
  if (!node.requires_grad) return;
  node.mutable_tensor->grad()[0] += 1.0;
  for (std::size_t k = root.id() + 1; k-- > 0;) {
    if (nodes_[k].backprop) nodes_[k].backprop();
  }
}

}  // namespace neuralign
