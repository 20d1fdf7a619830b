#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vxgan/errors.hpp"

namespace vxgan {

using Index = Eigen::Index;
using Shape = std::vector<Index>;
using Array = Eigen::ArrayXd;

Index shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

// Receives the gradient of the node's output and one accumulator per parent
// (nullptr when that parent does not need a gradient).
using BackwardFn = std::function<void(const Array& grad_out, std::span<Array* const> parent_grads)>;

struct Node {
  Shape shape;
  Array value;
  Array grad;  // leaves only; empty until the first backward reaches it
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  BackwardFn backward;
};

}  // namespace detail

/// Dense row-major real tensor participating in reverse-mode differentiation.
///
/// A Tensor is a cheap handle; copies share the underlying node. Values are
/// immutable once an op has consumed them, with the exception of leaf
/// parameters which optimizers update in place between graph constructions.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, bool requires_grad = false);
  Tensor(Shape shape, Array values, bool requires_grad = false);

  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  Index rank() const { return static_cast<Index>(node_->shape.size()); }
  Index dim(Index axis) const { return node_->shape[static_cast<std::size_t>(axis)]; }
  Index size() const { return node_->value.size(); }

  const Array& value() const { return node_->value; }
  double item() const;
  double operator[](Index i) const { return node_->value[i]; }

  bool requires_grad() const { return node_->requires_grad; }
  bool is_leaf() const { return node_->is_leaf; }

  /// Leaf-only mutable access, used by optimizers and gradient checks.
  Array& mutable_value();

  bool has_grad() const { return node_->grad.size() == node_->value.size(); }
  /// Throws MissingGradient when no backward pass has reached this tensor.
  const Array& grad() const;
  void zero_grad();

  /// Same values, no graph history, no gradient requirement.
  Tensor detach() const;
  /// Independent deep copy of values; keeps requires_grad for leaves.
  Tensor clone() const;

  // Internal: graph construction for ops.
  static Tensor make_result(Shape shape, Array value, std::vector<Tensor> inputs,
                            detail::BackwardFn backward);
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

/// Runs reverse-mode differentiation from a scalar loss. Gradients accumulate
/// into every reachable leaf with requires_grad; repeated calls sum.
void backward(const Tensor& loss);

/// Named collection of trainable tensors with deterministic insertion order.
class ParamSet {
 public:
  using Entry = std::pair<std::string, Tensor>;

  void add(std::string name, Tensor tensor);
  bool contains(const std::string& name) const;
  const Tensor& at(const std::string& name) const;
  Tensor& at(const std::string& name);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  Index total_elements() const;

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  void zero_grad();
  /// Deep copy of values; the copy's tensors still require gradients.
  ParamSet clone() const;
  /// Constant copies for inference: forward passes over these build no graph.
  ParamSet detached() const;
  /// Exact (bitwise) equality of names, shapes and values.
  bool equals(const ParamSet& other) const;

 private:
  std::vector<Entry> entries_;
};

}  // namespace vxgan
