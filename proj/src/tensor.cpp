#include "vxgan/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

namespace vxgan {

Index shape_size(const Shape& shape) {
  Index n = 1;
  for (Index e : shape) {
    if (e <= 0) throw ShapeMismatch("non-positive extent in shape " + shape_string(shape));
    n *= e;
  }
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, bool requires_grad) {
  const Index n = shape_size(shape);
  node_ = std::make_shared<detail::Node>();
  node_->shape = std::move(shape);
  node_->value = Array::Zero(n);
  node_->requires_grad = requires_grad;
}

Tensor::Tensor(Shape shape, Array values, bool requires_grad) {
  if (shape_size(shape) != values.size())
    throw ShapeMismatch("value count " + std::to_string(values.size()) + " does not match shape " +
                        shape_string(shape));
  node_ = std::make_shared<detail::Node>();
  node_->shape = std::move(shape);
  node_->value = std::move(values);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({1}, Array::Constant(1, value), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const Index n = shape_size(shape);
  return Tensor(std::move(shape), Array::Constant(n, value), requires_grad);
}

double Tensor::item() const {
  if (size() != 1) throw NonScalarLoss("item() on tensor of shape " + shape_string(shape()));
  return node_->value[0];
}

Array& Tensor::mutable_value() {
  if (!node_->is_leaf) throw Error("mutable_value() on a non-leaf tensor");
  return node_->value;
}

const Array& Tensor::grad() const {
  if (!has_grad()) throw MissingGradient("tensor of shape " + shape_string(shape()) + " has no gradient");
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_->grad.size() == node_->value.size()) node_->grad.setZero();
}

Tensor Tensor::detach() const { return Tensor(node_->shape, node_->value, false); }

Tensor Tensor::clone() const {
  return Tensor(node_->shape, node_->value, node_->is_leaf && node_->requires_grad);
}

Tensor Tensor::make_result(Shape shape, Array value, std::vector<Tensor> inputs,
                           detail::BackwardFn backward) {
  Tensor out(std::move(shape), std::move(value), false);
  out.node_->is_leaf = false;
  const bool any = std::any_of(inputs.begin(), inputs.end(),
                               [](const Tensor& t) { return t.requires_grad(); });
  if (any) {
    out.node_->requires_grad = true;
    out.node_->parents.reserve(inputs.size());
    for (auto& t : inputs) out.node_->parents.push_back(t.node_);
    out.node_->backward = std::move(backward);
  }
  return out;
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1)
    throw NonScalarLoss("backward() needs a scalar loss, got shape " +
                        (loss.defined() ? shape_string(loss.shape()) : std::string("<undefined>")));
  if (!loss.requires_grad()) return;

  using detail::Node;
  // Iterative post-order DFS; grey nodes on the stack detect back edges.
  enum class Mark : unsigned char { Grey, Black };
  std::unordered_map<const Node*, Mark> marks;
  std::vector<Node*> order;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  marks[loss.node().get()] = Mark::Grey;
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (!parent->requires_grad) continue;
      auto it = marks.find(parent);
      if (it == marks.end()) {
        marks[parent] = Mark::Grey;
        stack.emplace_back(parent, 0);
      } else if (it->second == Mark::Grey) {
        throw GraphCycle("cycle detected in computation graph");
      }
    } else {
      marks[node] = Mark::Black;
      order.push_back(node);
      stack.pop_back();
    }
  }

  std::unordered_map<const Node*, Array> pending;
  auto accumulator = [&](Node* n) -> Array* {
    if (n->is_leaf) {
      if (n->grad.size() != n->value.size()) n->grad = Array::Zero(n->value.size());
      return &n->grad;
    }
    auto [it, inserted] = pending.try_emplace(n);
    if (inserted) it->second = Array::Zero(n->value.size());
    return &it->second;
  };

  *accumulator(loss.node().get()) += 1.0;
  std::vector<Array*> sinks;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->is_leaf) continue;
    auto found = pending.find(node);
    if (found == pending.end()) continue;
    const Array grad_out = std::move(found->second);
    pending.erase(found);
    sinks.clear();
    for (auto& p : node->parents) sinks.push_back(p->requires_grad ? accumulator(p.get()) : nullptr);
    node->backward(grad_out, sinks);
  }
}

void ParamSet::add(std::string name, Tensor tensor) {
  if (contains(name)) throw Error("duplicate parameter name '" + name + "'");
  entries_.emplace_back(std::move(name), std::move(tensor));
}

bool ParamSet::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.first == name; });
}

const Tensor& ParamSet::at(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.first == name) return e.second;
  throw Error("unknown parameter '" + name + "'");
}

Tensor& ParamSet::at(const std::string& name) {
  return const_cast<Tensor&>(std::as_const(*this).at(name));
}

Index ParamSet::total_elements() const {
  Index n = 0;
  for (const auto& e : entries_) n += e.second.size();
  return n;
}

void ParamSet::zero_grad() {
  for (auto& e : entries_) e.second.zero_grad();
}

ParamSet ParamSet::clone() const {
  ParamSet out;
  for (const auto& [name, t] : entries_) out.add(name, t.clone());
  return out;
}

ParamSet ParamSet::detached() const {
  ParamSet out;
  for (const auto& [name, t] : entries_) out.add(name, t.detach());
  return out;
}

bool ParamSet::equals(const ParamSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& [na, a] = entries_[i];
    const auto& [nb, b] = other.entries_[i];
    if (na != nb || a.shape() != b.shape()) return false;
    if (!std::equal(a.value().data(), a.value().data() + a.size(), b.value().data())) return false;
  }
  return true;
}

}  // namespace vxgan
