#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <unordered_set>
#include <vector>

#include "zel/common/errors.hpp"

namespace zel::autodiff {

using Shape = std::vector<std::int64_t>;

inline std::int64_t numel(const Shape& s) {
  std::int64_t n = 1;
  for (auto d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

// Tape recording is on by default; inference paths switch it off to skip
// closure allocation. Forward values are identical either way.
inline bool& grad_mode_flag() {
  static thread_local bool enabled = true;
  return enabled;
}
inline bool grad_mode_enabled() { return grad_mode_flag(); }
inline void set_grad_mode(bool enabled) { grad_mode_flag() = enabled; }

struct NoGradGuard {
  NoGradGuard() : previous_(grad_mode_enabled()) { set_grad_mode(false); }
  ~NoGradGuard() { set_grad_mode(previous_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

namespace detail {

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> values;
  std::vector<T> grad;  // allocated on demand during backward
  bool requires_grad = false;
  bool needs_grad = false;  // requires_grad or any parent needs_grad
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  std::vector<T>& grad_buffer() {
    if (grad.empty()) grad.assign(values.size(), T(0));
    return grad;
  }
};

}  // namespace detail

// Value-semantics handle to a node in the implicit tape. Tensors are
// immutable after creation except for gradient accumulation; parameters are
// the only tensors whose values callers mutate (optimizer updates), which is
// safe because parameters are graph leaves.
template <typename T>
class Tensor {
 public:
  using Scalar = T;

  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    return from_data(std::move(shape), {}, requires_grad);
  }

  static Tensor from_data(Shape shape, std::vector<T> values, bool requires_grad = false) {
    auto node = std::make_shared<detail::Node<T>>();
    const auto n = static_cast<std::size_t>(numel(shape));
    node->shape = std::move(shape);
    if (values.empty()) {
      node->values.assign(n, T(0));
    } else {
      if (values.size() != n)
        throw ContractError("tensor data size " + std::to_string(values.size()) +
                            " does not match shape " + shape_str(node->shape));
      node->values = std::move(values);
    }
    node->requires_grad = requires_grad;
    node->needs_grad = requires_grad;
    return Tensor(std::move(node));
  }

  static Tensor scalar(T value) { return from_data({1}, {value}); }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::int64_t dim(std::size_t i) const { return node_->shape[i]; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->values.size(); }

  const std::vector<T>& values() const { return node_->values; }
  std::vector<T>& mutable_values() { return node_->values; }
  const std::vector<T>& grad() const { return node_->grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  void clear_grad() { node_->grad.clear(); }

  bool requires_grad() const { return node_->requires_grad; }
  bool needs_grad() const { return node_->needs_grad; }

  T item() const {
    if (size() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape()));
    return node_->values[0];
  }

  // Runs reverse-mode accumulation from this scalar. Gradients of every
  // needs_grad tensor reachable through the tape are populated (accumulated,
  // so callers zero or clear between steps).
  void backward() const;

  detail::Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<detail::Node<T>>& node_ptr() const { return node_; }

  explicit Tensor(std::shared_ptr<detail::Node<T>> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node<T>> node_;
};

template <typename T>
void Tensor<T>::backward() const {
  if (size() != 1)
    throw ContractError("backward() requires a scalar loss, got shape " + shape_str(shape()));

  // iterative post-order over parents
  struct Frame {
    detail::Node<T>* node;
    std::size_t next_parent;
  };
  std::vector<detail::Node<T>*> order;
  std::vector<Frame> stack;
  std::unordered_set<detail::Node<T>*> visited;
  if (node_->needs_grad) {
    stack.push_back({node_.get(), 0});
    visited.insert(node_.get());
  }
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next_parent < top.node->parents.size()) {
      auto* parent = top.node->parents[top.next_parent++].get();
      if (parent->needs_grad && visited.insert(parent).second) {
        stack.push_back({parent, 0});  // invalidates top; loop re-fetches
      }
      continue;
    }
    order.push_back(top.node);
    stack.pop_back();
  }

  node_->grad_buffer()[0] = T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    auto* n = *it;
    if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
  }
}

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace zel::autodiff
