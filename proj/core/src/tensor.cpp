#include "rulkit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "rulkit/errors.hpp"

namespace rulkit::nn {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  s += ")";
  return s;
}

Tensor Tensor::zeros(Shape shape) {
  auto n = std::make_shared<detail::Node>();
  n->value.assign(numel(shape), 0.0);
  n->shape = std::move(shape);
  return Tensor(std::move(n));
}

Tensor Tensor::full(Shape shape, double v) {
  auto n = std::make_shared<detail::Node>();
  n->value.assign(numel(shape), v);
  n->shape = std::move(shape);
  return Tensor(std::move(n));
}

Tensor Tensor::from_data(std::vector<double> data, Shape shape) {
  if (data.size() != numel(shape))
    throw ShapeError("from_data: " + std::to_string(data.size()) +
                     " values do not fill shape " + shape_str(shape));
  auto n = std::make_shared<detail::Node>();
  n->value = std::move(data);
  n->shape = std::move(shape);
  return Tensor(std::move(n));
}

Tensor Tensor::scalar(double v) { return from_data({v}, {1}); }

detail::Node& Tensor::ref() {
  if (!node_) throw ShapeError("use of undefined tensor");
  return *node_;
}

const detail::Node& Tensor::ref() const {
  if (!node_) throw ShapeError("use of undefined tensor");
  return *node_;
}

const Shape& Tensor::shape() const { return ref().shape; }
std::size_t Tensor::size() const { return ref().value.size(); }

std::size_t Tensor::dim(std::size_t i) const {
  const auto& s = ref().shape;
  if (i >= s.size()) throw ShapeError("dim index out of range");
  return s[i];
}

std::size_t Tensor::rank() const { return ref().shape.size(); }

double* Tensor::data() { return ref().value.data(); }
const double* Tensor::data() const { return ref().value.data(); }
std::vector<double>& Tensor::values() { return ref().value; }
const std::vector<double>& Tensor::values() const { return ref().value; }

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape()));
  return ref().value[0];
}

bool Tensor::requires_grad() const { return ref().requires_grad; }

Tensor& Tensor::set_requires_grad(bool v) {
  ref().requires_grad = v;
  return *this;
}

const std::vector<double>& Tensor::grad() const {
  auto& n = const_cast<detail::Node&>(ref());
  n.ensure_grad();
  return n.grad;
}

void Tensor::zero_grad() {
  auto& n = ref();
  n.grad.assign(n.value.size(), 0.0);
  n.backward_done = false;
}

void Tensor::backward() {
  auto& root = ref();
  if (root.size() != 1)
    throw ShapeError("backward() requires a scalar, got shape " + shape_str(root.shape));
  if (root.backward_done)
    throw NumericError("backward() called twice on the same result; rebuild the graph");
  root.backward_done = true;

  // Topological order over the recorded graph (iterative DFS).
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  struct Frame {
    detail::Node* node;
    std::size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({&root, 0});
  visited.insert(&root);
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.node->parents.size()) {
      detail::Node* p = f.node->parents[f.next_parent++].get();
      if (visited.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }

  for (detail::Node* n : order) {
    n->grad.assign(n->value.size(), 0.0);
  }
  root.grad[0] = 1.0;

  // `order` is children-after-parents reversed; walk back to front.
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (n->backprop) n->backprop(*n);
  }
}

Tensor make_op(Shape shape, std::vector<double> value, const std::vector<Tensor>& inputs,
               std::function<void(detail::Node&)> backprop) {
  if (value.size() != numel(shape))
    throw ShapeError("make_op: value size does not match shape " + shape_str(shape));
  auto n = std::make_shared<detail::Node>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  bool needs_grad = false;
  for (const auto& in : inputs) {
    if (in.defined() && in.requires_grad()) needs_grad = true;
  }
  n->requires_grad = needs_grad;
  if (needs_grad) {
    n->parents.reserve(inputs.size());
    for (const auto& in : inputs) n->parents.push_back(in.node());
    n->backprop = std::move(backprop);
  }
  return Tensor(std::move(n));
}

void check_finite(const Tensor& t, const std::string& context) {
  const auto& v = t.values();
  for (double x : v) {
    if (!std::isfinite(x))
      throw NumericError("non-finite value in " + context);
  }
}

}  // namespace rulkit::nn
