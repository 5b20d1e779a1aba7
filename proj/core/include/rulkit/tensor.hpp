#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace rulkit::nn {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // sized on demand; empty means all-zero
  bool requires_grad = false;
  bool backward_done = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into the parents' grads.
  std::function<void(Node&)> backprop;

  std::size_t size() const { return value.size(); }
  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

}  // namespace detail

// Dense n-dimensional value (row-major doubles) with reverse-mode autodiff.
// Tensors are cheap handles onto a shared node; operations in ops.hpp record
// the graph, and backward() on a scalar fills the gradients of every
// requires_grad tensor that leads to it.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double v);
  static Tensor from_data(std::vector<double> data, Shape shape);
  static Tensor scalar(double v);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t size() const;
  std::size_t dim(std::size_t i) const;
  std::size_t rank() const;

  double* data();
  const double* data() const;
  std::vector<double>& values();
  const std::vector<double>& values() const;

  // Value of a one-element tensor.
  double item() const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool v);

  // Gradient accumulated by the last backward(); zeros if this tensor was
  // not reachable from the loss.
  const std::vector<double>& grad() const;
  void zero_grad();

  // Reverse-mode accumulation from a scalar. Calling it twice on the same
  // result is an error; build a fresh graph per step instead.
  void backward();

  std::shared_ptr<detail::Node> node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  detail::Node& ref();
  const detail::Node& ref() const;
  std::shared_ptr<detail::Node> node_;
};

// Graph-recording constructor used by every operation.
Tensor make_op(Shape shape, std::vector<double> value, const std::vector<Tensor>& inputs,
               std::function<void(detail::Node&)> backprop);

// Throws NumericError naming `context` if any element is non-finite.
void check_finite(const Tensor& t, const std::string& context);

}  // namespace rulkit::nn
