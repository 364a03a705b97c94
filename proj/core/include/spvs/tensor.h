#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace spvs {

using Shape = std::vector<std::size_t>;

std::size_t NumElements(const Shape& shape);
std::string ShapeToString(const Shape& shape);

namespace internal {

struct Node;

// Accumulates d(loss)/d(output) into the gradients of the node's inputs.
// grad_in[i] is empty when input i does not require a gradient.
using BackwardFn = std::function<void(const Node& self, std::span<const double> grad_out,
                                      std::span<const std::span<double>> grad_in)>;

struct Node {
  Shape shape;
  std::vector<double> value;
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<const Node>> inputs;
  BackwardFn backward;
};

}  // namespace internal

// Dense row-major tensor of doubles. A Tensor is a cheap handle; values are
// not mutated after creation except through MutableData(), which only the
// optimizer and checkpoint loading use while no graph is being built.
class Tensor {
 public:
  Tensor();

  static Tensor FromData(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor Zeros(Shape shape, bool requires_grad = false);
  static Tensor Full(Shape shape, double value);
  static Tensor Scalar(double value);
  static Tensor Vector(std::vector<double> data);

  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->value.size(); }
  // 2-D helpers; a rank-1 tensor counts as a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const { return node_->value; }
  std::vector<double> ToVector() const { return node_->value; }
  double item() const;
  double operator[](std::size_t i) const { return node_->value[i]; }
  double at(std::size_t row, std::size_t col) const;

  bool requires_grad() const { return node_->requires_grad; }
  // A leaf with the same values and no history.
  Tensor Detach() const;

  std::span<double> MutableData();

  const internal::Node* node() const { return node_.get(); }
  const std::shared_ptr<internal::Node>& node_ptr() const { return node_; }

  explicit Tensor(std::shared_ptr<internal::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<internal::Node> node_;
};

// While alive on a thread, ops on that thread record no graph (inference).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

namespace internal {

// Builds an op result; checks finiteness and wires the graph when any input
// requires a gradient.
Tensor MakeResult(const char* op, Shape shape, std::vector<double> value,
                  std::vector<Tensor> inputs, BackwardFn backward);

}  // namespace internal

}  // namespace spvs
