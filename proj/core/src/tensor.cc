#include "spvs/tensor.h"

#include <cmath>
#include <sstream>

#include "spvs/errors.h"

namespace spvs {

std::size_t NumElements(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor() : node_(std::make_shared<internal::Node>()) {
  node_->shape = {};
  node_->value = {0.0};
}

Tensor Tensor::FromData(Shape shape, std::vector<double> data, bool requires_grad) {
  for (std::size_t e : shape) {
    if (e == 0) throw DimensionError("tensor extents must be positive, got " + ShapeToString(shape));
  }
  if (NumElements(shape) != data.size()) {
    throw DimensionError("tensor data length " + std::to_string(data.size()) +
                         " does not match shape " + ShapeToString(shape));
  }
  for (double v : data) {
    if (!std::isfinite(v)) throw NumericError("non-finite value in tensor data");
  }
  auto node = std::make_shared<internal::Node>();
  node->shape = std::move(shape);
  node->value = std::move(data);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::Zeros(Shape shape, bool requires_grad) {
  const std::size_t n = NumElements(shape);
  return FromData(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::Full(Shape shape, double value) {
  const std::size_t n = NumElements(shape);
  return FromData(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::Scalar(double value) { return FromData({}, {value}); }

Tensor Tensor::Vector(std::vector<double> data) {
  const std::size_t n = data.size();
  return FromData({n}, std::move(data));
}

std::size_t Tensor::rows() const {
  if (rank() == 2) return shape()[0];
  if (rank() == 1) return 1;
  if (rank() == 0) return 1;
  throw DimensionError("rows() requires rank <= 2, got " + ShapeToString(shape()));
}

std::size_t Tensor::cols() const {
  if (rank() == 2) return shape()[1];
  if (rank() == 1) return shape()[0];
  if (rank() == 0) return 1;
  throw DimensionError("cols() requires rank <= 2, got " + ShapeToString(shape()));
}

double Tensor::item() const {
  if (numel() != 1) throw ContractError("item() on tensor of shape " + ShapeToString(shape()));
  return node_->value[0];
}

double Tensor::at(std::size_t row, std::size_t col) const {
  return node_->value[row * cols() + col];
}

Tensor Tensor::Detach() const { return FromData(shape(), node_->value, false); }

std::span<double> Tensor::MutableData() { return node_->value; }

namespace {
thread_local bool t_grad_disabled = false;
}

NoGradGuard::NoGradGuard() : previous_(t_grad_disabled) { t_grad_disabled = true; }
NoGradGuard::~NoGradGuard() { t_grad_disabled = previous_; }

namespace internal {

Tensor MakeResult(const char* op, Shape shape, std::vector<double> value,
                  std::vector<Tensor> inputs, BackwardFn backward) {
  for (double v : value) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite value produced by ") + op);
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->op = op;
  bool needs = false;
  if (t_grad_disabled) inputs.clear();
  for (const Tensor& t : inputs) needs = needs || t.requires_grad();
  if (needs) {
    node->requires_grad = true;
    node->inputs.reserve(inputs.size());
    for (const Tensor& t : inputs) node->inputs.push_back(t.node_ptr());
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

}  // namespace internal
}  // namespace spvs
