#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "spvs/tensor.h"

namespace spvs {

// Gradients of a scalar loss with respect to the leaf tensors that require
// them. Leaves the loss does not reach read back as zeros.
class Gradients {
 public:
  std::vector<double> Of(const Tensor& leaf) const;
  bool Reached(const Tensor& leaf) const;
  std::size_t size() const { return grads_.size(); }

 private:
  friend Gradients Backward(const Tensor& loss);
  std::unordered_map<const internal::Node*, std::vector<double>> grads_;
};

// Reverse-mode sweep over the graph reachable from loss. Each node is visited
// once, in reverse topological order. Throws ContractError unless loss holds
// a single element.
Gradients Backward(const Tensor& loss);

}  // namespace spvs
