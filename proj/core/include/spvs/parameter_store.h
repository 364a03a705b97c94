#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "spvs/rng.h"
#include "spvs/tensor.h"

namespace spvs {

// Named trainable tensors in insertion order. Tensors are shared handles, so
// updates through the optimizer are visible to every holder.
class ParameterStore {
 public:
  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) with fan_in = shape[0], drawn
  // from the seed sub-stream named after the parameter.
  Tensor AddUniform(const std::string& name, Shape shape, const Rng& seed_rng);
  // Uniform(-bound, bound) from the same per-name sub-stream.
  Tensor AddUniformBounded(const std::string& name, Shape shape, double bound,
                           const Rng& seed_rng);
  Tensor AddConstant(const std::string& name, Shape shape, double value);
  Tensor Add(const std::string& name, Tensor value);

  bool Contains(const std::string& name) const { return index_.contains(name); }
  const Tensor& Get(const std::string& name) const;
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }
  std::size_t size() const { return tensors_.size(); }
  std::size_t TotalElements() const;

  // Overwrites values in place; shapes must match.
  void Assign(const std::string& name, std::span<const double> values);

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace spvs
