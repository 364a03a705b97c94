#include "spvs/parameter_store.h"

#include <algorithm>
#include <cmath>

#include "spvs/errors.h"

namespace spvs {

Tensor ParameterStore::AddUniform(const std::string& name, Shape shape, const Rng& seed_rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(shape.at(0)));
  return AddUniformBounded(name, std::move(shape), bound, seed_rng);
}

Tensor ParameterStore::AddUniformBounded(const std::string& name, Shape shape, double bound,
                                         const Rng& seed_rng) {
  Rng rng = seed_rng.Stream("init/" + name);
  std::vector<double> values(NumElements(shape));
  for (double& v : values) v = rng.Uniform(-bound, bound);
  return Add(name, Tensor::FromData(std::move(shape), std::move(values), true));
}

Tensor ParameterStore::AddConstant(const std::string& name, Shape shape, double value) {
  const std::size_t n = NumElements(shape);
  return Add(name, Tensor::FromData(std::move(shape), std::vector<double>(n, value), true));
}

Tensor ParameterStore::Add(const std::string& name, Tensor value) {
  if (index_.contains(name)) throw ContractError("duplicate parameter name " + name);
  if (!value.requires_grad()) value = Tensor::FromData(value.shape(), value.ToVector(), true);
  index_[name] = tensors_.size();
  names_.push_back(name);
  tensors_.push_back(value);
  return value;
}

const Tensor& ParameterStore::Get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter " + name);
  return tensors_[it->second];
}

std::size_t ParameterStore::TotalElements() const {
  std::size_t n = 0;
  for (const Tensor& t : tensors_) n += t.numel();
  return n;
}

void ParameterStore::Assign(const std::string& name, std::span<const double> values) {
  Tensor t = Get(name);
  auto dst = t.MutableData();
  if (dst.size() != values.size()) {
    throw DimensionError("assign " + name + ": " + std::to_string(values.size()) +
                         " values for shape " + ShapeToString(t.shape()));
  }
  std::copy(values.begin(), values.end(), dst.begin());
}

}  // namespace spvs
