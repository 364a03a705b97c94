#include "spvs/adam.h"

#include <cmath>

#include "spvs/errors.h"

namespace spvs {

void Adam::Step(std::vector<Tensor>& params, const std::vector<std::vector<double>>& grads) {
  if (params.size() != grads.size()) {
    throw DimensionError("adam: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
  }
  if (first_moment_.empty()) {
    for (const Tensor& p : params) {
      first_moment_.emplace_back(p.numel(), 0.0);
      second_moment_.emplace_back(p.numel(), 0.0);
    }
  }
  if (first_moment_.size() != params.size()) {
    throw ContractError("adam: parameter list changed between steps");
  }
  ++steps_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto w = params[p].MutableData();
    const auto& g = grads[p];
    if (g.size() != w.size()) {
      throw DimensionError("adam: gradient length mismatch for parameter " + std::to_string(p));
    }
    auto& m = first_moment_[p];
    auto& v = second_moment_[p];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = b1 * m[i] + (1 - b1) * g[i];
      v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
}

}  // namespace spvs
