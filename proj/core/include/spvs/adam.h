#pragma once

#include <cstdint>
#include <vector>

#include "spvs/tensor.h"

namespace spvs {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Moments are keyed by position in the parameter
// list, which must stay the same across steps.
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  void Step(std::vector<Tensor>& params, const std::vector<std::vector<double>>& grads);

  const AdamOptions& options() const { return options_; }
  void set_learning_rate(double lr) { options_.learning_rate = lr; }
  std::int64_t steps() const { return steps_; }

 private:
  AdamOptions options_;
  std::int64_t steps_ = 0;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
};

}  // namespace spvs
