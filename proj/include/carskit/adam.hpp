#pragma once

#include "carskit/common.hpp"
#include "carskit/network.hpp"

#include <cstdint>
#include <vector>

namespace carskit {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Standard Adam with bias correction over a flat list of parameter arrays.
class AdamState {
 public:
  AdamState(const std::vector<Index>& sizes, AdamConfig cfg);

  // Applies one update in place. Gradients must align with the parameter
  // list; a non-finite gradient aborts the step with a diagnostic.
  void step(std::vector<Array*> params, const std::vector<Array>& grads);

  std::int64_t step_count() const { return step_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::vector<Array> m_;
  std::vector<Array> v_;
  std::int64_t step_ = 0;
};

}  // namespace carskit
