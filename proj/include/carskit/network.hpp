#pragma once

#include "carskit/autodiff.hpp"
#include "carskit/common.hpp"
#include "carskit/rng.hpp"

#include <span>
#include <string>
#include <vector>

namespace carskit {

// 1D ResNet-style backbone: stem conv, n_blocks residual blocks (two convs
// with an inner relu, identity skip, dropout after each block), then
// parallel 1x1 heads. The raman head is squashed to [0,1] by a sigmoid, the
// nrb head through a softplus. Heteroscedastic methods add a raw 1x1 head
// for the per-channel log-variance.
struct NetworkConfig {
  int n_blocks = 4;
  int width = 32;
  int kernel_size = 5;
  double dropout_p = 0.1;
  bool variance_head = false;

  void validate() const;
};

struct ParamDef {
  std::string name;
  ad::Shape shape;
};

// Parameter values, aligned with Model::defs().
using ParamStore = std::vector<Array>;

struct HeadOutputs {
  ad::Tensor raman;
  ad::Tensor nrb;
  ad::Tensor raw_variance;  // invalid unless variance_head is configured
};

class Model {
 public:
  explicit Model(NetworkConfig cfg);

  const NetworkConfig& config() const { return cfg_; }
  const std::vector<ParamDef>& defs() const { return defs_; }

  // Fan-in-scaled uniform conv weights, zero biases; deterministic per seed.
  ParamStore init_params(Rng& rng) const;

  // Total learnable scalar count, from the shape definitions.
  Index parameter_count() const;

  // Weight tensors must align with defs(); the caller decides how they are
  // produced (plain leaves, or reparameterized samples for BNNs).
  HeadOutputs forward(ad::Tape& tape, ad::Tensor x,
                      std::span<const ad::Tensor> weights, bool training,
                      Rng* dropout_rng) const;

 private:
  NetworkConfig cfg_;
  std::vector<ParamDef> defs_;
};

}  // namespace carskit
