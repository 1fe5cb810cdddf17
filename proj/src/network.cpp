#include "carskit/network.hpp"

#include <cmath>

namespace carskit {

void NetworkConfig::validate() const {
  if (n_blocks < 1) throw ConfigError("network: n_blocks must be >= 1");
  if (width < 1) throw ConfigError("network: width must be >= 1");
  if (kernel_size < 1 || kernel_size % 2 == 0) {
    throw ConfigError("network: kernel_size must be odd and positive");
  }
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
    throw ConfigError("network: dropout_p must be in [0, 1)");
  }
}

namespace {

ad::Shape conv_w_shape(int out_ch, int in_ch, int k) {
  return ad::Shape{out_ch, in_ch, k};
}

ad::Shape conv_b_shape(int out_ch) { return ad::Shape{1, out_ch, 1}; }

}  // namespace

Model::Model(NetworkConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  const int w = cfg_.width;
  const int k = cfg_.kernel_size;
  defs_.push_back({"stem.w", conv_w_shape(w, 1, k)});
  defs_.push_back({"stem.b", conv_b_shape(w)});
  for (int i = 0; i < cfg_.n_blocks; ++i) {
    const std::string prefix = "block" + std::to_string(i);
    defs_.push_back({prefix + ".conv1.w", conv_w_shape(w, w, k)});
    defs_.push_back({prefix + ".conv1.b", conv_b_shape(w)});
    defs_.push_back({prefix + ".conv2.w", conv_w_shape(w, w, k)});
    defs_.push_back({prefix + ".conv2.b", conv_b_shape(w)});
  }
  defs_.push_back({"head.raman.w", conv_w_shape(1, w, 1)});
  defs_.push_back({"head.raman.b", conv_b_shape(1)});
  defs_.push_back({"head.nrb.w", conv_w_shape(1, w, 1)});
  defs_.push_back({"head.nrb.b", conv_b_shape(1)});
  if (cfg_.variance_head) {
    defs_.push_back({"head.var.w", conv_w_shape(1, w, 1)});
    defs_.push_back({"head.var.b", conv_b_shape(1)});
  }
}

ParamStore Model::init_params(Rng& rng) const {
  ParamStore store;
  store.reserve(defs_.size());
  for (const auto& def : defs_) {
    Array values = Array::Zero(def.shape.size());
    const bool is_weight = def.name.ends_with(".w");
    if (is_weight) {
      const double fan_in =
          static_cast<double>(def.shape.channels * def.shape.length);
      const double bound = 1.0 / std::sqrt(fan_in);
      for (Index i = 0; i < values.size(); ++i) {
        values[i] = rng.uniform(-bound, bound);
      }
    }
    store.push_back(std::move(values));
  }
  return store;
}

Index Model::parameter_count() const {
  Index total = 0;
  for (const auto& def : defs_) total += def.shape.size();
  return total;
}

HeadOutputs Model::forward(ad::Tape& tape, ad::Tensor x,
                           std::span<const ad::Tensor> weights, bool training,
                           Rng* dropout_rng) const {
  if (weights.size() != defs_.size()) {
    throw NumericError("model forward: weight tensor count mismatch");
  }
  size_t p = 0;
  auto next = [&]() { return weights[p++]; };

  ad::Tensor w = next(), b = next();
  ad::Tensor h = tape.relu(tape.conv1d(x, w, b));
  for (int i = 0; i < cfg_.n_blocks; ++i) {
    ad::Tensor w1 = next(), b1 = next(), w2 = next(), b2 = next();
    ad::Tensor inner = tape.conv1d(tape.relu(tape.conv1d(h, w1, b1)), w2, b2);
    h = tape.relu(tape.add(h, inner));
    h = tape.dropout(h, cfg_.dropout_p, training, dropout_rng);
  }

  HeadOutputs out;
  {
    ad::Tensor wr = next(), br = next();
    out.raman = tape.sigmoid(tape.conv1d(h, wr, br));
  }
  {
    ad::Tensor wn = next(), bn = next();
    out.nrb = tape.softplus(tape.conv1d(h, wn, bn));
  }
  if (cfg_.variance_head) {
    ad::Tensor wv = next(), bv = next();
    out.raw_variance = tape.conv1d(h, wv, bv);
  }
  return out;
}

}  // namespace carskit
