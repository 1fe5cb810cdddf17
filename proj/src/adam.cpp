#include "carskit/adam.hpp"

#include <cmath>

namespace carskit {

AdamState::AdamState(const std::vector<Index>& sizes, AdamConfig cfg)
    : cfg_(cfg) {
  m_.reserve(sizes.size());
  v_.reserve(sizes.size());
  for (Index n : sizes) {
    m_.push_back(Array::Zero(n));
    v_.push_back(Array::Zero(n));
  }
}

void AdamState::step(std::vector<Array*> params,
                     const std::vector<Array>& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw NumericError("adam: parameter/gradient list size mismatch");
  }
  for (size_t i = 0; i < grads.size(); ++i) {
    if (!all_finite(grads[i])) {
      throw NumericError("adam: non-finite gradient in parameter " +
                         std::to_string(i) + "; step aborted");
    }
  }
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (size_t i = 0; i < grads.size(); ++i) {
    Array& m = m_[i];
    Array& v = v_[i];
    const Array& g = grads[i];
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.square();
    const Array m_hat = m / bc1;
    const Array v_hat = v / bc2;
    *params[i] -= cfg_.learning_rate * m_hat / (v_hat.sqrt() + cfg_.epsilon);
  }
}

}  // namespace carskit
