#include "carskit/physics_loss.hpp"

namespace carskit {

void LossWeights::validate() const {
  if (lambda_data < 0.0 || lambda_kk < 0.0 || lambda_smooth < 0.0) {
    throw ConfigError("loss weights must be nonnegative");
  }
  if (lambda_data == 0.0 && lambda_kk == 0.0 && lambda_smooth == 0.0) {
    throw ConfigError("loss weights must not all be zero");
  }
}

ad::Tensor kk_loss(ad::Tape& tape, ad::Tensor y_raman_hat,
                   ad::Tensor y_nrb_hat, ad::Tensor x) {
  ad::Tensor resonant = tape.sub(x, y_nrb_hat);
  ad::Tensor kk_target = tape.linear_op(resonant, LinearOpTag::kHilbertImag);
  return tape.mean(tape.square(tape.sub(y_raman_hat, kk_target)));
}

ad::Tensor smoothness_loss(ad::Tape& tape, ad::Tensor y_nrb_hat) {
  ad::Tensor diff = tape.linear_op(y_nrb_hat, LinearOpTag::kFirstDifference);
  return tape.mean(tape.square(diff));
}

ad::Tensor total_loss(ad::Tape& tape, ad::Tensor data_term, ad::Tensor kk_term,
                      ad::Tensor smooth_term, const LossWeights& w,
                      LossBreakdown* breakdown) {
  w.validate();
  ad::Tensor total = tape.scale(data_term, w.lambda_data);
  LossBreakdown bd;
  bd.data_term = data_term.scalar();
  if (kk_term.valid() && w.lambda_kk != 0.0) {
    bd.kk_term = kk_term.scalar();
    total = tape.add(total, tape.scale(kk_term, w.lambda_kk));
  }
  if (smooth_term.valid() && w.lambda_smooth != 0.0) {
    bd.smooth_term = smooth_term.scalar();
    total = tape.add(total, tape.scale(smooth_term, w.lambda_smooth));
  }
  bd.total = total.scalar();
  if (breakdown != nullptr) *breakdown = bd;
  return total;
}

}  // namespace carskit
