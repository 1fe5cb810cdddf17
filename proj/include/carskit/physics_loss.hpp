#pragma once

#include "carskit/autodiff.hpp"

namespace carskit {

struct LossWeights {
  double lambda_data = 10.0;
  double lambda_kk = 1.0;
  double lambda_smooth = 10.0;

  void validate() const;
};

struct LossBreakdown {
  double data_term = 0.0;
  double kk_term = 0.0;
  double smooth_term = 0.0;
  double total = 0.0;
};

// mean((y_raman_hat - Im[H(x - y_nrb_hat)])^2) over batch and channels.
// Differentiable w.r.t. both predictions; x is the normalized CARS input.
ad::Tensor kk_loss(ad::Tape& tape, ad::Tensor y_raman_hat,
                   ad::Tensor y_nrb_hat, ad::Tensor x);

// mean of squared forward differences of the NRB prediction.
ad::Tensor smoothness_loss(ad::Tape& tape, ad::Tensor y_nrb_hat);

// Weighted sum of the three terms. Invalid kk/smooth tensors stand for a
// physics-off run: the corresponding subgraph is skipped entirely and the
// breakdown records zero for that term.
ad::Tensor total_loss(ad::Tape& tape, ad::Tensor data_term, ad::Tensor kk_term,
                      ad::Tensor smooth_term, const LossWeights& w,
                      LossBreakdown* breakdown);

}  // namespace carskit
