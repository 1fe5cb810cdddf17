#pragma once

#include "carskit/common.hpp"
#include "carskit/grid.hpp"
#include "carskit/rng.hpp"

#include <vector>

namespace carskit {

struct GpConfig {
  // Noise variance candidates scored by held-out log-likelihood.
  std::vector<double> noise_grid{1e-4, 3.16e-4, 1e-3, 3.16e-3,
                                 1e-2, 3.16e-2, 1e-1};
  double holdout_fraction = 0.2;
  Index max_train = 1000;  // O(n^3) cap
  double jitter = 1e-10;
};

// Exact GP regression: inputs are whole CARS spectra, one RBF kernel shared
// across output channels, per-channel independent posteriors from a single
// Cholesky factorization.
struct GpModel {
  Eigen::MatrixXd train_inputs;  // m x L
  Eigen::MatrixXd alpha;         // m x L, (K + sn*I)^-1 (Y - y_mean)
  Eigen::MatrixXd chol_lower;    // m x m
  Array y_mean;                  // per-channel label mean
  double lengthscale = 1.0;
  double signal_var = 1.0;
  double noise_var = 1e-2;
};

GpModel gp_fit(const std::vector<Spectrum>& inputs,
               const std::vector<Spectrum>& labels, const GpConfig& cfg,
               Rng& rng);

// Fits with a fixed noise variance and no model selection; used by the
// selection loop and by small-instance tests.
GpModel gp_fit_fixed(const std::vector<Spectrum>& inputs,
                     const std::vector<Spectrum>& labels, double lengthscale,
                     double signal_var, double noise_var, double jitter);

PredictiveDistribution gp_predict(const GpModel& model, const Spectrum& x);

// Median pairwise Euclidean distance between inputs (subsampled when large).
double median_heuristic_lengthscale(const std::vector<Spectrum>& inputs,
                                    Rng& rng);

}  // namespace carskit
