#pragma once

#include "carskit/common.hpp"
#include "carskit/grid.hpp"

#include <span>
#include <utility>
#include <vector>

namespace carskit {

struct CalibrationCurve {
  std::vector<double> levels;
  std::vector<double> empirical_coverage;
};

// Quantile levels 0.05, 0.10, ..., 0.95.
std::vector<double> default_levels();

// Inverse standard-normal CDF; rational approximation refined by one Halley
// step, absolute error well below 1e-8.
double normal_quantile(double p);

// Mean Gaussian log-density over all (spectrum, channel) points. Variances
// are floored at kVarianceFloor before scoring.
double avg_log_likelihood(std::span<const PredictiveDistribution> preds,
                          std::span<const Spectrum> truth);

// One-sided quantile calibration: coverage_j = fraction of points with
// y <= mu + sigma * Phi^-1(p_j); ECE = mean |p_j - coverage_j|.
std::pair<double, CalibrationCurve> ece(
    std::span<const PredictiveDistribution> preds,
    std::span<const Spectrum> truth, const std::vector<double>& levels);

double rmse(std::span<const PredictiveDistribution> preds,
            std::span<const Spectrum> truth);

// Per-spectrum scores, used for the +/- spreads in reports.
double spectrum_log_likelihood(const PredictiveDistribution& pred,
                               const Spectrum& truth);
double spectrum_rmse(const PredictiveDistribution& pred,
                     const Spectrum& truth);

}  // namespace carskit
