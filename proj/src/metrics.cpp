#include "carskit/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace carskit {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kSqrt2Pi = 2.5066282746310005024;

void check_shapes(std::span<const PredictiveDistribution> preds,
                  std::span<const Spectrum> truth) {
  if (preds.size() != truth.size() || preds.empty()) {
    throw DataError("metrics: prediction/truth count mismatch or empty");
  }
  for (size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].mean.size() != truth[i].size() ||
        preds[i].variance.size() != truth[i].size()) {
      throw DataError("metrics: spectrum length mismatch at index " +
                      std::to_string(i));
    }
  }
}

}  // namespace

std::vector<double> default_levels() {
  std::vector<double> levels;
  for (int j = 1; j <= 19; ++j) levels.push_back(0.05 * j);
  return levels;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DataError("normal_quantile: p must be in (0, 1)");
  }
  // Acklam's rational approximation.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
          c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley step against the exact CDF.
  const double err = 0.5 * std::erfc(-x / kSqrt2) - p;
  const double u = err * kSqrt2Pi * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double avg_log_likelihood(std::span<const PredictiveDistribution> preds,
                          std::span<const Spectrum> truth) {
  check_shapes(preds, truth);
  double sum = 0.0;
  Index count = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    const Array var = preds[i].variance.max(kVarianceFloor);
    const Array resid = truth[i] - preds[i].mean;
    sum += (-0.5 * (kLog2Pi + var.log() + resid.square() / var)).sum();
    count += truth[i].size();
  }
  return sum / static_cast<double>(count);
}

std::pair<double, CalibrationCurve> ece(
    std::span<const PredictiveDistribution> preds,
    std::span<const Spectrum> truth, const std::vector<double>& levels) {
  check_shapes(preds, truth);
  if (levels.empty()) throw DataError("ece: empty level list");
  for (size_t j = 1; j < levels.size(); ++j) {
    if (!(levels[j] > levels[j - 1])) {
      throw DataError("ece: levels must be strictly ascending");
    }
  }
  std::vector<double> z(levels.size());
  for (size_t j = 0; j < levels.size(); ++j) z[j] = normal_quantile(levels[j]);

  std::vector<Index> hits(levels.size(), 0);
  Index count = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    const Array sigma = preds[i].variance.max(kVarianceFloor).sqrt();
    const Array& mu = preds[i].mean;
    const Array& y = truth[i];
    for (Index t = 0; t < y.size(); ++t) {
      for (size_t j = 0; j < levels.size(); ++j) {
        if (y[t] <= mu[t] + sigma[t] * z[j]) ++hits[j];
      }
    }
    count += y.size();
  }
  CalibrationCurve curve;
  curve.levels = levels;
  curve.empirical_coverage.resize(levels.size());
  double gap_sum = 0.0;
  for (size_t j = 0; j < levels.size(); ++j) {
    const double coverage =
        static_cast<double>(hits[j]) / static_cast<double>(count);
    curve.empirical_coverage[j] = coverage;
    gap_sum += std::abs(levels[j] - coverage);
  }
  return {gap_sum / static_cast<double>(levels.size()), curve};
}

double rmse(std::span<const PredictiveDistribution> preds,
            std::span<const Spectrum> truth) {
  check_shapes(preds, truth);
  double sum = 0.0;
  Index count = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    sum += (truth[i] - preds[i].mean).square().sum();
    count += truth[i].size();
  }
  return std::sqrt(sum / static_cast<double>(count));
}

double spectrum_log_likelihood(const PredictiveDistribution& pred,
                               const Spectrum& truth) {
  const PredictiveDistribution p[] = {pred};
  const Spectrum t[] = {truth};
  return avg_log_likelihood(p, t);
}

double spectrum_rmse(const PredictiveDistribution& pred,
                     const Spectrum& truth) {
  const PredictiveDistribution p[] = {pred};
  const Spectrum t[] = {truth};
  return rmse(p, t);
}

}  // namespace carskit
