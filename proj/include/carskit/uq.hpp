#pragma once

#include "carskit/adam.hpp"
#include "carskit/autodiff.hpp"
#include "carskit/gp.hpp"
#include "carskit/grid.hpp"
#include "carskit/network.hpp"
#include "carskit/physics_loss.hpp"
#include "carskit/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace carskit {

enum class UqMethod {
  kMcDropout,
  kDeepEnsemble,
  kFullBnn,
  kPartialBnn,
  kGpBaseline,
};

std::string to_string(UqMethod method);
UqMethod uq_method_from_string(const std::string& name);

struct MethodParams {
  int mc_passes = 50;          // stochastic forward passes (MC-Dropout)
  int ensemble_size = 5;       // independently trained members
  int posterior_samples = 50;  // weight samples (BNNs)
  double prior_std = 0.1;
  // Initial posterior std as a fraction of the prior scale.
  double init_posterior_scale = 0.01;
  GpConfig gp{};
};

struct TrainConfig {
  UqMethod method = UqMethod::kMcDropout;
  bool physics_on = false;
  LossWeights weights{};
  int epochs = 200;
  int batch_size = 32;
  std::uint64_t seed = 0;
  NetworkConfig network{};
  AdamConfig adam{};
  MethodParams method_params{};

  void validate() const;
};

// Diagonal Gaussian posterior over one parameter array; std = softplus(rho).
struct VariationalParam {
  Array mu;
  Array rho;
  double prior_std = 0.1;
};

// Closed-form KL(q || N(0, prior_std^2)) summed over parameters, on-tape.
ad::Tensor kl_gaussian(ad::Tape& tape, ad::Tensor mu, ad::Tensor rho,
                       double prior_std);

// Gaussian mixture moment matching: mean = average of member means,
// variance = average of (member variance + member mean^2) minus the squared
// combined mean, plus a shared extra term, floored at kVarianceFloor.
// `variances` may be empty when members carry no aleatoric term.
PredictiveDistribution moment_match_gaussians(
    const std::vector<Array>& means, const std::vector<Array>& variances,
    double extra_variance);

struct EpochLog {
  int epoch = 0;
  LossBreakdown mean_loss{};
  double wall_ms = 0.0;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
  bool aborted_non_finite = false;
};

// A trained predictor for any of the five methods. Neural parameter sets
// live in `members` (one per ensemble member); BNNs store posterior mu/rho
// aligned with the model defs, with `variational_indices` naming the defs
// that carry a posterior (all of them for the full BNN).
struct TrainedPredictor {
  UqMethod method = UqMethod::kMcDropout;
  bool physics_on = false;
  NetworkConfig network{};
  MethodParams method_params{};
  Index n_channels = 0;
  std::uint64_t seed = 0;

  std::vector<ParamStore> members;
  double mc_log_var = 0.0;
  ParamStore mu;
  ParamStore rho;
  std::vector<int> variational_indices;
  GpModel gp{};
};

// Trains one (method, physics) cell on the given pairs (callers pass the
// training split only). Non-finite losses abort with the last epoch's
// parameters kept.
TrainedPredictor train(const TrainConfig& config,
                       const std::vector<SpectralPair>& pairs,
                       TrainLog* log = nullptr);

PredictiveDistribution predict_dist(const TrainedPredictor& predictor,
                                    const Spectrum& cars);

// Raman distribution plus the averaged NRB-head output. The GP baseline has
// no decomposition; its nrb_mean stays empty.
struct ComponentPrediction {
  PredictiveDistribution raman;
  Spectrum nrb_mean;
};

ComponentPrediction predict_components(const TrainedPredictor& predictor,
                                       const Spectrum& cars);

std::vector<PredictiveDistribution> predict_all(
    const TrainedPredictor& predictor, const std::vector<Spectrum>& inputs);

// Homoscedastic log-variance initialization for the MC-Dropout likelihood.
inline constexpr double kMcLogVarInit = -5.0;

}  // namespace carskit
