#include "carskit/uq.hpp"

#include "carskit/synth.hpp"

#include <doctest.h>

#include <cmath>

using namespace carskit;

namespace {

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double softplus_inverse(double y) { return std::log(std::expm1(y)); }

std::vector<SpectralPair> tiny_dataset(int n, Index length,
                                       std::uint64_t seed) {
  SynthConfig cfg;
  cfg.n_peaks_range = {1, 3};
  cfg.amplitude_range = {0.05, 0.5};
  cfg.center_range = {0.2, 0.8};
  cfg.gamma_range = {0.01, 0.03};
  cfg.noise.sigma_max = 0.0;
  cfg.seed = seed;
  const WavenumberGrid grid = make_grid(length);
  return generate_dataset(n, cfg, grid);
}

TrainConfig tiny_train_config(UqMethod method) {
  TrainConfig cfg;
  cfg.method = method;
  cfg.physics_on = false;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  cfg.seed = 7;
  cfg.network.n_blocks = 1;
  cfg.network.width = 4;
  cfg.network.kernel_size = 3;
  cfg.network.dropout_p = 0.1;
  cfg.method_params.mc_passes = 8;
  cfg.method_params.posterior_samples = 8;
  cfg.method_params.ensemble_size = 3;
  return cfg;
}

}  // namespace

TEST_CASE("kl of the prior itself is zero") {
  ad::Tape tape;
  const double prior = 0.25;
  const Index n = 10;
  Array mu = Array::Zero(n);
  Array rho = Array::Constant(n, softplus_inverse(prior));
  ad::Tensor kl = kl_gaussian(tape, tape.leaf(mu, true),
                              tape.leaf(rho, true), prior);
  CHECK(std::abs(kl.scalar()) < 1e-12);
}

TEST_CASE("unit-variance unit-mean single weight has KL one half") {
  ad::Tape tape;
  Array mu(1), rho(1);
  mu << 1.0;
  rho << softplus_inverse(1.0);
  ad::Tensor kl = kl_gaussian(tape, tape.leaf(mu, ad::scalar_shape(), true),
                              tape.leaf(rho, ad::scalar_shape(), true), 1.0);
  CHECK(kl.scalar() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("kl matches an elementwise brute-force oracle on 1000 parameters") {
  Rng rng(3);
  const Index n = 1000;
  const double prior = 0.1;
  Array mu(n), rho(n);
  for (Index i = 0; i < n; ++i) {
    mu[i] = rng.uniform(-0.3, 0.3);
    rho[i] = rng.uniform(-6.0, 1.0);
  }
  double oracle = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double sd = softplus(rho[i]);
    oracle += std::log(prior / sd) +
              (sd * sd + mu[i] * mu[i]) / (2.0 * prior * prior) - 0.5;
  }
  ad::Tape tape;
  ad::Tensor kl = kl_gaussian(tape, tape.leaf(mu, true),
                              tape.leaf(rho, true), prior);
  CHECK(std::abs(kl.scalar() - oracle) / std::abs(oracle) < 1e-12);
}

TEST_CASE("kl is nonnegative away from the prior") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    ad::Tape tape;
    const Index n = 17;
    Array mu(n), rho(n);
    for (Index i = 0; i < n; ++i) {
      mu[i] = rng.uniform(-1.0, 1.0);
      rho[i] = rng.uniform(-5.0, 2.0);
    }
    ad::Tensor kl = kl_gaussian(tape, tape.leaf(mu, true),
                                tape.leaf(rho, true), 0.2);
    CHECK(kl.scalar() >= -1e-12);
  }
}

TEST_CASE("moment matching arithmetic on a two-member mixture") {
  Array m0 = Array::Constant(4, 0.0);
  Array m1 = Array::Constant(4, 2.0);
  Array v0 = Array::Zero(4);
  const PredictiveDistribution combined =
      moment_match_gaussians({m0, m1}, {v0, v0}, 0.0);
  for (Index i = 0; i < 4; ++i) {
    CHECK(combined.mean[i] == doctest::Approx(1.0));
    CHECK(combined.variance[i] == doctest::Approx(1.0));
  }

  // Identical members collapse to the member aleatoric variance.
  Array va = Array::Constant(4, 0.04);
  const PredictiveDistribution same =
      moment_match_gaussians({m1, m1}, {va, va}, 0.0);
  for (Index i = 0; i < 4; ++i) {
    CHECK(same.mean[i] == doctest::Approx(2.0));
    CHECK(same.variance[i] == doctest::Approx(0.04).epsilon(1e-10));
  }
}

TEST_CASE("combined variance dominates the mean aleatoric variance") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Array> means, vars;
    const Index n = 12;
    for (int m = 0; m < 5; ++m) {
      Array mu(n), v(n);
      for (Index i = 0; i < n; ++i) {
        mu[i] = rng.uniform(-1.0, 1.0);
        v[i] = rng.uniform(0.0, 0.3);
      }
      means.push_back(mu);
      vars.push_back(v);
    }
    const PredictiveDistribution combined =
        moment_match_gaussians(means, vars, 0.0);
    Array mean_aleatoric = Array::Zero(n);
    for (const auto& v : vars) mean_aleatoric += v;
    mean_aleatoric /= 5.0;
    for (Index i = 0; i < n; ++i) {
      CHECK(combined.variance[i] >= mean_aleatoric[i] - 1e-12);
    }
  }
}

TEST_CASE("gp baseline rejects physics-on configuration") {
  TrainConfig cfg = tiny_train_config(UqMethod::kGpBaseline);
  cfg.physics_on = true;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("deep ensemble trains the configured number of members") {
  const auto data = tiny_dataset(8, 32, 21);
  TrainConfig cfg = tiny_train_config(UqMethod::kDeepEnsemble);
  const TrainedPredictor predictor = train(cfg, data);
  CHECK(predictor.members.size() == 3);
  const PredictiveDistribution pred = predict_dist(predictor, data[0].cars);
  CHECK(all_finite(pred.mean));
  CHECK(pred.variance.minCoeff() >= kVarianceFloor);
}

TEST_CASE("training and prediction are deterministic per seed") {
  const auto data = tiny_dataset(8, 32, 22);
  for (UqMethod method :
       {UqMethod::kMcDropout, UqMethod::kFullBnn, UqMethod::kPartialBnn,
        UqMethod::kGpBaseline}) {
    CAPTURE(to_string(method));
    TrainConfig cfg = tiny_train_config(method);
    const TrainedPredictor p1 = train(cfg, data);
    const TrainedPredictor p2 = train(cfg, data);
    const PredictiveDistribution d1 = predict_dist(p1, data[1].cars);
    const PredictiveDistribution d2 = predict_dist(p2, data[1].cars);
    CHECK((d1.mean == d2.mean).all());
    CHECK((d1.variance == d2.variance).all());
  }
}

TEST_CASE("physics-off trajectory equals zero-weight physics trajectory") {
  const auto data = tiny_dataset(8, 32, 23);
  TrainConfig off = tiny_train_config(UqMethod::kMcDropout);
  off.physics_on = false;

  TrainConfig zeroed = off;
  zeroed.physics_on = true;
  zeroed.weights.lambda_kk = 0.0;
  zeroed.weights.lambda_smooth = 0.0;

  const TrainedPredictor p_off = train(off, data);
  const TrainedPredictor p_zero = train(zeroed, data);
  const PredictiveDistribution d_off = predict_dist(p_off, data[2].cars);
  const PredictiveDistribution d_zero = predict_dist(p_zero, data[2].cars);
  CHECK((d_off.mean == d_zero.mean).all());
  CHECK((d_off.variance == d_zero.variance).all());
}

TEST_CASE("physics terms are recorded in the training log") {
  const auto data = tiny_dataset(8, 32, 24);
  TrainConfig cfg = tiny_train_config(UqMethod::kFullBnn);
  cfg.physics_on = true;
  TrainLog log;
  (void)train(cfg, data, &log);
  REQUIRE(!log.epochs.empty());
  bool any_kk = false;
  for (const auto& row : log.epochs) {
    if (row.mean_loss.kk_term != 0.0) any_kk = true;
  }
  CHECK(any_kk);

  TrainConfig off = cfg;
  off.physics_on = false;
  TrainLog log_off;
  (void)train(off, data, &log_off);
  for (const auto& row : log_off.epochs) {
    CHECK(row.mean_loss.kk_term == 0.0);
    CHECK(row.mean_loss.smooth_term == 0.0);
  }
}

TEST_CASE("mc-dropout with p = 0 reduces to the learned variance") {
  const auto data = tiny_dataset(8, 32, 25);
  TrainConfig cfg = tiny_train_config(UqMethod::kMcDropout);
  cfg.network.dropout_p = 0.0;
  const TrainedPredictor predictor = train(cfg, data);
  const PredictiveDistribution pred = predict_dist(predictor, data[0].cars);
  const double learned = std::exp(predictor.mc_log_var);
  for (Index i = 0; i < pred.variance.size(); ++i) {
    CHECK(pred.variance[i] ==
          doctest::Approx(std::max(learned, kVarianceFloor)).epsilon(1e-9));
  }
}

TEST_CASE("mc-dropout mean stabilizes as passes double") {
  const auto data = tiny_dataset(10, 32, 26);
  TrainConfig cfg = tiny_train_config(UqMethod::kMcDropout);
  cfg.epochs = 3;
  TrainedPredictor predictor = train(cfg, data);

  predictor.method_params.mc_passes = 50;
  const PredictiveDistribution p50 = predict_dist(predictor, data[0].cars);
  predictor.method_params.mc_passes = 100;
  const PredictiveDistribution p100 = predict_dist(predictor, data[0].cars);

  // predictive variance = spread + learned sigma^2; remove the shared part
  const double learned = std::exp(predictor.mc_log_var);
  Index ok = 0;
  for (Index i = 0; i < p50.mean.size(); ++i) {
    const double spread_var = std::max(p50.variance[i] - learned, 0.0);
    const double tolerance = 3.0 * std::sqrt(spread_var / 50.0) + 1e-12;
    if (std::abs(p50.mean[i] - p100.mean[i]) < tolerance) ++ok;
  }
  CHECK(static_cast<double>(ok) / static_cast<double>(p50.mean.size()) >=
        0.99);
}

TEST_CASE("non-finite losses abort training with the last good parameters") {
  const auto data = tiny_dataset(8, 32, 27);
  TrainConfig cfg = tiny_train_config(UqMethod::kDeepEnsemble);
  cfg.method_params.ensemble_size = 2;
  cfg.adam.learning_rate = 1e200;  // variance head overflows the Gaussian NLL
  cfg.epochs = 4;
  TrainLog log;
  const TrainedPredictor predictor = train(cfg, data, &log);
  CHECK(log.aborted_non_finite);
  const PredictiveDistribution pred = predict_dist(predictor, data[0].cars);
  CHECK(all_finite(pred.mean));
  CHECK(all_finite(pred.variance));
}

TEST_CASE("zero-epoch training yields an evaluable initialized model") {
  const auto data = tiny_dataset(6, 32, 28);
  TrainConfig cfg = tiny_train_config(UqMethod::kDeepEnsemble);
  cfg.epochs = 0;
  const TrainedPredictor predictor = train(cfg, data);
  const PredictiveDistribution pred = predict_dist(predictor, data[0].cars);
  CHECK(all_finite(pred.mean));
}

TEST_CASE("method names round-trip") {
  for (UqMethod m : {UqMethod::kMcDropout, UqMethod::kDeepEnsemble,
                     UqMethod::kFullBnn, UqMethod::kPartialBnn,
                     UqMethod::kGpBaseline}) {
    CHECK(uq_method_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS(uq_method_from_string("nope"), ConfigError);
}
