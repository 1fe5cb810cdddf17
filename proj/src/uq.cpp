#include "carskit/uq.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace carskit {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Substream counters; fixed so that runs are reproducible and independent
// of evaluation order.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kTrainNoiseStream = 2;
constexpr std::uint64_t kGpStream = 7;
constexpr std::uint64_t kPredictStream = 11;
constexpr std::uint64_t kMemberBase = 100;
constexpr std::uint64_t kShuffleBase = 1u << 20;

struct Batch {
  Array x;
  Array y;
  Index size = 0;
};

Batch gather_batch(const std::vector<SpectralPair>& pairs,
                   const std::vector<Index>& order, size_t from, size_t to,
                   Index length) {
  Batch batch;
  batch.size = static_cast<Index>(to - from);
  batch.x.resize(batch.size * length);
  batch.y.resize(batch.size * length);
  for (size_t i = from; i < to; ++i) {
    const auto& pair = pairs[static_cast<size_t>(order[i])];
    const Index row = static_cast<Index>(i - from);
    batch.x.segment(row * length, length) = pair.cars;
    batch.y.segment(row * length, length) = pair.raman_true;
  }
  return batch;
}

// Flat list of trainable arrays: model defs first (mu for variational
// entries), then rho arrays for variational defs, then an optional
// homoscedastic log-variance scalar.
struct Registry {
  std::vector<Array> values;
  std::vector<ad::Shape> shapes;

  std::vector<Index> sizes() const {
    std::vector<Index> out;
    out.reserve(values.size());
    for (const auto& v : values) out.push_back(v.size());
    return out;
  }
};

enum class VariationalMode { kNone, kFull, kHeadsOnly };

std::vector<int> variational_defs(const Model& model, VariationalMode mode) {
  std::vector<int> idx;
  if (mode == VariationalMode::kNone) return idx;
  for (int i = 0; i < static_cast<int>(model.defs().size()); ++i) {
    const std::string& name = model.defs()[static_cast<size_t>(i)].name;
    const bool head_param = name.starts_with("head.raman.") ||
                            name.starts_with("head.nrb.");
    if (mode == VariationalMode::kFull || head_param) idx.push_back(i);
  }
  return idx;
}

double softplus_inverse(double y) { return std::log(std::expm1(y)); }

struct NeuralCell {
  Registry registry;
  TrainLog log;
};

// Trains one network (one ensemble member, or the single net of the other
// neural methods).
NeuralCell train_one_network(const Model& model, const TrainConfig& cfg,
                             const std::vector<SpectralPair>& pairs,
                             const Rng& member_root, bool homoscedastic,
                             VariationalMode var_mode) {
  const Index n_train = static_cast<Index>(pairs.size());
  const Index length = pairs.front().cars.size();
  const size_t n_defs = model.defs().size();
  const std::vector<int> var_idx = variational_defs(model, var_mode);
  const double prior_std = cfg.method_params.prior_std;

  NeuralCell cell;
  Registry& reg = cell.registry;
  {
    Rng init_rng = member_root.substream(kInitStream);
    ParamStore init = model.init_params(init_rng);
    for (size_t i = 0; i < n_defs; ++i) {
      reg.values.push_back(std::move(init[i]));
      reg.shapes.push_back(model.defs()[i].shape);
    }
    const double rho_init = softplus_inverse(
        cfg.method_params.init_posterior_scale * prior_std);
    for (int def_i : var_idx) {
      const ad::Shape shape = model.defs()[static_cast<size_t>(def_i)].shape;
      reg.values.push_back(Array::Constant(shape.size(), rho_init));
      reg.shapes.push_back(shape);
    }
    if (homoscedastic) {
      reg.values.push_back(Array::Constant(1, kMcLogVarInit));
      reg.shapes.push_back(ad::scalar_shape());
    }
  }

  AdamState adam(reg.sizes(), cfg.adam);
  Rng noise_rng = member_root.substream(kTrainNoiseStream);
  const double kl_coeff =
      1.0 / (static_cast<double>(n_train) * static_cast<double>(length));

  std::vector<Index> order(static_cast<size_t>(n_train));
  std::iota(order.begin(), order.end(), Index{0});

  std::vector<Array> snapshot = reg.values;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();
    Rng shuffle_rng =
        member_root.substream(kShuffleBase + static_cast<std::uint64_t>(epoch));
    for (Index i = n_train - 1; i > 0; --i) {
      const Index j = static_cast<Index>(
          shuffle_rng.uniform_index(static_cast<std::uint64_t>(i) + 1));
      std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
    }

    LossBreakdown epoch_sum{};
    int n_steps = 0;
    bool aborted = false;
    for (size_t start = 0; start < static_cast<size_t>(n_train);
         start += static_cast<size_t>(cfg.batch_size)) {
      const size_t stop = std::min(start + static_cast<size_t>(cfg.batch_size),
                                   static_cast<size_t>(n_train));
      Batch batch = gather_batch(pairs, order, start, stop, length);

      ad::Tape tape;
      std::vector<ad::Tensor> leaves;
      leaves.reserve(reg.values.size());
      for (size_t i = 0; i < reg.values.size(); ++i) {
        leaves.push_back(tape.leaf(reg.values[i], reg.shapes[i], true));
      }

      std::vector<ad::Tensor> weights(leaves.begin(),
                                      leaves.begin() + n_defs);
      ad::Tensor kl;
      for (size_t j = 0; j < var_idx.size(); ++j) {
        const int def_i = var_idx[j];
        ad::Tensor mu_t = leaves[static_cast<size_t>(def_i)];
        ad::Tensor rho_t = leaves[n_defs + j];
        const ad::Shape shape = reg.shapes[static_cast<size_t>(def_i)];
        Array eps(shape.size());
        for (Index e = 0; e < eps.size(); ++e) eps[e] = noise_rng.normal();
        ad::Tensor eps_t = tape.leaf(std::move(eps), shape, false);
        weights[static_cast<size_t>(def_i)] =
            tape.add(mu_t, tape.mul(tape.softplus(rho_t), eps_t));
        ad::Tensor kl_j = kl_gaussian(tape, mu_t, rho_t, prior_std);
        kl = kl.valid() ? tape.add(kl, kl_j) : kl_j;
      }

      ad::Tensor x = tape.leaf(std::move(batch.x),
                               ad::Shape{batch.size, 1, length}, false);
      ad::Tensor y = tape.leaf(std::move(batch.y),
                               ad::Shape{batch.size, 1, length}, false);
      HeadOutputs heads =
          model.forward(tape, x, weights, /*training=*/true, &noise_rng);

      ad::Tensor data_term;
      if (homoscedastic) {
        ad::Tensor s = leaves.back();
        ad::Tensor mse = tape.mean(tape.square(tape.sub(heads.raman, y)));
        ad::Tensor weighted = tape.mul(tape.exp(tape.neg(s)), mse);
        data_term = tape.offset(tape.scale(tape.add(weighted, s), 0.5),
                                0.5 * kLog2Pi);
      } else {
        ad::Tensor sigma2 =
            tape.offset(tape.softplus(heads.raw_variance), kVarianceFloor);
        ad::Tensor resid2 = tape.square(tape.sub(y, heads.raman));
        ad::Tensor point_nll =
            tape.add(tape.log(sigma2), tape.div(resid2, sigma2));
        data_term = tape.offset(tape.scale(tape.mean(point_nll), 0.5),
                                0.5 * kLog2Pi);
      }
      if (kl.valid()) {
        data_term = tape.add(data_term, tape.scale(kl, kl_coeff));
      }

      ad::Tensor kk, smooth;
      if (cfg.physics_on && cfg.weights.lambda_kk > 0.0) {
        kk = kk_loss(tape, heads.raman, heads.nrb, x);
      }
      if (cfg.physics_on && cfg.weights.lambda_smooth > 0.0) {
        smooth = smoothness_loss(tape, heads.nrb);
      }
      LossBreakdown bd;
      ad::Tensor total = total_loss(tape, data_term, kk, smooth, cfg.weights,
                                    &bd);

      if (!std::isfinite(bd.total)) {
        reg.values = snapshot;
        cell.log.aborted_non_finite = true;
        aborted = true;
        break;
      }

      tape.backward(total);

      std::vector<Array> grads;
      grads.reserve(reg.values.size());
      for (const auto& leaf : leaves) {
        if (leaf.grad().size() == 0) {
          grads.push_back(Array::Zero(leaf.value().size()));
        } else {
          grads.push_back(leaf.grad());
        }
      }
      std::vector<Array*> params;
      params.reserve(reg.values.size());
      for (auto& v : reg.values) params.push_back(&v);
      adam.step(params, grads);

      epoch_sum.data_term += bd.data_term;
      epoch_sum.kk_term += bd.kk_term;
      epoch_sum.smooth_term += bd.smooth_term;
      epoch_sum.total += bd.total;
      ++n_steps;
    }
    if (aborted) break;

    snapshot = reg.values;
    EpochLog entry;
    entry.epoch = epoch;
    if (n_steps > 0) {
      entry.mean_loss.data_term = epoch_sum.data_term / n_steps;
      entry.mean_loss.kk_term = epoch_sum.kk_term / n_steps;
      entry.mean_loss.smooth_term = epoch_sum.smooth_term / n_steps;
      entry.mean_loss.total = epoch_sum.total / n_steps;
    }
    entry.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - epoch_start)
                        .count();
    cell.log.epochs.push_back(entry);
  }
  return cell;
}

std::vector<ad::Tensor> weight_leaves(ad::Tape& tape, const Model& model,
                                      const ParamStore& store) {
  std::vector<ad::Tensor> out;
  out.reserve(store.size());
  for (size_t i = 0; i < store.size(); ++i) {
    out.push_back(tape.leaf(store[i], model.defs()[i].shape, false));
  }
  return out;
}

TrainedPredictor train_gp(const TrainConfig& cfg,
                          const std::vector<SpectralPair>& pairs) {
  std::vector<Spectrum> inputs, labels;
  inputs.reserve(pairs.size());
  labels.reserve(pairs.size());
  for (const auto& p : pairs) {
    inputs.push_back(p.cars);
    labels.push_back(p.raman_true);
  }
  Rng rng = Rng(cfg.seed).substream(kGpStream);
  TrainedPredictor predictor;
  predictor.method = UqMethod::kGpBaseline;
  predictor.physics_on = false;
  predictor.method_params = cfg.method_params;
  predictor.n_channels = inputs.front().size();
  predictor.seed = cfg.seed;
  predictor.gp = gp_fit(inputs, labels, cfg.method_params.gp, rng);
  return predictor;
}

}  // namespace

PredictiveDistribution moment_match_gaussians(
    const std::vector<Array>& means, const std::vector<Array>& variances,
    double extra_variance) {
  const auto n = static_cast<double>(means.size());
  const Index length = means.front().size();
  Array mean = Array::Zero(length);
  Array second = Array::Zero(length);
  for (size_t s = 0; s < means.size(); ++s) {
    mean += means[s];
    second += means[s].square();
    if (!variances.empty()) second += variances[s];
  }
  mean /= n;
  PredictiveDistribution out;
  out.mean = mean;
  out.variance =
      (second / n - mean.square() + extra_variance).max(kVarianceFloor);
  return out;
}

std::string to_string(UqMethod method) {
  switch (method) {
    case UqMethod::kMcDropout:
      return "mc_dropout";
    case UqMethod::kDeepEnsemble:
      return "deep_ensemble";
    case UqMethod::kFullBnn:
      return "full_bnn";
    case UqMethod::kPartialBnn:
      return "partial_bnn";
    case UqMethod::kGpBaseline:
      return "gp";
  }
  throw ConfigError("unknown UQ method enum");
}

UqMethod uq_method_from_string(const std::string& name) {
  if (name == "mc_dropout") return UqMethod::kMcDropout;
  if (name == "deep_ensemble") return UqMethod::kDeepEnsemble;
  if (name == "full_bnn") return UqMethod::kFullBnn;
  if (name == "partial_bnn") return UqMethod::kPartialBnn;
  if (name == "gp") return UqMethod::kGpBaseline;
  throw ConfigError("unknown UQ method: " + name);
}

void TrainConfig::validate() const {
  if (physics_on && method == UqMethod::kGpBaseline) {
    throw ConfigError("gp baseline has no physics-on variant");
  }
  if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  weights.validate();
  network.validate();
  if (method_params.mc_passes < 2) {
    throw ConfigError("train: mc_passes must be >= 2");
  }
  if (method_params.ensemble_size < 1) {
    throw ConfigError("train: ensemble_size must be >= 1");
  }
  if (method_params.posterior_samples < 2) {
    throw ConfigError("train: posterior_samples must be >= 2");
  }
  if (!(method_params.prior_std > 0.0)) {
    throw ConfigError("train: prior_std must be positive");
  }
}

ad::Tensor kl_gaussian(ad::Tape& tape, ad::Tensor mu, ad::Tensor rho,
                       double prior_std) {
  // KL(N(mu, std^2) || N(0, p^2)) summed elementwise,
  // = log(p/std) + (std^2 + mu^2) / (2 p^2) - 1/2.
  ad::Tensor std_t = tape.softplus(rho);
  ad::Tensor quad = tape.scale(tape.add(tape.square(std_t), tape.square(mu)),
                               1.0 / (2.0 * prior_std * prior_std));
  ad::Tensor term = tape.sub(quad, tape.log(std_t));
  return tape.sum(tape.offset(term, std::log(prior_std) - 0.5));
}

TrainedPredictor train(const TrainConfig& config,
                       const std::vector<SpectralPair>& pairs,
                       TrainLog* log) {
  config.validate();
  if (pairs.empty()) throw DataError("train: empty training set");
  const Index length = pairs.front().cars.size();
  for (const auto& p : pairs) {
    if (p.cars.size() != length || p.raman_true.size() != length) {
      throw DataError("train: inconsistent spectrum lengths");
    }
  }

  if (config.method == UqMethod::kGpBaseline) {
    return train_gp(config, pairs);
  }

  const bool homoscedastic = config.method == UqMethod::kMcDropout;
  NetworkConfig ncfg = config.network;
  ncfg.variance_head = !homoscedastic;
  const Model model(ncfg);

  VariationalMode var_mode = VariationalMode::kNone;
  if (config.method == UqMethod::kFullBnn) var_mode = VariationalMode::kFull;
  if (config.method == UqMethod::kPartialBnn) {
    var_mode = VariationalMode::kHeadsOnly;
  }

  const int n_members = config.method == UqMethod::kDeepEnsemble
                            ? config.method_params.ensemble_size
                            : 1;

  TrainedPredictor predictor;
  predictor.method = config.method;
  predictor.physics_on = config.physics_on;
  predictor.network = ncfg;
  predictor.method_params = config.method_params;
  predictor.n_channels = length;
  predictor.seed = config.seed;

  const size_t n_defs = model.defs().size();
  const Rng root(config.seed);
  for (int m = 0; m < n_members; ++m) {
    const Rng member_root =
        root.substream(kMemberBase + static_cast<std::uint64_t>(m));
    NeuralCell cell = train_one_network(model, config, pairs, member_root,
                                        homoscedastic, var_mode);
    if (log != nullptr) {
      if (m == 0) {
        *log = cell.log;
      } else if (cell.log.aborted_non_finite) {
        log->aborted_non_finite = true;
      }
    }

    if (var_mode == VariationalMode::kNone) {
      ParamStore member(cell.registry.values.begin(),
                        cell.registry.values.begin() + n_defs);
      predictor.members.push_back(std::move(member));
      if (homoscedastic) predictor.mc_log_var = cell.registry.values.back()[0];
    } else {
      predictor.mu.assign(cell.registry.values.begin(),
                          cell.registry.values.begin() + n_defs);
      const std::vector<int> var_idx = variational_defs(model, var_mode);
      predictor.variational_indices = var_idx;
      predictor.rho.assign(n_defs, Array());
      for (size_t j = 0; j < var_idx.size(); ++j) {
        predictor.rho[static_cast<size_t>(var_idx[j])] =
            cell.registry.values[n_defs + j];
      }
    }
  }
  return predictor;
}

ComponentPrediction predict_components(const TrainedPredictor& predictor,
                                       const Spectrum& cars) {
  if (cars.size() != predictor.n_channels) {
    throw DataError("predict: grid length mismatch");
  }
  if (predictor.method == UqMethod::kGpBaseline) {
    ComponentPrediction out;
    out.raman = gp_predict(predictor.gp, cars);
    return out;
  }

  const Model model(predictor.network);
  const Index length = cars.size();
  const auto softplus_arr = [](const Array& raw) {
    return Array(raw.unaryExpr([](double v) {
      return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v)));
    }));
  };

  if (predictor.method == UqMethod::kMcDropout) {
    // All stochastic passes batched; masks differ per batch row.
    const Index passes = predictor.method_params.mc_passes;
    Array x_batch(passes * length);
    for (Index t = 0; t < passes; ++t) {
      x_batch.segment(t * length, length) = cars;
    }
    Rng rng = Rng(predictor.seed).substream(kPredictStream);
    ad::Tape tape;
    auto weights = weight_leaves(tape, model, predictor.members.front());
    ad::Tensor x =
        tape.leaf(std::move(x_batch), ad::Shape{passes, 1, length}, false);
    HeadOutputs heads =
        model.forward(tape, x, weights, /*training=*/true, &rng);
    const Array& raman = heads.raman.value();  // (passes, 1, length)
    const Array& nrb = heads.nrb.value();
    std::vector<Array> means;
    means.reserve(static_cast<size_t>(passes));
    Array nrb_mean = Array::Zero(length);
    for (Index t = 0; t < passes; ++t) {
      means.push_back(raman.segment(t * length, length));
      nrb_mean += nrb.segment(t * length, length);
    }
    ComponentPrediction out;
    out.raman = moment_match_gaussians(means, {}, std::exp(predictor.mc_log_var));
    out.nrb_mean = nrb_mean / static_cast<double>(passes);
    return out;
  }

  if (predictor.method == UqMethod::kDeepEnsemble) {
    std::vector<Array> means, variances;
    Array nrb_mean = Array::Zero(length);
    for (const auto& member : predictor.members) {
      ad::Tape tape;
      auto weights = weight_leaves(tape, model, member);
      ad::Tensor x = tape.leaf(cars, ad::Shape{1, 1, length}, false);
      HeadOutputs heads =
          model.forward(tape, x, weights, /*training=*/false, nullptr);
      means.push_back(heads.raman.value());
      variances.push_back(softplus_arr(heads.raw_variance.value()) +
                          kVarianceFloor);
      nrb_mean += heads.nrb.value();
    }
    ComponentPrediction out;
    out.raman = moment_match_gaussians(means, variances, 0.0);
    out.nrb_mean = nrb_mean / static_cast<double>(predictor.members.size());
    return out;
  }

  // Full / partial BNN: sample posterior weights outside the tape.
  const Index samples = predictor.method_params.posterior_samples;
  Rng rng = Rng(predictor.seed).substream(kPredictStream);
  std::vector<Array> means, variances;
  means.reserve(static_cast<size_t>(samples));
  Array nrb_mean = Array::Zero(length);
  for (Index s = 0; s < samples; ++s) {
    ParamStore sampled = predictor.mu;
    for (int def_i : predictor.variational_indices) {
      const Array& rho = predictor.rho[static_cast<size_t>(def_i)];
      Array& w = sampled[static_cast<size_t>(def_i)];
      for (Index e = 0; e < w.size(); ++e) {
        const double std_e =
            std::max(rho[e], 0.0) + std::log1p(std::exp(-std::abs(rho[e])));
        w[e] += std_e * rng.normal();
      }
    }
    ad::Tape tape;
    auto weights = weight_leaves(tape, model, sampled);
    ad::Tensor x = tape.leaf(cars, ad::Shape{1, 1, length}, false);
    HeadOutputs heads =
        model.forward(tape, x, weights, /*training=*/false, nullptr);
    means.push_back(heads.raman.value());
    variances.push_back(softplus_arr(heads.raw_variance.value()) +
                        kVarianceFloor);
    nrb_mean += heads.nrb.value();
  }
  ComponentPrediction out;
  out.raman = moment_match_gaussians(means, variances, 0.0);
  out.nrb_mean = nrb_mean / static_cast<double>(samples);
  return out;
}

PredictiveDistribution predict_dist(const TrainedPredictor& predictor,
                                    const Spectrum& cars) {
  return predict_components(predictor, cars).raman;
}

std::vector<PredictiveDistribution> predict_all(
    const TrainedPredictor& predictor, const std::vector<Spectrum>& inputs) {
  std::vector<PredictiveDistribution> out;
  out.reserve(inputs.size());
  for (const auto& x : inputs) out.push_back(predict_dist(predictor, x));
  return out;
}

}  // namespace carskit
