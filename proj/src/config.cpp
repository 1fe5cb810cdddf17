#include "carskit/config.hpp"

#include <fstream>

namespace carskit {

namespace {

using nlohmann::json;

[[noreturn]] void fail_field(const std::string& key, const std::string& what) {
  throw ConfigError("config field '" + key + "': " + what);
}

template <typename T>
T get_field(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail_field(key, e.what());
  }
}

Interval get_interval(const json& j, const std::string& key,
                      Interval fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2) {
    fail_field(key, "expected [lo, hi]");
  }
  try {
    return Interval{v.at(0).get<double>(), v.at(1).get<double>()};
  } catch (const json::exception& e) {
    fail_field(key, e.what());
  }
}

IntInterval get_int_interval(const json& j, const std::string& key,
                             IntInterval fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2) {
    fail_field(key, "expected [lo, hi]");
  }
  try {
    return IntInterval{v.at(0).get<int>(), v.at(1).get<int>()};
  } catch (const json::exception& e) {
    fail_field(key, e.what());
  }
}

json interval_json(const Interval& iv) { return json::array({iv.lo, iv.hi}); }

}  // namespace

void ExperimentConfig::validate() const {
  if (n_channels < 8 || n_channels % 2 != 0) {
    throw ConfigError("config: n_channels must be even and >= 8");
  }
  if (n_pairs < 1) throw ConfigError("config: n_pairs must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("config: train_fraction must be in (0, 1)");
  }
  if (benchmark.replicates < 1) {
    throw ConfigError("config: benchmark replicates must be >= 1");
  }
  synth.validate();
  train.validate();
  for (size_t j = 1; j < metrics.levels.size(); ++j) {
    if (!(metrics.levels[j] > metrics.levels[j - 1])) {
      throw ConfigError("config: metric levels must be strictly ascending");
    }
  }
  for (double level : metrics.levels) {
    if (!(level > 0.0 && level < 1.0)) {
      throw ConfigError("config: metric levels must lie in (0, 1)");
    }
  }
}

json synth_config_to_json(const SynthConfig& cfg) {
  json j;
  j["n_peaks_range"] = json::array({cfg.n_peaks_range.lo, cfg.n_peaks_range.hi});
  j["amplitude_range"] = interval_json(cfg.amplitude_range);
  j["center_range"] = interval_json(cfg.center_range);
  j["gamma_range"] = interval_json(cfg.gamma_range);
  j["sigmoid_probability"] = cfg.sigmoid_probability;
  j["sigmoid_steepness_range"] = interval_json(cfg.sigmoid_steepness_range);
  j["sigmoid_rise_range"] = interval_json(cfg.sigmoid_rise_range);
  j["sigmoid_fall_range"] = interval_json(cfg.sigmoid_fall_range);
  j["poly_constant_range"] = interval_json(cfg.poly_constant_range);
  j["poly_coeff_range"] = interval_json(cfg.poly_coeff_range);
  j["noise_sigma_max"] = cfg.noise.sigma_max;
  j["seed"] = cfg.seed;
  return j;
}

SynthConfig synth_config_from_json(const json& j) {
  SynthConfig cfg;
  cfg.n_peaks_range = get_int_interval(j, "n_peaks_range", cfg.n_peaks_range);
  cfg.amplitude_range = get_interval(j, "amplitude_range", cfg.amplitude_range);
  cfg.center_range = get_interval(j, "center_range", cfg.center_range);
  cfg.gamma_range = get_interval(j, "gamma_range", cfg.gamma_range);
  cfg.sigmoid_probability =
      get_field(j, "sigmoid_probability", cfg.sigmoid_probability);
  cfg.sigmoid_steepness_range =
      get_interval(j, "sigmoid_steepness_range", cfg.sigmoid_steepness_range);
  cfg.sigmoid_rise_range =
      get_interval(j, "sigmoid_rise_range", cfg.sigmoid_rise_range);
  cfg.sigmoid_fall_range =
      get_interval(j, "sigmoid_fall_range", cfg.sigmoid_fall_range);
  cfg.poly_constant_range =
      get_interval(j, "poly_constant_range", cfg.poly_constant_range);
  cfg.poly_coeff_range =
      get_interval(j, "poly_coeff_range", cfg.poly_coeff_range);
  cfg.noise.sigma_max = get_field(j, "noise_sigma_max", cfg.noise.sigma_max);
  cfg.seed = get_field(j, "seed", cfg.seed);
  return cfg;
}

json train_config_to_json(const TrainConfig& cfg) {
  json j;
  j["method"] = to_string(cfg.method);
  j["physics_on"] = cfg.physics_on;
  j["weights"] = {{"lambda_data", cfg.weights.lambda_data},
                  {"lambda_kk", cfg.weights.lambda_kk},
                  {"lambda_smooth", cfg.weights.lambda_smooth}};
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["seed"] = cfg.seed;
  j["network"] = {{"n_blocks", cfg.network.n_blocks},
                  {"width", cfg.network.width},
                  {"kernel_size", cfg.network.kernel_size},
                  {"dropout_p", cfg.network.dropout_p}};
  j["adam"] = {{"learning_rate", cfg.adam.learning_rate},
               {"beta1", cfg.adam.beta1},
               {"beta2", cfg.adam.beta2},
               {"epsilon", cfg.adam.epsilon}};
  j["method_params"] = {
      {"mc_passes", cfg.method_params.mc_passes},
      {"ensemble_size", cfg.method_params.ensemble_size},
      {"posterior_samples", cfg.method_params.posterior_samples},
      {"prior_std", cfg.method_params.prior_std},
      {"init_posterior_scale", cfg.method_params.init_posterior_scale},
      {"gp_noise_grid", cfg.method_params.gp.noise_grid},
      {"gp_holdout_fraction", cfg.method_params.gp.holdout_fraction},
      {"gp_max_train", cfg.method_params.gp.max_train},
      {"gp_jitter", cfg.method_params.gp.jitter}};
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  if (j.contains("method")) {
    cfg.method = uq_method_from_string(get_field<std::string>(j, "method", ""));
  }
  cfg.physics_on = get_field(j, "physics_on", cfg.physics_on);
  if (j.contains("weights")) {
    const json& w = j.at("weights");
    cfg.weights.lambda_data =
        get_field(w, "lambda_data", cfg.weights.lambda_data);
    cfg.weights.lambda_kk = get_field(w, "lambda_kk", cfg.weights.lambda_kk);
    cfg.weights.lambda_smooth =
        get_field(w, "lambda_smooth", cfg.weights.lambda_smooth);
  }
  cfg.epochs = get_field(j, "epochs", cfg.epochs);
  cfg.batch_size = get_field(j, "batch_size", cfg.batch_size);
  cfg.seed = get_field(j, "seed", cfg.seed);
  if (j.contains("network")) {
    const json& n = j.at("network");
    cfg.network.n_blocks = get_field(n, "n_blocks", cfg.network.n_blocks);
    cfg.network.width = get_field(n, "width", cfg.network.width);
    cfg.network.kernel_size =
        get_field(n, "kernel_size", cfg.network.kernel_size);
    cfg.network.dropout_p = get_field(n, "dropout_p", cfg.network.dropout_p);
  }
  if (j.contains("adam")) {
    const json& a = j.at("adam");
    cfg.adam.learning_rate =
        get_field(a, "learning_rate", cfg.adam.learning_rate);
    cfg.adam.beta1 = get_field(a, "beta1", cfg.adam.beta1);
    cfg.adam.beta2 = get_field(a, "beta2", cfg.adam.beta2);
    cfg.adam.epsilon = get_field(a, "epsilon", cfg.adam.epsilon);
  }
  if (j.contains("method_params")) {
    const json& m = j.at("method_params");
    auto& mp = cfg.method_params;
    mp.mc_passes = get_field(m, "mc_passes", mp.mc_passes);
    mp.ensemble_size = get_field(m, "ensemble_size", mp.ensemble_size);
    mp.posterior_samples =
        get_field(m, "posterior_samples", mp.posterior_samples);
    mp.prior_std = get_field(m, "prior_std", mp.prior_std);
    mp.init_posterior_scale =
        get_field(m, "init_posterior_scale", mp.init_posterior_scale);
    mp.gp.noise_grid = get_field(m, "gp_noise_grid", mp.gp.noise_grid);
    mp.gp.holdout_fraction =
        get_field(m, "gp_holdout_fraction", mp.gp.holdout_fraction);
    mp.gp.max_train =
        static_cast<Index>(get_field<std::int64_t>(m, "gp_max_train",
                                                   mp.gp.max_train));
    mp.gp.jitter = get_field(m, "gp_jitter", mp.gp.jitter);
  }
  return cfg;
}

json experiment_config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["n_channels"] = cfg.n_channels;
  j["n_pairs"] = cfg.n_pairs;
  j["train_fraction"] = cfg.train_fraction;
  j["synth"] = synth_config_to_json(cfg.synth);
  j["train"] = train_config_to_json(cfg.train);
  j["metrics"] = {{"levels", cfg.metrics.levels}};
  json methods = json::array();
  for (UqMethod m : cfg.benchmark.methods) methods.push_back(to_string(m));
  j["benchmark"] = {{"methods", methods},
                    {"without_physics", cfg.benchmark.without_physics},
                    {"with_physics", cfg.benchmark.with_physics},
                    {"replicates", cfg.benchmark.replicates}};
  j["output_dir"] = cfg.output_dir;
  return j;
}

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.n_channels = static_cast<Index>(
      get_field<std::int64_t>(j, "n_channels", cfg.n_channels));
  cfg.n_pairs =
      static_cast<Index>(get_field<std::int64_t>(j, "n_pairs", cfg.n_pairs));
  cfg.train_fraction = get_field(j, "train_fraction", cfg.train_fraction);
  if (j.contains("synth")) cfg.synth = synth_config_from_json(j.at("synth"));
  if (j.contains("train")) cfg.train = train_config_from_json(j.at("train"));
  if (j.contains("metrics")) {
    cfg.metrics.levels = get_field(j.at("metrics"), "levels",
                                   cfg.metrics.levels);
  }
  if (j.contains("benchmark")) {
    const json& b = j.at("benchmark");
    if (b.contains("methods")) {
      cfg.benchmark.methods.clear();
      for (const auto& name : b.at("methods")) {
        cfg.benchmark.methods.push_back(
            uq_method_from_string(name.get<std::string>()));
      }
    }
    cfg.benchmark.without_physics =
        get_field(b, "without_physics", cfg.benchmark.without_physics);
    cfg.benchmark.with_physics =
        get_field(b, "with_physics", cfg.benchmark.with_physics);
    cfg.benchmark.replicates =
        get_field(b, "replicates", cfg.benchmark.replicates);
  }
  cfg.output_dir = get_field<std::string>(j, "output_dir", cfg.output_dir);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  ExperimentConfig cfg = experiment_config_from_json(j);
  cfg.validate();
  return cfg;
}

}  // namespace carskit
