#pragma once

#include "carskit/metrics.hpp"
#include "carskit/synth.hpp"
#include "carskit/uq.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace carskit {

struct MetricsConfig {
  std::vector<double> levels = default_levels();
};

struct BenchmarkConfig {
  std::vector<UqMethod> methods{UqMethod::kGpBaseline, UqMethod::kMcDropout,
                                UqMethod::kDeepEnsemble, UqMethod::kFullBnn,
                                UqMethod::kPartialBnn};
  bool without_physics = true;
  bool with_physics = true;
  int replicates = 10;
};

struct ExperimentConfig {
  Index n_channels = 640;
  Index n_pairs = 2000;
  double train_fraction = 0.8;
  SynthConfig synth{};
  TrainConfig train{};
  MetricsConfig metrics{};
  BenchmarkConfig benchmark{};
  std::string output_dir = "out";

  void validate() const;
};

nlohmann::json synth_config_to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const nlohmann::json& j);

nlohmann::json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

// Parses a JSON config file; all fields are optional and default as in the
// struct definitions. Errors name the offending field.
ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace carskit
