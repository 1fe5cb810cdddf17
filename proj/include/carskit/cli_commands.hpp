#pragma once

#include "carskit/common.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace carskit {

// Command implementations shared by the CLI binary and the test suites.
// Flags override their config-file counterparts. All commands throw
// ConfigError / DataError / NumericError; the binary maps those to exit
// codes 2 / 3 / 4.

struct SynthArgs {
  std::string config_path;  // optional; defaults apply when empty
  std::string out_path;
  std::optional<Index> n_pairs;
  std::optional<Index> n_channels;
  std::optional<std::uint64_t> seed;
};
int cmd_synth(const SynthArgs& args);

struct TrainArgs {
  std::string config_path;
  std::string dataset_path;
  std::string out_path;
  std::optional<std::string> method;
  std::optional<bool> physics;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<std::uint64_t> seed;
};
int cmd_train(const TrainArgs& args);

struct EvalArgs {
  std::string checkpoint_path;
  std::string data_path;  // dataset file or directory of real spectra
  std::string out_dir;
  std::string config_path;  // optional; metric levels
};
int cmd_eval(const EvalArgs& args);

struct BenchmarkArgs {
  std::string config_path;
  std::optional<std::string> out_csv;
  std::optional<std::string> dataset_path;  // reuse an existing dataset file
  std::optional<int> replicates;
};
int cmd_benchmark(const BenchmarkArgs& args);

struct PlotArgs {
  std::string csv_path;  // per-spectrum dump from cmd_eval
  std::string out_dir;
  std::optional<int> max_figures;
};
int cmd_plot(const PlotArgs& args);

}  // namespace carskit
