#include "carskit/cli_commands.hpp"
#include "carskit/common.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

// CLI11 stores into plain fields; empty string means "not given" for paths,
// and flags carry explicit presence via ->count().
struct OptionalFlags {
  std::string method;
  int epochs = -1;
  int batch_size = -1;
  long long seed = -1;
  int replicates = -1;
  int max_figures = -1;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "carskit: CARS-to-Raman reconstruction with physics-informed "
      "uncertainty quantification"};
  app.require_subcommand(1);

  carskit::SynthArgs synth_args;
  carskit::TrainArgs train_args;
  carskit::EvalArgs eval_args;
  carskit::BenchmarkArgs bench_args;
  carskit::PlotArgs plot_args;
  OptionalFlags flags;
  long long synth_n = -1, synth_channels = -1, synth_seed = -1;
  bool physics_on = false, physics_off = false;
  std::string bench_out, bench_dataset;

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--config", synth_args.config_path, "JSON config file");
  synth->add_option("--out", synth_args.out_path, "output dataset file")
      ->required();
  synth->add_option("--n", synth_n, "number of pairs");
  synth->add_option("--channels", synth_channels, "grid length");
  synth->add_option("--seed", synth_seed, "generation seed");

  auto* train = app.add_subcommand("train", "train one (method, physics) cell");
  train->add_option("--config", train_args.config_path, "JSON config file");
  train->add_option("--dataset", train_args.dataset_path, "dataset file")
      ->required();
  train->add_option("--out", train_args.out_path, "output checkpoint")
      ->required();
  train->add_option("--method", flags.method,
                    "gp|mc_dropout|deep_ensemble|full_bnn|partial_bnn");
  train->add_flag("--physics", physics_on, "enable physics losses");
  train->add_flag("--no-physics", physics_off, "disable physics losses");
  train->add_option("--epochs", flags.epochs, "training epochs");
  train->add_option("--batch-size", flags.batch_size, "batch size");
  train->add_option("--seed", flags.seed, "training seed");

  auto* eval = app.add_subcommand("eval", "score a checkpoint");
  eval->add_option("--checkpoint", eval_args.checkpoint_path, "checkpoint")
      ->required();
  eval->add_option("--data", eval_args.data_path,
                   "dataset file or directory of two-column spectra")
      ->required();
  eval->add_option("--out", eval_args.out_dir, "output directory")->required();
  eval->add_option("--config", eval_args.config_path, "JSON config file");

  auto* bench = app.add_subcommand("benchmark", "run the comparison grid");
  bench->add_option("--config", bench_args.config_path, "JSON config file")
      ->required();
  bench->add_option("--out", bench_out, "output CSV path");
  bench->add_option("--dataset", bench_dataset, "reuse a dataset file");
  bench->add_option("--replicates", flags.replicates, "replicates per cell");

  auto* plot = app.add_subcommand("plot", "emit SVG reconstruction figures");
  plot->add_option("--csv", plot_args.csv_path, "per-spectrum CSV from eval")
      ->required();
  plot->add_option("--out", plot_args.out_dir, "output directory")->required();
  plot->add_option("--max-figures", flags.max_figures, "figure count limit");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      if (synth_n >= 0) synth_args.n_pairs = synth_n;
      if (synth_channels >= 0) synth_args.n_channels = synth_channels;
      if (synth_seed >= 0) {
        synth_args.seed = static_cast<std::uint64_t>(synth_seed);
      }
      return carskit::cmd_synth(synth_args);
    }
    if (train->parsed()) {
      if (!flags.method.empty()) train_args.method = flags.method;
      if (physics_on && physics_off) {
        throw carskit::ConfigError("--physics and --no-physics conflict");
      }
      if (physics_on) train_args.physics = true;
      if (physics_off) train_args.physics = false;
      if (flags.epochs >= 0) train_args.epochs = flags.epochs;
      if (flags.batch_size > 0) train_args.batch_size = flags.batch_size;
      if (flags.seed >= 0) {
        train_args.seed = static_cast<std::uint64_t>(flags.seed);
      }
      return carskit::cmd_train(train_args);
    }
    if (eval->parsed()) return carskit::cmd_eval(eval_args);
    if (bench->parsed()) {
      if (!bench_out.empty()) bench_args.out_csv = bench_out;
      if (!bench_dataset.empty()) bench_args.dataset_path = bench_dataset;
      if (flags.replicates > 0) bench_args.replicates = flags.replicates;
      return carskit::cmd_benchmark(bench_args);
    }
    if (plot->parsed()) {
      if (flags.max_figures > 0) plot_args.max_figures = flags.max_figures;
      return carskit::cmd_plot(plot_args);
    }
  } catch (const carskit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return carskit::ConfigError::exit_code;
  } catch (const carskit::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return carskit::DataError::exit_code;
  } catch (const carskit::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return carskit::NumericError::exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
