#include "carskit/cli_commands.hpp"

#include "carskit/benchmark.hpp"
#include "carskit/checkpoint.hpp"
#include "carskit/config.hpp"
#include "carskit/dataset_io.hpp"
#include "carskit/ingest.hpp"
#include "carskit/metrics.hpp"
#include "carskit/svg_plot.hpp"
#include "carskit/uq.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

namespace carskit {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

ExperimentConfig load_or_default(const std::string& config_path) {
  if (config_path.empty()) {
    ExperimentConfig cfg;
    cfg.validate();
    return cfg;
  }
  return load_experiment_config(config_path);
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

void write_training_log_csv(const std::string& path, const TrainLog& log) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write training log: " + path);
  out << "epoch,data_term,kk_term,smooth_term,total,wall_ms\n";
  for (const auto& row : log.epochs) {
    out << row.epoch << "," << num(row.mean_loss.data_term) << ","
        << num(row.mean_loss.kk_term) << "," << num(row.mean_loss.smooth_term)
        << "," << num(row.mean_loss.total) << "," << num(row.wall_ms) << "\n";
  }
}

struct EvalRecord {
  std::string name;
  Spectrum cars;
  Spectrum raman_truth;  // empty for real spectra
  Spectrum nrb_truth;    // empty for real spectra
  ComponentPrediction pred;
};

void write_per_spectrum_csv(const std::string& path, const Array& omega,
                            const std::vector<EvalRecord>& records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write per-spectrum dump: " + path);
  out << "spectrum,name,channel,omega,cars,raman_true,nrb_true,pred_mean,"
         "pred_var,pred_nrb\n";
  for (size_t s = 0; s < records.size(); ++s) {
    const auto& rec = records[s];
    const Index n = rec.cars.size();
    for (Index i = 0; i < n; ++i) {
      out << s << "," << rec.name << "," << i << "," << num(omega[i]) << ","
          << num(rec.cars[i]) << ",";
      if (rec.raman_truth.size() == n) out << num(rec.raman_truth[i]);
      else out << "nan";
      out << ",";
      if (rec.nrb_truth.size() == n) out << num(rec.nrb_truth[i]);
      else out << "nan";
      out << "," << num(rec.pred.raman.mean[i]) << ","
          << num(rec.pred.raman.variance[i]) << ",";
      if (rec.pred.nrb_mean.size() == n) out << num(rec.pred.nrb_mean[i]);
      else out << "nan";
      out << "\n";
    }
  }
}

}  // namespace

int cmd_synth(const SynthArgs& args) {
  ExperimentConfig cfg = load_or_default(args.config_path);
  if (args.n_pairs) cfg.n_pairs = *args.n_pairs;
  if (args.n_channels) cfg.n_channels = *args.n_channels;
  if (args.seed) cfg.synth.seed = *args.seed;
  cfg.validate();
  if (args.out_path.empty()) throw ConfigError("synth: output path required");

  const WavenumberGrid grid = make_grid(cfg.n_channels);
  DatasetFile data;
  data.grid = grid;
  data.pairs = generate_dataset(cfg.n_pairs, cfg.synth, grid);
  data.split = split_indices(cfg.n_pairs, cfg.synth.seed, cfg.train_fraction);
  data.seed = cfg.synth.seed;
  data.config_echo = {{"n_channels", cfg.n_channels},
                      {"n_pairs", cfg.n_pairs},
                      {"train_fraction", cfg.train_fraction},
                      {"synth", synth_config_to_json(cfg.synth)}};
  ensure_parent_dir(args.out_path);
  write_dataset(args.out_path, data);
  std::cout << "wrote " << data.pairs.size() << " pairs ("
            << data.split.train.size() << " train / " << data.split.eval.size()
            << " eval) to " << args.out_path << "\n";
  return 0;
}

int cmd_train(const TrainArgs& args) {
  ExperimentConfig cfg = load_or_default(args.config_path);
  if (args.method) cfg.train.method = uq_method_from_string(*args.method);
  if (args.physics) cfg.train.physics_on = *args.physics;
  if (args.epochs) cfg.train.epochs = *args.epochs;
  if (args.batch_size) cfg.train.batch_size = *args.batch_size;
  if (args.seed) cfg.train.seed = *args.seed;
  cfg.train.validate();
  if (args.out_path.empty()) throw ConfigError("train: output path required");

  const DatasetFile data = read_dataset(args.dataset_path);
  std::vector<SpectralPair> train_pairs;
  for (Index i : data.split.train) {
    train_pairs.push_back(data.pairs.at(static_cast<size_t>(i)));
  }
  if (train_pairs.empty()) throw DataError("train: dataset has no train split");

  TrainLog log;
  const TrainedPredictor predictor = train(cfg.train, train_pairs, &log);

  json metric_of_record;
  metric_of_record["epochs"] = cfg.train.epochs;
  metric_of_record["aborted_non_finite"] = log.aborted_non_finite;
  if (!log.epochs.empty()) {
    const auto& last = log.epochs.back().mean_loss;
    metric_of_record["final_loss"] = {{"data_term", last.data_term},
                                      {"kk_term", last.kk_term},
                                      {"smooth_term", last.smooth_term},
                                      {"total", last.total}};
  }
  ensure_parent_dir(args.out_path);
  save_predictor(args.out_path, predictor, metric_of_record);
  write_training_log_csv(args.out_path + ".log.csv", log);
  std::cout << "trained " << to_string(cfg.train.method)
            << (cfg.train.physics_on ? " (physics on)" : " (physics off)")
            << " on " << train_pairs.size() << " spectra -> " << args.out_path
            << "\n";
  return 0;
}

int cmd_eval(const EvalArgs& args) {
  ExperimentConfig cfg = load_or_default(args.config_path);
  const TrainedPredictor predictor = load_predictor(args.checkpoint_path);
  const WavenumberGrid grid = make_grid(predictor.n_channels);

  std::vector<EvalRecord> records;
  bool has_truth = false;
  if (fs::is_directory(args.data_path)) {
    for (auto& [name, spectrum] : load_spectra_dir(args.data_path, grid)) {
      EvalRecord rec;
      rec.name = name;
      rec.cars = spectrum;
      rec.pred = predict_components(predictor, rec.cars);
      records.push_back(std::move(rec));
    }
  } else {
    const DatasetFile data = read_dataset(args.data_path);
    if (data.grid.n_channels != predictor.n_channels) {
      throw DataError("eval: dataset grid does not match checkpoint grid");
    }
    if (data.split.eval.empty()) throw DataError("eval: empty eval split");
    has_truth = true;
    for (Index i : data.split.eval) {
      const auto& pair = data.pairs.at(static_cast<size_t>(i));
      EvalRecord rec;
      rec.name = "pair" + std::to_string(i);
      rec.cars = pair.cars;
      rec.raman_truth = pair.raman_true;
      rec.nrb_truth = pair.nrb_true;
      rec.pred = predict_components(predictor, rec.cars);
      records.push_back(std::move(rec));
    }
  }

  fs::create_directories(args.out_dir);
  json metrics_json;
  metrics_json["checkpoint"] = args.checkpoint_path;
  metrics_json["method"] = to_string(predictor.method);
  metrics_json["physics_on"] = predictor.physics_on;
  metrics_json["n_spectra"] = records.size();
  if (has_truth) {
    std::vector<PredictiveDistribution> preds;
    std::vector<Spectrum> truth;
    for (const auto& rec : records) {
      preds.push_back(rec.pred.raman);
      truth.push_back(rec.raman_truth);
    }
    const double ll = avg_log_likelihood(preds, truth);
    const auto [ece_value, curve] = ece(preds, truth, cfg.metrics.levels);
    const double rmse_value = rmse(preds, truth);
    metrics_json["ll"] = ll;
    metrics_json["ece"] = ece_value;
    metrics_json["rmse"] = rmse_value;

    std::vector<double> per_ll, per_rmse;
    for (const auto& rec : records) {
      per_ll.push_back(spectrum_log_likelihood(rec.pred.raman, rec.raman_truth));
      per_rmse.push_back(spectrum_rmse(rec.pred.raman, rec.raman_truth));
    }
    auto mean_std = [](const std::vector<double>& v) {
      double m = 0.0;
      for (double x : v) m += x;
      m /= static_cast<double>(v.size());
      double s = 0.0;
      for (double x : v) s += (x - m) * (x - m);
      s = v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0;
      return std::pair<double, double>(m, s);
    };
    const auto [ll_m, ll_s] = mean_std(per_ll);
    const auto [rm_m, rm_s] = mean_std(per_rmse);
    metrics_json["per_spectrum"] = {{"ll_mean", ll_m},
                                    {"ll_std", ll_s},
                                    {"rmse_mean", rm_m},
                                    {"rmse_std", rm_s}};

    std::ofstream curve_out(args.out_dir + "/calibration.csv");
    curve_out << "level,coverage\n";
    for (size_t j = 0; j < curve.levels.size(); ++j) {
      curve_out << num(curve.levels[j]) << ","
                << num(curve.empirical_coverage[j]) << "\n";
    }
  } else {
    metrics_json["ll"] = nullptr;
    metrics_json["ece"] = nullptr;
    metrics_json["rmse"] = nullptr;
    metrics_json["note"] =
        "no ground-truth labels; zero-shot predictions only";
  }

  std::ofstream mout(args.out_dir + "/metrics.json");
  if (!mout) throw DataError("cannot write metrics.json");
  mout << metrics_json.dump(2) << "\n";

  Array omega = grid.omega;
  write_per_spectrum_csv(args.out_dir + "/per_spectrum.csv", omega, records);
  std::cout << "evaluated " << records.size() << " spectra -> " << args.out_dir
            << "\n";
  return 0;
}

int cmd_benchmark(const BenchmarkArgs& args) {
  ExperimentConfig cfg = load_experiment_config(args.config_path);
  if (args.replicates) cfg.benchmark.replicates = *args.replicates;
  cfg.validate();

  DatasetFile data;
  if (args.dataset_path) {
    data = read_dataset(*args.dataset_path);
  } else {
    const WavenumberGrid grid = make_grid(cfg.n_channels);
    data.grid = grid;
    data.pairs = generate_dataset(cfg.n_pairs, cfg.synth, grid);
    data.split =
        split_indices(cfg.n_pairs, cfg.synth.seed, cfg.train_fraction);
    data.seed = cfg.synth.seed;
  }

  const BenchmarkReport report = run_benchmark(cfg, data);

  const std::string out_csv =
      args.out_csv ? *args.out_csv : cfg.output_dir + "/benchmark.csv";
  ensure_parent_dir(out_csv);
  std::ofstream out(out_csv);
  if (!out) throw DataError("cannot write benchmark csv: " + out_csv);
  write_benchmark_csv(out, report);
  write_benchmark_csv(std::cout, report);
  std::cout << "benchmark written to " << out_csv << "\n";
  return 0;
}

int cmd_plot(const PlotArgs& args) {
  std::ifstream in(args.csv_path);
  if (!in) throw DataError("cannot open per-spectrum csv: " + args.csv_path);
  std::string header;
  if (!std::getline(in, header)) throw DataError("plot: empty csv");
  const std::string expected =
      "spectrum,name,channel,omega,cars,raman_true,nrb_true,pred_mean,"
      "pred_var,pred_nrb";
  if (header != expected) {
    throw DataError("plot: unexpected csv columns; need '" + expected + "'");
  }

  struct Row {
    std::string name;
    std::vector<double> omega, cars, raman_true, nrb_true, pred_mean, pred_var,
        pred_nrb;
  };
  std::map<long, Row> rows;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 10) {
      throw DataError("plot: malformed row at line " + std::to_string(line_no));
    }
    const long idx = std::stol(fields[0]);
    Row& row = rows[idx];
    row.name = fields[1];
    row.omega.push_back(std::stod(fields[3]));
    row.cars.push_back(std::stod(fields[4]));
    row.raman_true.push_back(std::stod(fields[5]));
    row.nrb_true.push_back(std::stod(fields[6]));
    row.pred_mean.push_back(std::stod(fields[7]));
    row.pred_var.push_back(std::stod(fields[8]));
    row.pred_nrb.push_back(std::stod(fields[9]));
  }
  if (rows.empty()) throw DataError("plot: no rows in csv");

  fs::create_directories(args.out_dir);
  int emitted = 0;
  for (const auto& [idx, row] : rows) {
    if (args.max_figures && emitted >= *args.max_figures) break;
    const Index n = static_cast<Index>(row.omega.size());
    auto to_array = [n](const std::vector<double>& v) {
      return Array(Eigen::Map<const Array>(v.data(), n));
    };
    SpectrumFigure fig;
    fig.omega = to_array(row.omega);
    fig.cars = to_array(row.cars);
    fig.pred_mean = to_array(row.pred_mean);
    fig.pred_std = to_array(row.pred_var).max(0.0).sqrt();
    const Array truth = to_array(row.raman_true);
    if (truth.isFinite().all()) fig.raman_true = truth;
    const Array nrb = to_array(row.pred_nrb);
    if (nrb.isFinite().all()) fig.pred_nrb = nrb;
    fig.title = row.name;
    const std::string out_path =
        args.out_dir + "/spectrum_" + std::to_string(idx) + ".svg";
    std::ofstream svg(out_path);
    if (!svg) throw DataError("cannot write figure: " + out_path);
    svg << render_figure_svg(fig);
    ++emitted;
  }
  std::cout << "wrote " << emitted << " figures to " << args.out_dir << "\n";
  return 0;
}

}  // namespace carskit
