#include "carskit/benchmark.hpp"

#include "carskit/metrics.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <ostream>
#include <thread>

namespace carskit {

namespace {

struct CellResult {
  bool ok = false;
  double ll = 0.0, ece = 0.0, rmse_v = 0.0, wall_s = 0.0;
  std::string error;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

int benchmark_worker_count() {
  if (const char* env = std::getenv("CARSKIT_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

BenchmarkReport run_benchmark(const ExperimentConfig& config,
                              const DatasetFile& data) {
  config.validate();
  if (data.split.train.empty() || data.split.eval.empty()) {
    throw DataError("benchmark: dataset has no train/eval split");
  }

  std::vector<SpectralPair> train_pairs;
  for (Index i : data.split.train) {
    train_pairs.push_back(data.pairs.at(static_cast<size_t>(i)));
  }
  std::vector<Spectrum> eval_inputs;
  std::vector<Spectrum> eval_truth;
  for (Index i : data.split.eval) {
    eval_inputs.push_back(data.pairs.at(static_cast<size_t>(i)).cars);
    eval_truth.push_back(data.pairs.at(static_cast<size_t>(i)).raman_true);
  }

  BenchmarkReport report;
  for (UqMethod method : config.benchmark.methods) {
    if (method == UqMethod::kGpBaseline) {
      // GP has no physics-on variant; one row.
      BenchmarkRow row;
      row.method = method;
      row.physics_on = false;
      report.rows.push_back(row);
      continue;
    }
    if (config.benchmark.without_physics) {
      BenchmarkRow row;
      row.method = method;
      row.physics_on = false;
      report.rows.push_back(row);
    }
    if (config.benchmark.with_physics) {
      BenchmarkRow row;
      row.method = method;
      row.physics_on = true;
      report.rows.push_back(row);
    }
  }

  const int replicates = config.benchmark.replicates;
  for (auto& row : report.rows) row.replicates_requested = replicates;

  struct Job {
    size_t row = 0;
    int replicate = 0;
  };
  std::vector<Job> jobs;
  for (size_t r = 0; r < report.rows.size(); ++r) {
    for (int k = 0; k < replicates; ++k) jobs.push_back({r, k});
  }
  std::vector<CellResult> results(jobs.size());

  auto run_job = [&](const Job& job) -> CellResult {
    CellResult res;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const BenchmarkRow& row = report.rows[job.row];
      TrainConfig cell = config.train;
      cell.method = row.method;
      cell.physics_on = row.physics_on;
      cell.seed = config.train.seed + static_cast<std::uint64_t>(job.replicate);
      TrainedPredictor predictor = train(cell, train_pairs);
      const auto preds = predict_all(predictor, eval_inputs);
      res.ll = avg_log_likelihood(preds, eval_truth);
      res.ece = ece(preds, eval_truth, config.metrics.levels).first;
      res.rmse_v = rmse(preds, eval_truth);
      res.ok = true;
    } catch (const std::exception& e) {
      res.error = e.what();
    }
    res.wall_s = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - t0)
                     .count();
    return res;
  };

  const int n_workers =
      std::min<int>(benchmark_worker_count(), static_cast<int>(jobs.size()));
  if (n_workers <= 1) {
    for (size_t i = 0; i < jobs.size(); ++i) results[i] = run_job(jobs[i]);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(static_cast<size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
      workers.emplace_back([&]() {
        for (;;) {
          const size_t i = next.fetch_add(1);
          if (i >= jobs.size()) return;
          results[i] = run_job(jobs[i]);
        }
      });
    }
    for (auto& worker : workers) worker.join();
  }

  for (size_t i = 0; i < jobs.size(); ++i) {
    BenchmarkRow& row = report.rows[jobs[i].row];
    const CellResult& res = results[i];
    if (res.ok) {
      row.ll.push_back(res.ll);
      row.ece.push_back(res.ece);
      row.rmse.push_back(res.rmse_v);
      row.wall_s_mean += res.wall_s;
      ++row.replicates_done;
    } else if (row.error.empty()) {
      row.error = res.error;
    }
  }
  for (auto& row : report.rows) {
    if (row.replicates_done > 0) {
      row.wall_s_mean /= row.replicates_done;
      row.ll_mean = mean_of(row.ll);
      row.ll_std = sample_std(row.ll);
      row.ece_mean = mean_of(row.ece);
      row.ece_std = sample_std(row.ece);
      row.rmse_mean = mean_of(row.rmse);
      row.rmse_std = sample_std(row.rmse);
    }
  }
  return report;
}

void write_benchmark_csv(std::ostream& out, const BenchmarkReport& report) {
  out << "method,physics,replicates,ll_mean,ll_std,ece_mean,ece_std,"
         "rmse_mean,rmse_std,wall_s,error\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
  };
  for (const auto& row : report.rows) {
    out << to_string(row.method) << "," << (row.physics_on ? "on" : "off")
        << "," << row.replicates_done << "," << num(row.ll_mean) << ","
        << num(row.ll_std) << "," << num(row.ece_mean) << ","
        << num(row.ece_std) << "," << num(row.rmse_mean) << ","
        << num(row.rmse_std) << "," << num(row.wall_s_mean) << ","
        << row.error << "\n";
  }
}

}  // namespace carskit
