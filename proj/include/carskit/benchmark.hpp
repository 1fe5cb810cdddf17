#pragma once

#include "carskit/config.hpp"
#include "carskit/dataset_io.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace carskit {

struct BenchmarkRow {
  UqMethod method = UqMethod::kGpBaseline;
  bool physics_on = false;
  int replicates_requested = 0;
  int replicates_done = 0;
  double ll_mean = 0.0, ll_std = 0.0;
  double ece_mean = 0.0, ece_std = 0.0;
  double rmse_mean = 0.0, rmse_std = 0.0;
  double wall_s_mean = 0.0;
  std::string error;  // nonempty if any replicate failed

  // Per-replicate values, kept for directional checks.
  std::vector<double> ll, ece, rmse;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
};

// Worker pool size: CARSKIT_THREADS if set, else hardware concurrency.
int benchmark_worker_count();

// Runs every requested (method, physics) x replicate cell. Replicate r
// trains with seed train.seed + r on the dataset's train split and scores
// the eval split. Cells run in a worker pool; failures mark the row and do
// not abort other cells.
BenchmarkReport run_benchmark(const ExperimentConfig& config,
                              const DatasetFile& data);

void write_benchmark_csv(std::ostream& out, const BenchmarkReport& report);

}  // namespace carskit
