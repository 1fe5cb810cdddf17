#pragma once

#include "carskit/grid.hpp"
#include "carskit/synth.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace carskit {

// On-disk container: one JSON header line (version, grid, seed, config
// echo, split indices), then consecutive little-endian float32 records of
// (cars, raman_true, nrb_true) per pair. Spectra are float64 in memory;
// float32 on disk.
struct DatasetFile {
  WavenumberGrid grid;
  std::vector<SpectralPair> pairs;
  DatasetSplit split;
  std::uint64_t seed = 0;
  nlohmann::json config_echo;
};

void write_dataset(const std::string& path, const DatasetFile& data);

DatasetFile read_dataset(const std::string& path);

}  // namespace carskit
