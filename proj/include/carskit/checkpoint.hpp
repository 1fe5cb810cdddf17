#pragma once

#include "carskit/uq.hpp"

#include <json.hpp>

#include <string>

namespace carskit {

// Checkpoint file: one JSON manifest line (method tag, architecture,
// method params, metric of record, named blob index), then raw
// little-endian float64 blobs concatenated in index order. Parameters
// round-trip exactly.
void save_predictor(const std::string& path, const TrainedPredictor& predictor,
                    const nlohmann::json& metric_of_record);

TrainedPredictor load_predictor(const std::string& path);

nlohmann::json read_checkpoint_manifest(const std::string& path);

}  // namespace carskit
