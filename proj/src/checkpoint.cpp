#include "carskit/checkpoint.hpp"

#include "carskit/network.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

namespace carskit {

namespace {

using nlohmann::json;

void write_f64(std::ostream& out, const double* data, Index count) {
  std::vector<unsigned char> buf(static_cast<size_t>(count) * 8);
  for (Index i = 0; i < count; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, data + i, 8);
    if constexpr (std::endian::native == std::endian::big) {
      bits = __builtin_bswap64(bits);
    }
    std::memcpy(buf.data() + static_cast<size_t>(i) * 8, &bits, 8);
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
}

Array read_f64(std::istream& in, Index count, const std::string& path) {
  std::vector<unsigned char> buf(static_cast<size_t>(count) * 8);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size()));
  if (!in) throw DataError("checkpoint truncated: " + path);
  Array values(count);
  for (Index i = 0; i < count; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, buf.data() + static_cast<size_t>(i) * 8, 8);
    if constexpr (std::endian::native == std::endian::big) {
      bits = __builtin_bswap64(bits);
    }
    std::memcpy(&values[i], &bits, 8);
  }
  return values;
}

json network_to_json(const NetworkConfig& n) {
  return {{"n_blocks", n.n_blocks},
          {"width", n.width},
          {"kernel_size", n.kernel_size},
          {"dropout_p", n.dropout_p},
          {"variance_head", n.variance_head}};
}

NetworkConfig network_from_json(const json& j) {
  NetworkConfig n;
  n.n_blocks = j.at("n_blocks").get<int>();
  n.width = j.at("width").get<int>();
  n.kernel_size = j.at("kernel_size").get<int>();
  n.dropout_p = j.at("dropout_p").get<double>();
  n.variance_head = j.at("variance_head").get<bool>();
  return n;
}

json method_params_to_json(const MethodParams& m) {
  return {{"mc_passes", m.mc_passes},
          {"ensemble_size", m.ensemble_size},
          {"posterior_samples", m.posterior_samples},
          {"prior_std", m.prior_std},
          {"init_posterior_scale", m.init_posterior_scale},
          {"gp_noise_grid", m.gp.noise_grid},
          {"gp_holdout_fraction", m.gp.holdout_fraction},
          {"gp_max_train", m.gp.max_train},
          {"gp_jitter", m.gp.jitter}};
}

MethodParams method_params_from_json(const json& j) {
  MethodParams m;
  m.mc_passes = j.at("mc_passes").get<int>();
  m.ensemble_size = j.at("ensemble_size").get<int>();
  m.posterior_samples = j.at("posterior_samples").get<int>();
  m.prior_std = j.at("prior_std").get<double>();
  m.init_posterior_scale = j.at("init_posterior_scale").get<double>();
  m.gp.noise_grid = j.at("gp_noise_grid").get<std::vector<double>>();
  m.gp.holdout_fraction = j.at("gp_holdout_fraction").get<double>();
  m.gp.max_train = j.at("gp_max_train").get<Index>();
  m.gp.jitter = j.at("gp_jitter").get<double>();
  return m;
}

struct BlobRef {
  std::string name;
  const double* data;
  Index count;
};

}  // namespace

void save_predictor(const std::string& path, const TrainedPredictor& predictor,
                    const json& metric_of_record) {
  std::vector<BlobRef> blobs;
  Eigen::MatrixXd gp_inputs, gp_alpha, gp_chol;
  Array gp_y_mean;

  if (predictor.method == UqMethod::kGpBaseline) {
    gp_inputs = predictor.gp.train_inputs;
    gp_alpha = predictor.gp.alpha;
    gp_chol = predictor.gp.chol_lower;
    gp_y_mean = predictor.gp.y_mean;
    blobs.push_back({"gp/train_inputs", gp_inputs.data(), gp_inputs.size()});
    blobs.push_back({"gp/alpha", gp_alpha.data(), gp_alpha.size()});
    blobs.push_back({"gp/chol_lower", gp_chol.data(), gp_chol.size()});
    blobs.push_back({"gp/y_mean", gp_y_mean.data(), gp_y_mean.size()});
  } else {
    const Model model(predictor.network);
    for (size_t m = 0; m < predictor.members.size(); ++m) {
      for (size_t i = 0; i < model.defs().size(); ++i) {
        blobs.push_back({"member" + std::to_string(m) + "/" +
                             model.defs()[i].name,
                         predictor.members[m][i].data(),
                         predictor.members[m][i].size()});
      }
    }
    if (!predictor.mu.empty()) {
      for (size_t i = 0; i < model.defs().size(); ++i) {
        blobs.push_back({"mu/" + model.defs()[i].name,
                         predictor.mu[i].data(), predictor.mu[i].size()});
      }
      for (int idx : predictor.variational_indices) {
        const auto& rho = predictor.rho[static_cast<size_t>(idx)];
        blobs.push_back({"rho/" + model.defs()[static_cast<size_t>(idx)].name,
                         rho.data(), rho.size()});
      }
    }
  }

  json manifest;
  manifest["format"] = "carskit-checkpoint";
  manifest["version"] = 1;
  manifest["method"] = to_string(predictor.method);
  manifest["physics_on"] = predictor.physics_on;
  manifest["network"] = network_to_json(predictor.network);
  manifest["method_params"] = method_params_to_json(predictor.method_params);
  manifest["n_channels"] = predictor.n_channels;
  manifest["seed"] = predictor.seed;
  manifest["mc_log_var"] = predictor.mc_log_var;
  manifest["n_members"] = predictor.members.size();
  manifest["variational_indices"] = predictor.variational_indices;
  manifest["metric_of_record"] = metric_of_record;
  if (predictor.method == UqMethod::kGpBaseline) {
    manifest["gp"] = {{"lengthscale", predictor.gp.lengthscale},
                      {"signal_var", predictor.gp.signal_var},
                      {"noise_var", predictor.gp.noise_var},
                      {"n_train", predictor.gp.train_inputs.rows()}};
  }
  json blob_index = json::array();
  for (const auto& blob : blobs) {
    blob_index.push_back({{"name", blob.name}, {"count", blob.count}});
  }
  manifest["blobs"] = blob_index;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out << manifest.dump() << "\n";
  for (const auto& blob : blobs) write_f64(out, blob.data, blob.count);
  if (!out) throw DataError("checkpoint write failed: " + path);
}

json read_checkpoint_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("checkpoint missing manifest: " + path);
  }
  try {
    json manifest = json::parse(line);
    if (manifest.value("format", "") != std::string("carskit-checkpoint")) {
      throw DataError("not a checkpoint file: " + path);
    }
    return manifest;
  } catch (const json::exception& e) {
    throw DataError("checkpoint manifest parse error: " +
                    std::string(e.what()));
  }
}

TrainedPredictor load_predictor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("checkpoint missing manifest: " + path);
  }
  json manifest;
  try {
    manifest = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError("checkpoint manifest parse error: " +
                    std::string(e.what()));
  }
  if (manifest.value("format", "") != std::string("carskit-checkpoint")) {
    throw DataError("not a checkpoint file: " + path);
  }

  TrainedPredictor predictor;
  predictor.method =
      uq_method_from_string(manifest.at("method").get<std::string>());
  predictor.physics_on = manifest.at("physics_on").get<bool>();
  predictor.network = network_from_json(manifest.at("network"));
  predictor.method_params =
      method_params_from_json(manifest.at("method_params"));
  predictor.n_channels = manifest.at("n_channels").get<Index>();
  predictor.seed = manifest.at("seed").get<std::uint64_t>();
  predictor.mc_log_var = manifest.at("mc_log_var").get<double>();
  predictor.variational_indices =
      manifest.at("variational_indices").get<std::vector<int>>();

  std::map<std::string, Array> blob_map;
  for (const auto& entry : manifest.at("blobs")) {
    const std::string name = entry.at("name").get<std::string>();
    const Index count = entry.at("count").get<Index>();
    blob_map[name] = read_f64(in, count, path);
  }

  if (predictor.method == UqMethod::kGpBaseline) {
    const json& gp = manifest.at("gp");
    predictor.gp.lengthscale = gp.at("lengthscale").get<double>();
    predictor.gp.signal_var = gp.at("signal_var").get<double>();
    predictor.gp.noise_var = gp.at("noise_var").get<double>();
    const Index m = gp.at("n_train").get<Index>();
    const Index l = predictor.n_channels;
    auto fetch = [&](const std::string& name) -> Array& {
      auto it = blob_map.find(name);
      if (it == blob_map.end()) {
        throw DataError("checkpoint missing blob: " + name);
      }
      return it->second;
    };
    predictor.gp.train_inputs =
        Eigen::Map<const Eigen::MatrixXd>(fetch("gp/train_inputs").data(), m,
                                          l);
    predictor.gp.alpha =
        Eigen::Map<const Eigen::MatrixXd>(fetch("gp/alpha").data(), m, l);
    predictor.gp.chol_lower =
        Eigen::Map<const Eigen::MatrixXd>(fetch("gp/chol_lower").data(), m, m);
    predictor.gp.y_mean = fetch("gp/y_mean");
    return predictor;
  }

  const Model model(predictor.network);
  auto fetch = [&](const std::string& name) -> Array {
    auto it = blob_map.find(name);
    if (it == blob_map.end()) {
      throw DataError("checkpoint missing blob: " + name);
    }
    return it->second;
  };
  const size_t n_members = manifest.at("n_members").get<size_t>();
  for (size_t m = 0; m < n_members; ++m) {
    ParamStore store;
    for (const auto& def : model.defs()) {
      store.push_back(fetch("member" + std::to_string(m) + "/" + def.name));
    }
    predictor.members.push_back(std::move(store));
  }
  if (!predictor.variational_indices.empty()) {
    for (const auto& def : model.defs()) {
      predictor.mu.push_back(fetch("mu/" + def.name));
    }
    predictor.rho.assign(model.defs().size(), Array());
    for (int idx : predictor.variational_indices) {
      predictor.rho[static_cast<size_t>(idx)] =
          fetch("rho/" + model.defs()[static_cast<size_t>(idx)].name);
    }
  }
  return predictor;
}

}  // namespace carskit
