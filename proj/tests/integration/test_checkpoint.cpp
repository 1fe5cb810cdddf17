#include "carskit/checkpoint.hpp"

#include "carskit/synth.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace carskit;

namespace {

std::vector<SpectralPair> tiny_dataset(int n, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.n_peaks_range = {1, 3};
  cfg.gamma_range = {0.01, 0.03};
  cfg.center_range = {0.2, 0.8};
  cfg.amplitude_range = {0.05, 0.5};
  cfg.noise.sigma_max = 0.0;
  cfg.seed = seed;
  return generate_dataset(n, cfg, make_grid(32));
}

TrainConfig tiny_config(UqMethod method) {
  TrainConfig cfg;
  cfg.method = method;
  cfg.epochs = 1;
  cfg.batch_size = 4;
  cfg.seed = 11;
  cfg.network.n_blocks = 1;
  cfg.network.width = 4;
  cfg.network.kernel_size = 3;
  cfg.method_params.mc_passes = 4;
  cfg.method_params.posterior_samples = 4;
  cfg.method_params.ensemble_size = 2;
  return cfg;
}

}  // namespace

TEST_CASE("checkpoints round-trip predictions bit-exactly for every method") {
  const auto data = tiny_dataset(8, 3);
  const auto dir =
      std::filesystem::temp_directory_path() / "carskit_ckpt_test";
  std::filesystem::create_directories(dir);

  for (UqMethod method :
       {UqMethod::kMcDropout, UqMethod::kDeepEnsemble, UqMethod::kFullBnn,
        UqMethod::kPartialBnn, UqMethod::kGpBaseline}) {
    CAPTURE(to_string(method));
    const TrainedPredictor trained = train(tiny_config(method), data);
    const std::string path =
        (dir / (to_string(method) + ".ckpt")).string();
    save_predictor(path, trained, {{"test", true}});
    const TrainedPredictor loaded = load_predictor(path);

    const PredictiveDistribution before = predict_dist(trained, data[0].cars);
    const PredictiveDistribution after = predict_dist(loaded, data[0].cars);
    CHECK((before.mean == after.mean).all());
    CHECK((before.variance == after.variance).all());
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("manifest carries the method tag and architecture") {
  const auto data = tiny_dataset(6, 4);
  const auto dir =
      std::filesystem::temp_directory_path() / "carskit_ckpt_manifest";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "m.ckpt").string();
  TrainConfig cfg = tiny_config(UqMethod::kFullBnn);
  cfg.physics_on = true;
  save_predictor(path, train(cfg, data), {{"final_loss", 1.25}});

  const nlohmann::json manifest = read_checkpoint_manifest(path);
  CHECK(manifest.at("method").get<std::string>() == "full_bnn");
  CHECK(manifest.at("physics_on").get<bool>());
  CHECK(manifest.at("network").at("width").get<int>() == 4);
  CHECK(manifest.at("metric_of_record").at("final_loss").get<double>() ==
        doctest::Approx(1.25));
  std::filesystem::remove_all(dir);
}

TEST_CASE("loading a non-checkpoint file fails cleanly") {
  const auto dir =
      std::filesystem::temp_directory_path() / "carskit_ckpt_bad";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "not_a_ckpt").string();
  std::ofstream(path) << "{\"format\":\"something-else\"}\n";
  CHECK_THROWS_AS(load_predictor(path), DataError);
  std::filesystem::remove_all(dir);
}
