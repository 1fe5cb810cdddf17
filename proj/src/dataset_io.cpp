#include "carskit/dataset_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace carskit {

namespace {

using nlohmann::json;

static_assert(sizeof(float) == 4);

void write_f32(std::ostream& out, const Array& values) {
  std::vector<unsigned char> buf(static_cast<size_t>(values.size()) * 4);
  for (Index i = 0; i < values.size(); ++i) {
    float f = static_cast<float>(values[i]);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    if constexpr (std::endian::native == std::endian::big) {
      bits = __builtin_bswap32(bits);
    }
    std::memcpy(buf.data() + static_cast<size_t>(i) * 4, &bits, 4);
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
}

Array read_f32(std::istream& in, Index count, const std::string& path) {
  std::vector<unsigned char> buf(static_cast<size_t>(count) * 4);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size()));
  if (!in) throw DataError("dataset truncated: " + path);
  Array values(count);
  for (Index i = 0; i < count; ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, buf.data() + static_cast<size_t>(i) * 4, 4);
    if constexpr (std::endian::native == std::endian::big) {
      bits = __builtin_bswap32(bits);
    }
    float f;
    std::memcpy(&f, &bits, 4);
    values[i] = static_cast<double>(f);
  }
  return values;
}

}  // namespace

void write_dataset(const std::string& path, const DatasetFile& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write dataset file: " + path);

  json header;
  header["format"] = "carskit-dataset";
  header["version"] = 1;
  header["n_pairs"] = data.pairs.size();
  header["n_channels"] = data.grid.n_channels;
  header["seed"] = data.seed;
  header["split"] = {{"train", data.split.train}, {"eval", data.split.eval}};
  header["config"] = data.config_echo;
  out << header.dump() << "\n";

  for (const auto& pair : data.pairs) {
    write_f32(out, pair.cars);
    write_f32(out, pair.raman_true);
    write_f32(out, pair.nrb_true);
  }
  if (!out) throw DataError("write failed: " + path);
}

DatasetFile read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset file: " + path);

  std::string header_line;
  if (!std::getline(in, header_line)) {
    throw DataError("dataset missing header: " + path);
  }
  json header;
  try {
    header = json::parse(header_line);
  } catch (const json::exception& e) {
    throw DataError("dataset header parse error in " + path + ": " + e.what());
  }
  if (header.value("format", "") != std::string("carskit-dataset")) {
    throw DataError("not a dataset file: " + path);
  }

  DatasetFile data;
  const Index n_pairs = header.at("n_pairs").get<Index>();
  const Index n_channels = header.at("n_channels").get<Index>();
  data.grid = make_grid(n_channels);
  data.seed = header.at("seed").get<std::uint64_t>();
  data.config_echo = header.value("config", json::object());
  if (header.contains("split")) {
    data.split.train =
        header.at("split").at("train").get<std::vector<Index>>();
    data.split.eval = header.at("split").at("eval").get<std::vector<Index>>();
  }

  data.pairs.reserve(static_cast<size_t>(n_pairs));
  for (Index i = 0; i < n_pairs; ++i) {
    SpectralPair pair;
    pair.cars = read_f32(in, n_channels, path);
    pair.raman_true = read_f32(in, n_channels, path);
    pair.nrb_true = read_f32(in, n_channels, path);
    data.pairs.push_back(std::move(pair));
  }
  return data;
}

}  // namespace carskit
