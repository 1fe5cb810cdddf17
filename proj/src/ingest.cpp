#include "carskit/ingest.hpp"

#include "carskit/signal_ops.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace carskit {

namespace {

bool parse_double(const std::string& token, double& out) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Spectrum load_real_spectrum(const std::string& path,
                            const WavenumberGrid& grid) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open spectrum file: " + path);

  std::vector<double> axis, intensity;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    std::string first, second, extra;
    if (!(row >> first)) continue;  // blank line
    if (!(row >> second) || (row >> extra)) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected exactly two columns");
    }
    double a = 0.0, v = 0.0;
    if (!parse_double(first, a) || !parse_double(second, v)) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": malformed numeric value");
    }
    axis.push_back(a);
    intensity.push_back(v);
  }
  if (axis.size() < 2) {
    throw DataError(path + ": need at least 2 data rows");
  }
  for (size_t i = 1; i < axis.size(); ++i) {
    if (!(axis[i] > axis[i - 1])) {
      throw DataError(path + ": axis must be strictly increasing (row " +
                      std::to_string(i + 1) + ")");
    }
  }
  const Index n = static_cast<Index>(axis.size());
  Array axis_arr = Eigen::Map<const Array>(axis.data(), n);
  Array value_arr = Eigen::Map<const Array>(intensity.data(), n);
  return minmax_normalize(resample_linear(value_arr, axis_arr, grid));
}

std::vector<std::pair<std::string, Spectrum>> load_spectra_dir(
    const std::string& dir, const WavenumberGrid& grid) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw DataError("not a directory: " + dir);
  }
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".txt" || ext == ".csv" || ext == ".dat" || ext == ".asc") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw DataError("no spectra found in directory: " + dir);
  }
  std::vector<std::pair<std::string, Spectrum>> out;
  out.reserve(files.size());
  for (const auto& file : files) {
    out.emplace_back(fs::path(file).filename().string(),
                     load_real_spectrum(file, grid));
  }
  return out;
}

}  // namespace carskit
