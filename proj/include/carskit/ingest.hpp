#pragma once

#include "carskit/grid.hpp"

#include <string>
#include <utility>
#include <vector>

namespace carskit {

// Reads a two-column (axis, intensity) text file; comma or whitespace
// delimited, '#' comments skipped. The spectrum is resampled onto the grid
// and min-max normalized.
Spectrum load_real_spectrum(const std::string& path,
                            const WavenumberGrid& grid);

// All readable spectra in a directory (.txt/.csv/.dat/.asc), sorted by
// filename. Empty result is an error.
std::vector<std::pair<std::string, Spectrum>> load_spectra_dir(
    const std::string& dir, const WavenumberGrid& grid);

}  // namespace carskit
