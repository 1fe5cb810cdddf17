#include "carskit/grid.hpp"

namespace carskit {

WavenumberGrid make_grid(Index n_channels) {
  if (n_channels < 8) {
    throw ConfigError("grid length must be at least 8, got " +
                      std::to_string(n_channels));
  }
  if (n_channels % 2 != 0) {
    throw ConfigError("grid length must be even, got " +
                      std::to_string(n_channels));
  }
  WavenumberGrid grid;
  grid.n_channels = n_channels;
  grid.omega = Array::LinSpaced(n_channels, 0.0, 1.0);
  return grid;
}

Spectrum minmax_normalize(const Spectrum& s) {
  if (!all_finite(s)) {
    throw DataError("minmax_normalize: non-finite values in input");
  }
  const double lo = s.minCoeff();
  const double hi = s.maxCoeff();
  if (!(hi > lo)) {
    throw DataError("minmax_normalize: degenerate range (constant input)");
  }
  return (s - lo) / (hi - lo);
}

}  // namespace carskit
