#pragma once

#include "carskit/common.hpp"

namespace carskit {

// Uniform normalized Raman-shift axis on [0, 1], both endpoints included.
// Even channel counts only: the FFT Hilbert transform needs a Nyquist bin.
struct WavenumberGrid {
  Index n_channels = 0;
  Array omega;

  double spacing() const {
    return 1.0 / static_cast<double>(n_channels - 1);
  }
};

WavenumberGrid make_grid(Index n_channels);

// A spectrum is a plain dense array of intensities on some grid.
using Spectrum = Array;

struct ComplexSpectrum {
  Array re;
  Array im;

  Index size() const { return re.size(); }
};

// One synthetic (input, label, background) triple on a shared grid.
struct SpectralPair {
  Spectrum cars;
  Spectrum raman_true;
  Spectrum nrb_true;
};

// Per-channel Gaussian predictive output shared by every UQ method.
struct PredictiveDistribution {
  Spectrum mean;
  Spectrum variance;
};

// Floor applied to predictive variances before scoring; keeps the
// log-likelihood finite for near-degenerate predictions.
inline constexpr double kVarianceFloor = 1e-6;

// Affine map onto [0, 1]. Degenerate (constant) input is an error.
Spectrum minmax_normalize(const Spectrum& s);

}  // namespace carskit
