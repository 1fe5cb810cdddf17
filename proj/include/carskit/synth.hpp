#pragma once

#include "carskit/common.hpp"
#include "carskit/grid.hpp"
#include "carskit/rng.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace carskit {

// One complex Lorentzian resonance A / (Omega - w - i*gamma).
struct LorentzianPeak {
  double amplitude = 0.0;   // A > 0
  double center = 0.0;      // Omega in (0, 1)
  double linewidth = 0.0;   // gamma > 0
};

struct PeakSet {
  std::vector<LorentzianPeak> peaks;
};

// Product of a rising and a falling logistic factor.
struct SigmoidNrb {
  double b1 = 0.0;  // rise steepness, > 0
  double c1 = 0.0;  // rise inflection
  double b2 = 0.0;  // fall steepness, > 0
  double c2 = 0.0;  // fall inflection, c1 < c2
};

// Quartic a*w^4 + b*w^3 + c*w^2 + d*w + e, clamped at 0 from below.
struct PolynomialNrb {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0, e = 0.0;
};

using NrbParams = std::variant<SigmoidNrb, PolynomialNrb>;

struct NoiseConfig {
  double sigma_max = 0.01;  // per-spectrum noise std upper bound, >= 0
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct IntInterval {
  int lo = 0;
  int hi = 0;
};

struct SynthConfig {
  IntInterval n_peaks_range{1, 15};
  Interval amplitude_range{0.01, 1.0};
  Interval center_range{0.05, 0.95};
  Interval gamma_range{0.002, 0.01};
  double sigmoid_probability = 0.5;  // sigmoid vs polynomial NRB
  Interval sigmoid_steepness_range{5.0, 30.0};
  Interval sigmoid_rise_range{0.0, 0.4};
  Interval sigmoid_fall_range{0.6, 1.0};
  Interval poly_constant_range{0.0, 1.0};
  Interval poly_coeff_range{-1.0, 1.0};
  NoiseConfig noise{};
  std::uint64_t seed = 0;

  void validate() const;
};

// Rejection-sampled polynomial NRBs must stay within [0, kPolyNrbMax] on
// the whole axis.
inline constexpr double kPolyNrbMax = 1.5;

// chi_r(w) = sum_n A_n / (Omega_n - w - i*gamma_n), evaluated per channel.
ComplexSpectrum eval_resonant_susceptibility(const PeakSet& peaks,
                                             const WavenumberGrid& grid);

Spectrum eval_nrb(const NrbParams& params, const WavenumberGrid& grid);

// |chi_r + nrb|^2 before noise and normalization; nrb is real-valued.
Array cars_intensity(const ComplexSpectrum& chi_r, const Spectrum& nrb);

// Adds i.i.d. zero-mean Gaussian channel noise, then min-max normalizes.
Spectrum synth_cars(const ComplexSpectrum& chi_r, const Spectrum& nrb,
                    double noise_sigma, Rng& rng);

// Draws peaks and an NRB from the config ranges and assembles one pair.
// Degenerate normalization triggers a fresh draw, at most 10 retries.
SpectralPair sample_pair(const SynthConfig& config, const WavenumberGrid& grid,
                         Rng& rng);

// n pairs from one seeded stream; pair i draws from substream(i), so the
// result does not depend on evaluation order.
std::vector<SpectralPair> generate_dataset(Index n, const SynthConfig& config,
                                           const WavenumberGrid& grid);

struct DatasetSplit {
  std::vector<Index> train;
  std::vector<Index> eval;
};

// Deterministic 80/20 split by a seed-derived index permutation.
DatasetSplit split_indices(Index n, std::uint64_t seed,
                           double train_fraction = 0.8);

}  // namespace carskit
