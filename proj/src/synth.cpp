#include "carskit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace carskit {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw ConfigError(msg);
}

double draw(Rng& rng, const Interval& iv) { return rng.uniform(iv.lo, iv.hi); }

PeakSet draw_peaks(const SynthConfig& cfg, Rng& rng) {
  const int n = rng.uniform_int(cfg.n_peaks_range.lo, cfg.n_peaks_range.hi);
  PeakSet set;
  set.peaks.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    LorentzianPeak p;
    p.amplitude = draw(rng, cfg.amplitude_range);
    p.center = draw(rng, cfg.center_range);
    p.linewidth = draw(rng, cfg.gamma_range);
    set.peaks.push_back(p);
  }
  return set;
}

NrbParams draw_nrb(const SynthConfig& cfg, const WavenumberGrid& grid,
                   Rng& rng) {
  if (rng.uniform() < cfg.sigmoid_probability) {
    SigmoidNrb s;
    s.b1 = draw(rng, cfg.sigmoid_steepness_range);
    s.b2 = draw(rng, cfg.sigmoid_steepness_range);
    s.c1 = draw(rng, cfg.sigmoid_rise_range);
    s.c2 = draw(rng, cfg.sigmoid_fall_range);
    return s;
  }
  // Rejection-sample quartic coefficients until the curve stays inside
  // [0, kPolyNrbMax] on the axis.
  for (int attempt = 0; attempt < 1000; ++attempt) {
    PolynomialNrb p;
    p.a = draw(rng, cfg.poly_coeff_range);
    p.b = draw(rng, cfg.poly_coeff_range);
    p.c = draw(rng, cfg.poly_coeff_range);
    p.d = draw(rng, cfg.poly_coeff_range);
    p.e = draw(rng, cfg.poly_constant_range);
    const Array curve = grid.omega.unaryExpr([&](double w) {
      return (((p.a * w + p.b) * w + p.c) * w + p.d) * w + p.e;
    });
    if (curve.minCoeff() >= 0.0 && curve.maxCoeff() <= kPolyNrbMax) return p;
  }
  throw NumericError(
      "draw_nrb: polynomial rejection sampling failed after 1000 attempts; "
      "check poly coefficient ranges");
}

}  // namespace

void SynthConfig::validate() const {
  require(n_peaks_range.lo >= 1 && n_peaks_range.hi >= n_peaks_range.lo,
          "synth config: n_peaks_range must be a nonempty range with lo >= 1");
  require(amplitude_range.lo > 0.0 && amplitude_range.hi >= amplitude_range.lo,
          "synth config: amplitude_range must be positive and nonempty");
  require(center_range.lo > 0.0 && center_range.hi < 1.0 &&
              center_range.hi >= center_range.lo,
          "synth config: center_range must lie inside (0, 1)");
  require(gamma_range.lo > 0.0 && gamma_range.hi >= gamma_range.lo,
          "synth config: gamma_range must be positive and nonempty");
  require(sigmoid_probability >= 0.0 && sigmoid_probability <= 1.0,
          "synth config: sigmoid_probability must be in [0, 1]");
  require(sigmoid_steepness_range.lo > 0.0,
          "synth config: sigmoid steepness must be positive");
  require(sigmoid_rise_range.hi < sigmoid_fall_range.lo,
          "synth config: sigmoid rise range must precede fall range");
  require(noise.sigma_max >= 0.0, "synth config: sigma_max must be >= 0");
}

ComplexSpectrum eval_resonant_susceptibility(const PeakSet& peaks,
                                             const WavenumberGrid& grid) {
  if (peaks.peaks.empty()) throw ConfigError("eval: empty peak set");
  ComplexSpectrum chi;
  chi.re = Array::Zero(grid.n_channels);
  chi.im = Array::Zero(grid.n_channels);
  for (const auto& p : peaks.peaks) {
    if (!(p.amplitude > 0.0) || !(p.linewidth > 0.0) || !(p.center > 0.0) ||
        !(p.center < 1.0)) {
      throw ConfigError("eval: invalid Lorentzian parameters");
    }
    // A / (d - i*g) = A * (d + i*g) / (d^2 + g^2), d = Omega - w.
    const Array d = p.center - grid.omega;
    const Array denom = d.square() + p.linewidth * p.linewidth;
    chi.re += p.amplitude * d / denom;
    chi.im += p.amplitude * p.linewidth / denom;
  }
  return chi;
}

Spectrum eval_nrb(const NrbParams& params, const WavenumberGrid& grid) {
  if (const auto* s = std::get_if<SigmoidNrb>(&params)) {
    if (!(s->b1 > 0.0) || !(s->b2 > 0.0) || !(s->c1 < s->c2)) {
      throw ConfigError("eval_nrb: invalid sigmoid parameters");
    }
    const Array rise = 1.0 / (1.0 + (-s->b1 * (grid.omega - s->c1)).exp());
    const Array fall = 1.0 / (1.0 + (s->b2 * (grid.omega - s->c2)).exp());
    return rise * fall;
  }
  const auto& p = std::get<PolynomialNrb>(params);
  Array curve = grid.omega.unaryExpr([&](double w) {
    return (((p.a * w + p.b) * w + p.c) * w + p.d) * w + p.e;
  });
  return curve.max(0.0);
}

Array cars_intensity(const ComplexSpectrum& chi_r, const Spectrum& nrb) {
  if (chi_r.size() != nrb.size()) {
    throw DataError("cars_intensity: length mismatch");
  }
  return (chi_r.re + nrb).square() + chi_r.im.square();
}

Spectrum synth_cars(const ComplexSpectrum& chi_r, const Spectrum& nrb,
                    double noise_sigma, Rng& rng) {
  Array intensity = cars_intensity(chi_r, nrb);
  if (noise_sigma > 0.0) {
    for (Index i = 0; i < intensity.size(); ++i) {
      intensity[i] += rng.normal(0.0, noise_sigma);
    }
  }
  return minmax_normalize(intensity);
}

SpectralPair sample_pair(const SynthConfig& config, const WavenumberGrid& grid,
                         Rng& rng) {
  config.validate();
  for (int attempt = 0; attempt <= 10; ++attempt) {
    const PeakSet peaks = draw_peaks(config, rng);
    const NrbParams nrb_params = draw_nrb(config, grid, rng);
    const double sigma = config.noise.sigma_max > 0.0
                             ? rng.uniform(0.0, config.noise.sigma_max)
                             : 0.0;
    const ComplexSpectrum chi = eval_resonant_susceptibility(peaks, grid);
    const Spectrum nrb = eval_nrb(nrb_params, grid);
    try {
      SpectralPair pair;
      pair.cars = synth_cars(chi, nrb, sigma, rng);
      pair.raman_true = minmax_normalize(chi.im);
      pair.nrb_true = nrb;
      return pair;
    } catch (const DataError&) {
      // degenerate normalization range; redraw
    }
  }
  throw DataError("sample_pair: degenerate draws 10 times in a row");
}

std::vector<SpectralPair> generate_dataset(Index n, const SynthConfig& config,
                                           const WavenumberGrid& grid) {
  if (n < 1) throw ConfigError("generate_dataset: n must be >= 1");
  const Rng root(config.seed);
  std::vector<SpectralPair> pairs;
  pairs.reserve(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) {
    Rng stream = root.substream(static_cast<std::uint64_t>(i));
    pairs.push_back(sample_pair(config, grid, stream));
  }
  return pairs;
}

DatasetSplit split_indices(Index n, std::uint64_t seed,
                           double train_fraction) {
  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  // Dedicated substream so the permutation is independent of pair draws.
  Rng rng = Rng(seed).substream(0x51EED5EEDULL);
  for (Index i = n - 1; i > 0; --i) {
    const Index j = static_cast<Index>(
        rng.uniform_index(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
  }
  const Index n_train = static_cast<Index>(
      std::llround(train_fraction * static_cast<double>(n)));
  DatasetSplit split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.eval.assign(order.begin() + n_train, order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.eval.begin(), split.eval.end());
  return split;
}

}  // namespace carskit
