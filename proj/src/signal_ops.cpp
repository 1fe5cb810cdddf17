#include "carskit/signal_ops.hpp"

#include <unsupported/Eigen/FFT>

#include <complex>
#include <vector>

namespace carskit {

namespace {

Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

}  // namespace

Spectrum hilbert_imag(const Spectrum& x) {
  const Index n = x.size();
  if (n < 2 || n % 2 != 0) {
    throw ConfigError("hilbert_imag: even input length required, got " +
                      std::to_string(n));
  }
  std::vector<std::complex<double>> in(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) in[static_cast<size_t>(i)] = {x[i], 0.0};

  std::vector<std::complex<double>> freq;
  auto& fft = fft_engine();
  fft.fwd(freq, in);

  // One-sided spectrum: keep DC and Nyquist, double positives, zero the rest.
  const Index half = n / 2;
  for (Index k = 1; k < half; ++k) freq[static_cast<size_t>(k)] *= 2.0;
  for (Index k = half + 1; k < n; ++k) freq[static_cast<size_t>(k)] = 0.0;

  std::vector<std::complex<double>> analytic;
  fft.inv(analytic, freq);

  Spectrum out(n);
  for (Index i = 0; i < n; ++i) out[i] = analytic[static_cast<size_t>(i)].imag();
  return out;
}

Spectrum first_difference(const Spectrum& x) {
  const Index n = x.size();
  if (n < 2) {
    throw ConfigError("first_difference: input length must be at least 2");
  }
  return x.tail(n - 1) - x.head(n - 1);
}

Array first_difference_adjoint(const Array& g, Index n) {
  if (g.size() != n - 1) {
    throw ConfigError("first_difference_adjoint: gradient length mismatch");
  }
  Array out = Array::Zero(n);
  out.head(n - 1) -= g;
  out.tail(n - 1) += g;
  return out;
}

Spectrum resample_linear(const Array& values, const Array& source_axis,
                         const WavenumberGrid& grid) {
  const Index m = source_axis.size();
  if (m < 2 || values.size() != m) {
    throw DataError("resample_linear: need at least 2 source points");
  }
  for (Index i = 1; i < m; ++i) {
    if (!(source_axis[i] > source_axis[i - 1])) {
      throw DataError(
          "resample_linear: source axis must be strictly increasing");
    }
  }
  const double lo = source_axis[0];
  const double span = source_axis[m - 1] - lo;
  Array mapped = (source_axis - lo) / span;

  Spectrum out(grid.n_channels);
  Index seg = 0;
  for (Index i = 0; i < grid.n_channels; ++i) {
    const double t = grid.omega[i];
    if (t <= mapped[0]) {
      out[i] = values[0];
      continue;
    }
    if (t >= mapped[m - 1]) {
      out[i] = values[m - 1];
      continue;
    }
    while (seg + 2 < m && mapped[seg + 1] < t) ++seg;
    const double w = (t - mapped[seg]) / (mapped[seg + 1] - mapped[seg]);
    out[i] = (1.0 - w) * values[seg] + w * values[seg + 1];
  }
  return out;
}

Spectrum apply_linear_op(LinearOpTag tag, const Spectrum& x) {
  switch (tag) {
    case LinearOpTag::kHilbertImag:
      return hilbert_imag(x);
    case LinearOpTag::kFirstDifference:
      return first_difference(x);
  }
  throw ConfigError("apply_linear_op: unknown tag");
}

Array apply_linear_op_adjoint(LinearOpTag tag, const Array& g,
                              Index input_length) {
  switch (tag) {
    case LinearOpTag::kHilbertImag:
      // The one-sided-spectrum map is a skew-symmetric circulant.
      return -hilbert_imag(g);
    case LinearOpTag::kFirstDifference:
      return first_difference_adjoint(g, input_length);
  }
  throw ConfigError("apply_linear_op_adjoint: unknown tag");
}

}  // namespace carskit
