#pragma once

#include "carskit/common.hpp"
#include "carskit/grid.hpp"

namespace carskit {

// Linear operators used by the physics losses. Each has a well-defined
// adjoint for the reverse-mode pass: the Hilbert map below is
// skew-adjoint, the forward difference has the usual transpose stencil.
enum class LinearOpTag { kHilbertImag, kFirstDifference };

// Imaginary part of the discrete analytic signal: forward DFT, zero the
// negative-frequency bins, double the strictly positive ones, keep DC and
// Nyquist, inverse DFT, take Im. Maps cos(2*pi*k*t/n) to sin(2*pi*k*t/n).
// Periodic construction; accuracy claims exclude a boundary zone.
Spectrum hilbert_imag(const Spectrum& x);

// Forward difference d[i] = x[i+1] - x[i]; output has length n-1. The grid
// spacing is deliberately not divided out; loss weights absorb it.
Spectrum first_difference(const Spectrum& x);

// Adjoint of first_difference for an input of length n.
Array first_difference_adjoint(const Array& g, Index n);

// Linear interpolation of (source_axis, values) onto the target grid after
// affinely mapping the source axis onto [0, 1]. Out-of-range queries hold
// the edge value.
Spectrum resample_linear(const Array& values, const Array& source_axis,
                         const WavenumberGrid& grid);

Spectrum apply_linear_op(LinearOpTag tag, const Spectrum& x);

// Adjoint applied to an upstream gradient; `input_length` is the length of
// the forward input.
Array apply_linear_op_adjoint(LinearOpTag tag, const Array& g,
                              Index input_length);

}  // namespace carskit
