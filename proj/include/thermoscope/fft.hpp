#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace thermoscope::fft {

using cdouble = std::complex<double>;

// In-place forward DFT, any length (radix-2 for powers of two, Bluestein otherwise).
void forward(std::vector<cdouble>& x);

// In-place inverse DFT, scaled by 1/N.
void inverse(std::vector<cdouble>& x);

std::size_t next_pow2(std::size_t n);

// Magnitude of the analytic signal: forward transform, zero the negative
// frequencies, double the positive ones (DC/Nyquist unscaled), invert.
std::vector<double> analytic_envelope(std::span<const double> x);

// Linear (zero-padded) cross-correlation r[k] = sum_n x[n] e[n-k], restricted
// to lags k = 0 .. x.size()-1.
std::vector<double> xcorr_nonneg(std::span<const double> x, std::span<const double> e);

}  // namespace thermoscope::fft
