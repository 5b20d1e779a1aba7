#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace rulkit {

using cdouble = std::complex<double>;

// Forward transform X_k = sum_n x_n exp(-i 2 pi k n / N), any length N.
// Power-of-two lengths run radix-2 in place; other lengths go through
// Bluestein's chirp-z reduction to a power-of-two convolution.
std::vector<cdouble> fft(const std::vector<cdouble>& x);

// Inverse transform with 1/N normalization: ifft(fft(x)) == x.
std::vector<cdouble> ifft(const std::vector<cdouble>& x);

// Forward transform of a real signal; returns all N complex bins.
std::vector<cdouble> fft_real(const std::vector<double>& x);

// Magnitudes |X_k| of the forward transform of a real signal.
std::vector<double> fft_magnitudes(const std::vector<double>& x);

// Smallest power of two >= n.
std::size_t next_pow2(std::size_t n);

}  // namespace rulkit
