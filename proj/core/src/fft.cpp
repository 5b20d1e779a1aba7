#include "rulkit/fft.hpp"

#include <cmath>

#include "rulkit/errors.hpp"

namespace rulkit {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative Cooley-Tukey, n a power of two.
void fft_pow2(std::vector<cdouble>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n <= 1) return;

  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? kTwoPi : -kTwoPi) / static_cast<double>(len);
    const cdouble wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cdouble w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        cdouble u = a[i + j];
        cdouble v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Bluestein chirp-z: expresses an arbitrary-length DFT as a linear
// convolution, evaluated with a power-of-two FFT.
std::vector<cdouble> fft_bluestein(const std::vector<cdouble>& x, bool inverse) {
  const std::size_t n = x.size();
  const double sign = inverse ? 1.0 : -1.0;

  // Chirp terms w[k] = exp(sign * i * pi * k^2 / n). k^2 mod 2n keeps the
  // angle argument small for large k.
  std::vector<cdouble> w(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t k2 = (k * k) % (2 * n);
    double ang = sign * kTwoPi * 0.5 * static_cast<double>(k2) / static_cast<double>(n);
    w[k] = cdouble(std::cos(ang), std::sin(ang));
  }

  const std::size_t m = next_pow2(2 * n - 1);
  std::vector<cdouble> a(m, cdouble(0.0, 0.0));
  std::vector<cdouble> b(m, cdouble(0.0, 0.0));
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * w[k];
  for (std::size_t k = 0; k < n; ++k) {
    b[k] = std::conj(w[k]);
    if (k != 0) b[m - k] = std::conj(w[k]);
  }

  fft_pow2(a, false);
  fft_pow2(b, false);
  for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
  fft_pow2(a, true);
  const double scale = 1.0 / static_cast<double>(m);

  std::vector<cdouble> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * scale * w[k];
  return out;
}

std::vector<cdouble> transform(const std::vector<cdouble>& x, bool inverse) {
  if (x.empty()) throw ShapeError("fft: empty input");
  std::vector<cdouble> out;
  if (is_pow2(x.size())) {
    out = x;
    fft_pow2(out, inverse);
  } else {
    out = fft_bluestein(x, inverse);
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(x.size());
    for (auto& v : out) v *= scale;
  }
  return out;
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<cdouble> fft(const std::vector<cdouble>& x) { return transform(x, false); }

std::vector<cdouble> ifft(const std::vector<cdouble>& x) { return transform(x, true); }

std::vector<cdouble> fft_real(const std::vector<double>& x) {
  std::vector<cdouble> cx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) cx[i] = cdouble(x[i], 0.0);
  return fft(cx);
}

std::vector<double> fft_magnitudes(const std::vector<double>& x) {
  std::vector<cdouble> spec = fft_real(x);
  std::vector<double> mag(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) mag[i] = std::abs(spec[i]);
  return mag;
}

}  // namespace rulkit
