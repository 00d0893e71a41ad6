#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace fdx::fft {

using cd = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// In-place iterative radix-2 Cooley-Tukey. Forward transform is unnormalized,
/// inverse divides by N.
inline void transform_pow2(std::vector<cd>& a, bool inverse) {
  const std::size_t n = a.size();
  if (!is_pow2(n)) throw std::invalid_argument("fft: length must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / double(len);
    const cd wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cd w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cd u = a[i + k];
        const cd v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    for (auto& x : a) x /= double(n);
  }
}

/// DFT of arbitrary length: radix-2 when possible, Bluestein chirp-z otherwise.
/// The chirp phase is evaluated through n^2 mod 2N so it stays exact for any
/// frame length used here.
inline std::vector<cd> transform(std::vector<cd> a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0) throw std::invalid_argument("fft: empty input");
  if (is_pow2(n)) {
    transform_pow2(a, inverse);
    return a;
  }
  const std::uint64_t two_n = 2 * n;
  auto chirp = [&](std::size_t m) {
    const std::uint64_t q = (std::uint64_t(m) * std::uint64_t(m)) % two_n;
    const double ang = std::numbers::pi * double(q) / double(n);
    return cd(std::cos(ang), std::sin(ang));
  };
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;
  std::vector<cd> fa(m, cd(0, 0)), fb(m, cd(0, 0));
  for (std::size_t i = 0; i < n; ++i) {
    const cd c = chirp(i);
    fa[i] = a[i] * (inverse ? c : std::conj(c));
  }
  fb[0] = chirp(0);
  for (std::size_t i = 1; i < n; ++i) {
    const cd c = chirp(i);
    fb[i] = fb[m - i] = (inverse ? std::conj(c) : c);
  }
  transform_pow2(fa, false);
  transform_pow2(fb, false);
  for (std::size_t i = 0; i < m; ++i) fa[i] *= fb[i];
  transform_pow2(fa, true);
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const cd c = chirp(k);
    out[k] = fa[k] * (inverse ? c : std::conj(c));
    if (inverse) out[k] /= double(n);
  }
  return out;
}

/// Signed frequency of DFT bin k at the given sample rate.
inline double bin_frequency(std::size_t k, std::size_t n, double sample_rate) {
  const double idx = (k <= (n - 1) / 2) ? double(k) : double(k) - double(n);
  return idx * sample_rate / double(n);
}

}  // namespace fdx::fft
