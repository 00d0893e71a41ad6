#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "fdx/fft.hpp"

namespace fdx {

using cd = std::complex<double>;
using cvec = std::vector<cd>;

/// Complex baseband sample stream. Internal amplitude units are sqrt(watts):
/// the mean of |s[n]|^2 is the signal power in watts.
struct ComplexSignal {
  cvec samples;
  double sample_rate = 1.0;  // Hz

  std::size_t size() const { return samples.size(); }
};

inline double dbm_to_watts(double p_dbm) { return 1e-3 * std::pow(10.0, p_dbm / 10.0); }

inline double watts_to_dbm(double w) {
  if (w < 0.0) throw std::invalid_argument("watts_to_dbm: negative power");
  if (w == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(w * 1e3);
}

inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double lin) {
  if (lin < 0.0) throw std::invalid_argument("lin_to_db: negative ratio");
  if (lin == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(lin);
}

/// Thermal noise floor kTB at 290 K: -174 dBm/Hz plus 10*log10(bandwidth).
inline double thermal_floor_dbm(double bandwidth_hz) {
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("thermal_floor_dbm: bandwidth must be positive");
  return -174.0 + 10.0 * std::log10(bandwidth_hz);
}

inline double measure_power(const cvec& samples) {
  if (samples.empty()) throw std::invalid_argument("measure_power: empty signal");
  double acc = 0.0;
  for (const cd& x : samples) acc += std::norm(x);
  return acc / double(samples.size());
}

inline double measure_power(const ComplexSignal& s) { return measure_power(s.samples); }

inline double measure_power_dbm(const ComplexSignal& s) { return watts_to_dbm(measure_power(s)); }

/// Deterministic random source. A master seed plus a stream tag derive
/// independent engines through a splitmix64-style mixer, so the draw order of
/// one stream never disturbs another. Gaussian variates come from Box-Muller
/// on 53-bit uniforms: exactly two engine calls per complex sample,
/// bit-reproducible across platforms (std::normal_distribution is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(seed) {}

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Derive an independent stream from the construction seed (not from the
  /// current engine state).
  Rng stream(std::uint64_t tag) const { return Rng(mix(seed_, tag)); }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t bits() { return eng_(); }

  /// Uniform on (0, 1]; never returns zero so log() is always safe.
  double uniform() { return (double(eng_() >> 11) + 1.0) * 0x1.0p-53; }

  /// Standard real normal N(0,1).
  double gauss() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Circularly symmetric complex normal with E|z|^2 = 1.
  cd cgauss() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return cd(r * std::cos(a), r * std::sin(a));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

/// White complex Gaussian noise with the given total power in watts.
inline cvec awgn_samples(std::size_t n, double power_w, Rng& rng) {
  if (power_w < 0.0) throw std::invalid_argument("awgn: negative power");
  cvec out(n, cd(0, 0));
  if (power_w == 0.0) return out;
  const double s = std::sqrt(power_w);
  for (cd& x : out) x = s * rng.cgauss();
  return out;
}

inline ComplexSignal awgn(std::size_t n, double power_w, double sample_rate, Rng& rng) {
  return {awgn_samples(n, power_w, rng), sample_rate};
}

/// Gaussian noise confined to |f| <= bandwidth/2 with the given total power.
/// White noise is drawn, masked in the frequency domain, and rescaled by
/// 1/sqrt(kept fraction) so the expected total power is preserved.
inline cvec band_noise_samples(std::size_t n, double power_w, double sample_rate,
                               double bandwidth_hz, Rng& rng) {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("band_noise: sample rate must be positive");
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("band_noise: bandwidth must be positive");
  if (n == 0 || power_w == 0.0 || bandwidth_hz >= sample_rate) {
    return awgn_samples(n, power_w, rng);
  }
  // Shape in a power-of-two frame and truncate: the process is stationary, so
  // a truncated draw has the same spectrum and power as an exact-length one
  // while keeping the transforms on the fast radix-2 path.
  std::size_t m = 1;
  while (m < n) m <<= 1;
  cvec w = awgn_samples(m, power_w, rng);
  auto spec = fft::transform(std::move(w), false);
  std::size_t kept = 0;
  for (std::size_t k = 0; k < m; ++k) {
    if (std::abs(fft::bin_frequency(k, m, sample_rate)) <= bandwidth_hz / 2.0) {
      ++kept;
    } else {
      spec[k] = cd(0, 0);
    }
  }
  if (kept == 0) throw std::invalid_argument("band_noise: bandwidth below bin spacing");
  auto t = fft::transform(std::move(spec), true);
  const double g = std::sqrt(double(m) / double(kept));
  t.resize(n);
  for (cd& v : t) v *= g;
  return t;
}

inline ComplexSignal band_noise(std::size_t n, double power_w, double sample_rate,
                                double bandwidth_hz, Rng& rng) {
  return {band_noise_samples(n, power_w, sample_rate, bandwidth_hz, rng), sample_rate};
}

/// Mean power contained in |f| <= bandwidth/2 (Parseval over masked bins).
inline double inband_power(const ComplexSignal& s, double bandwidth_hz) {
  if (s.samples.empty()) throw std::invalid_argument("inband_power: empty signal");
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("inband_power: bandwidth must be positive");
  if (bandwidth_hz >= s.sample_rate) return measure_power(s);
  const std::size_t n = s.samples.size();
  auto spec = fft::transform(s.samples, false);
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(fft::bin_frequency(k, n, s.sample_rate)) <= bandwidth_hz / 2.0) {
      acc += std::norm(spec[k]);
    }
  }
  return acc / (double(n) * double(n));
}

/// Causal direct convolution truncated to the input length:
/// out[n] = sum_k h[k] x[n-k].
inline cvec convolve_trunc(const cvec& x, const cvec& h) {
  if (h.empty()) throw std::invalid_argument("convolve_trunc: empty taps");
  cvec out(x.size(), cd(0, 0));
  const std::size_t kmax = h.size();
  for (std::size_t n = 0; n < x.size(); ++n) {
    cd acc(0, 0);
    const std::size_t klim = std::min(kmax, n + 1);
    for (std::size_t k = 0; k < klim; ++k) acc += h[k] * x[n - k];
    out[n] = acc;
  }
  return out;
}

}  // namespace fdx
