#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fdx/fft.hpp"
#include "fdx/signal.hpp"

namespace fdx {

/// OFDM waveform description. Data subcarriers sit symmetrically around DC at
/// bins +-1 .. +-n_data/2 of an oversampled IFFT (DC and the outer band are
/// null), so a 64-carrier/48-data configuration at 4x oversampling occupies
/// +-6 MHz of a 64 MHz sample rate. The guard interval is a cyclic prefix
/// given in chip-rate samples.
struct OfdmParams {
  int n_subcarriers = 64;
  int n_data = 48;
  int guard = 16;
  int oversampling = 4;
  double chip_rate_hz = 16e6;

  int fft_size() const { return n_subcarriers * oversampling; }
  int guard_len() const { return guard * oversampling; }
  int symbol_len() const { return fft_size() + guard_len(); }
  double sample_rate_hz() const { return chip_rate_hz * oversampling; }
  double subcarrier_spacing_hz() const { return chip_rate_hz / n_subcarriers; }
  double occupied_bandwidth_hz() const { return (n_data + 1) * subcarrier_spacing_hz(); }

  void validate() const {
    if (n_subcarriers < 2 || !fft::is_pow2(std::size_t(n_subcarriers)))
      throw std::invalid_argument("ofdm: subcarrier count must be a power of two >= 2");
    if (n_data <= 0 || n_data % 2 != 0)
      throw std::invalid_argument("ofdm: data subcarrier count must be positive and even");
    if (n_data >= n_subcarriers)
      throw std::invalid_argument("ofdm: data subcarriers must leave room for DC and guard bands");
    if (guard < 0) throw std::invalid_argument("ofdm: negative guard length");
    if (oversampling < 1 || !fft::is_pow2(std::size_t(oversampling)))
      throw std::invalid_argument("ofdm: oversampling must be a power of two >= 1");
    if (!(chip_rate_hz > 0.0)) throw std::invalid_argument("ofdm: chip rate must be positive");
  }
};

/// Gray-mapped 16-QAM rail: two bits select a level in {-3,-1,+1,+3}/sqrt(10),
/// ordered so adjacent levels differ in one bit (00,01,11,10).
inline double qam16_level(unsigned two_bits) {
  static constexpr double lv[4] = {-3.0, -1.0, 3.0, 1.0};
  return lv[two_bits & 3u] / 3.1622776601683795;  // sqrt(10)
}

inline cd qam16_symbol(unsigned four_bits) {
  return cd(qam16_level(four_bits & 3u), qam16_level((four_bits >> 2) & 3u));
}

/// Generate n_symbols of 16-QAM OFDM with unit mean power. Subcarrier symbols
/// are scaled by fft_size/sqrt(n_data) so the time-domain mean power is one.
inline ComplexSignal generate_ofdm(const OfdmParams& p, int n_symbols, Rng& rng) {
  p.validate();
  if (n_symbols <= 0) throw std::invalid_argument("ofdm: symbol count must be positive");
  const int nfft = p.fft_size();
  const int guard = p.guard_len();
  const double scale = double(nfft) / std::sqrt(double(p.n_data));
  ComplexSignal out;
  out.sample_rate = p.sample_rate_hz();
  out.samples.reserve(std::size_t(n_symbols) * std::size_t(p.symbol_len()));
  cvec bins(std::size_t(nfft), cd(0, 0));
  for (int sym = 0; sym < n_symbols; ++sym) {
    std::fill(bins.begin(), bins.end(), cd(0, 0));
    for (int k = 1; k <= p.n_data / 2; ++k) {
      bins[std::size_t(k)] = scale * qam16_symbol(unsigned(rng.bits() & 15u));
      bins[std::size_t(nfft - k)] = scale * qam16_symbol(unsigned(rng.bits() & 15u));
    }
    auto t = fft::transform(bins, true);
    for (int i = nfft - guard; i < nfft; ++i) out.samples.push_back(t[std::size_t(i)]);
    for (int i = 0; i < nfft; ++i) out.samples.push_back(t[std::size_t(i)]);
  }
  return out;
}

/// Peak-to-average power ratio in dB.
inline double papr_db(const ComplexSignal& s) {
  const double mean = measure_power(s);
  if (mean == 0.0) throw std::invalid_argument("papr_db: zero-power signal");
  double peak = 0.0;
  for (const cd& x : s.samples) peak = std::max(peak, std::norm(x));
  return 10.0 * std::log10(peak / mean);
}

}  // namespace fdx
