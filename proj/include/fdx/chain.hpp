#pragma once

// End-to-end baseband simulation of the full-duplex transceiver: OFDM source,
// DAC, TX IQ mixer, TX VGA, PA, self-interference channel, signal of
// interest, RF cancellation, LNA, RX IQ mixer, RX VGA with AGC, and
// quantization. Every noise source draws from its own deterministic
// stream so that runs with the same seeds are reproducible sample for sample
// and individual sources can be toggled without disturbing the others.

#include <algorithm>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "fdx/config.hpp"
#include "fdx/impairments.hpp"
#include "fdx/ofdm.hpp"
#include "fdx/signal.hpp"

namespace fdx {

// ---------------------------------------------------------------------------
// Seed management
// ---------------------------------------------------------------------------

/// One stream per random source in the chain. Streams are derived from the
/// master seeds by mixing, so they are mutually independent and adding or
/// removing a source never shifts the others.
enum class ChainStream : std::uint64_t {
  kTxData = 1,
  kDacNoise = 2,
  kTxMixerNoise = 3,
  kPaNoise = 4,
  kChannel = 5,
  kVmNoise = 6,
  kRxThermal = 7,
  kLnaNoise = 8,
  kRxMixerNoise = 9,
  kRxVgaNoise = 10,
  kSoiData = 11,
  kTxImagePhase = 12,
  kRxImagePhase = 13,
};

struct SeedSet {
  std::uint64_t master = 2;          ///< governs waveforms and noise
  std::uint64_t channel_master = 2;  ///< governs channel and hardware draws

  Rng stream(ChainStream s) const {
    return Rng(Rng::mix(master, static_cast<std::uint64_t>(s)));
  }
  /// Streams tied to the physical environment (channel taps, image phases):
  /// shared by every pass of a multi-pass experiment.
  Rng hardware_stream(ChainStream s) const {
    return Rng(Rng::mix(channel_master, static_cast<std::uint64_t>(s)));
  }
  Rng channel_rng() const { return hardware_stream(ChainStream::kChannel); }
  /// Image-leakage phases of the IQ mixers, fixed per run.
  double tx_image_phase() const {
    return 2.0 * std::numbers::pi * hardware_stream(ChainStream::kTxImagePhase).uniform();
  }
  double rx_image_phase() const {
    return 2.0 * std::numbers::pi * hardware_stream(ChainStream::kRxImagePhase).uniform();
  }
};

// ---------------------------------------------------------------------------
// Chain control and results
// ---------------------------------------------------------------------------

/// Optional knobs for multi-pass experiments. Forcing the AGC gain and the
/// vector-modulator weight pins the receiver operating point across passes;
/// tx_data_off silences the transmit data while keeping every analog noise
/// source alive.
struct ChainOverrides {
  std::optional<double> forced_agc_gain_db;
  std::optional<double> forced_vm_scale;
  bool tx_data_off = false;
};

struct ChainDiag {
  double tx_vga_gain_db = 0.0;
  double agc_gain_db = 0.0;
  double vm_scale = 0.0;
  double rf_suppression_db = 0.0;
  std::size_t clipped = 0;
  double pa_out_dbm = -kInf;
  double lna_in_dbm = -kInf;
  double detector_dbm = -kInf;
  SiChannel channel;
};

struct ChainResult {
  ComplexSignal x;  ///< unit-power digital transmit baseband (zeros if off)
  ComplexSignal y;  ///< detector output after AGC and quantization
  ChainDiag diag;
};

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

/// TX VGA gain from the nominal line-up: DAC level times mixer gain must be
/// raised so the PA output meets the requested transmit power. Throws if the
/// result leaves the VGA's control range.
inline double tx_vga_gain_db(const TransceiverConfig& cfg, double tx_power_dbm) {
  const double pa_in_dbm = tx_power_dbm - cfg.pa_gain_db;
  const double gain = pa_in_dbm - (cfg.dac_power_dbm + cfg.tx_mixer_gain_db);
  if (gain < cfg.tx_vga_min_db || gain > cfg.tx_vga_max_db) {
    throw std::invalid_argument(
        "tx chain: required TX VGA gain " + std::to_string(gain) + " dB outside the " +
        std::to_string(cfg.tx_vga_min_db) + ".." + std::to_string(cfg.tx_vga_max_db) +
        " dB control range for tx power " + std::to_string(tx_power_dbm) + " dBm");
  }
  return gain;
}

namespace detail {

inline void add_band_noise(ComplexSignal& s, double power_w, double bandwidth_hz, Rng rng) {
  if (power_w <= 0.0 || s.samples.empty()) return;
  const cvec n = band_noise_samples(s.samples.size(), power_w, s.sample_rate, bandwidth_hz, rng);
  for (std::size_t i = 0; i < s.samples.size(); ++i) s.samples[i] += n[i];
}

inline void scale_signal(ComplexSignal& s, double amplitude) {
  for (cd& v : s.samples) v *= amplitude;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Full chain
// ---------------------------------------------------------------------------

/// Run the complete transceiver once. The returned reference x is the
/// unit-power digital baseband the cancellers see; y is the detector output.
/// All analog scaling between the two is part of the identified response.
inline ChainResult full_chain(const TransceiverConfig& cfg, double tx_power_dbm, int n_symbols,
                              const SeedSet& seeds, bool soi_on,
                              const ChainOverrides& ov = {}) {
  if (n_symbols < 1) throw std::invalid_argument("full_chain: need at least one symbol");
  const OfdmParams op = cfg.ofdm();
  const double fs = op.sample_rate_hz();
  const double bw = cfg.bandwidth_hz;
  const double pth = cfg.thermal_floor_w();
  const std::size_t n = std::size_t(n_symbols) * op.symbol_len();
  const bool nl = cfg.nonlinearities_enabled;

  ChainResult res;

  // Digital transmit baseband (unit mean power).
  if (ov.tx_data_off) {
    res.x = ComplexSignal{cvec(n, cd(0, 0)), fs};
  } else {
    Rng r = seeds.stream(ChainStream::kTxData);
    res.x = generate_ofdm(op, n_symbols, r);
  }

  // DAC: scale to the configured level and add its output noise floor.
  ComplexSignal s = res.x;
  detail::scale_signal(s, std::sqrt(dbm_to_watts(cfg.dac_power_dbm)));
  detail::add_band_noise(s, pth, bw, seeds.stream(ChainStream::kDacNoise));

  // TX IQ mixer: widely linear image response plus its thermal excess.
  const WidelyLinearResponse tx_mix =
      irr_to_response(cfg.tx_irr_db, seeds.tx_image_phase(), cfg.tx_mixer_gain_db);
  s = apply_wl(s, tx_mix);
  detail::add_band_noise(
      s, (db_to_lin(cfg.tx_mixer_nf_db) - 1.0) * db_to_lin(cfg.tx_mixer_gain_db) * pth, bw,
      seeds.stream(ChainStream::kTxMixerNoise));

  // TX VGA: ideal gain element, level-set from the line-up.
  res.diag.tx_vga_gain_db = tx_vga_gain_db(cfg, tx_power_dbm);
  detail::scale_signal(s, std::sqrt(db_to_lin(res.diag.tx_vga_gain_db)));

  // PA: parallel-Hammerstein model plus its thermal excess.
  const PhModel pa = pa_from_specs(cfg.pa_gain_db, nl ? cfg.pa_iip3_dbm : kInf,
                                   std::max(cfg.pa_order, 3), default_pa_memory(),
                                   cfg.pa_fifth_order_ref_w);
  ComplexSignal pa_out = apply_ph(s, pa);
  detail::add_band_noise(pa_out,
                         (db_to_lin(cfg.pa_nf_db) - 1.0) * db_to_lin(cfg.pa_gain_db) * pth, bw,
                         seeds.stream(ChainStream::kPaNoise));
  res.diag.pa_out_dbm = measure_power_dbm(pa_out);

  // Self-interference channel (shared across passes via channel_master).
  Rng chr = seeds.channel_rng();
  res.diag.channel = draw_si_channel(cfg.k_factor_db, cfg.antenna_separation_db,
                                     cfg.n_diffuse_taps, chr, cfg.diffuse_decay_db_per_tap);
  const cvec si = convolve_trunc(pa_out.samples, res.diag.channel.taps);

  // Receive summation point: SI plus signal of interest plus antenna thermal.
  ComplexSignal rx_in{si, fs};
  if (soi_on) {
    Rng r = seeds.stream(ChainStream::kSoiData);
    ComplexSignal soi = generate_ofdm(op, n_symbols, r);
    detail::scale_signal(soi, std::sqrt(dbm_to_watts(cfg.soi_power_dbm)));
    for (std::size_t i = 0; i < n; ++i) rx_in.samples[i] += soi.samples[i];
  }
  detail::add_band_noise(rx_in, pth, bw, seeds.stream(ChainStream::kRxThermal));
  res.diag.lna_in_dbm = measure_power_dbm(rx_in);

  // RF cancellation stage.
  Rng vmr = seeds.stream(ChainStream::kVmNoise);
  RfCancResult rfc =
      rf_cancellation(rx_in, pa_out, res.diag.channel, cfg, vmr, &si, ov.forced_vm_scale);
  res.diag.vm_scale = rfc.vm_scale;
  res.diag.rf_suppression_db = rfc.suppression_db;

  // LNA.
  const StageSpec lna{cfg.lna_gain_db, cfg.lna_nf_db, nl ? cfg.lna_iip2_dbm : kInf,
                      nl ? cfg.lna_iip3_dbm : kInf, "lna"};
  Rng lnar = seeds.stream(ChainStream::kLnaNoise);
  ComplexSignal r1 = apply_stage(rfc.out, lna, bw, lnar);

  // RX IQ mixer: intercept-point distortion at the input, then the widely
  // linear image response, then its thermal excess.
  const StageSpec mix_poly{cfg.rx_mixer_gain_db, 0.0, nl ? cfg.rx_mixer_iip2_dbm : kInf,
                           nl ? cfg.rx_mixer_iip3_dbm : kInf, "rx mixer"};
  Rng mixr = seeds.stream(ChainStream::kRxMixerNoise);
  ComplexSignal r2 = apply_stage(r1, mix_poly, bw, mixr);
  r2 = apply_wl(r2, irr_to_response(cfg.rx_irr_db, seeds.rx_image_phase(), 0.0));
  detail::add_band_noise(
      r2, (db_to_lin(cfg.rx_mixer_nf_db) - 1.0) * db_to_lin(cfg.rx_mixer_gain_db) * pth, bw,
      mixr);

  // RX VGA under AGC control. The solved gain saturates at the ends of the
  // VGA control range, as a real AGC loop does; at the high rail the
  // converter is simply under-loaded.
  double agc_gain;
  if (ov.forced_agc_gain_db) {
    agc_gain = *ov.forced_agc_gain_db;
  } else {
    agc_gain = solve_agc_gain_db(measure_power(r2), cfg);
    agc_gain = std::clamp(agc_gain, cfg.rx_vga_min_db, cfg.rx_vga_max_db);
  }
  res.diag.agc_gain_db = agc_gain;
  const StageSpec vga{agc_gain, cfg.rx_vga_nf_db, nl ? cfg.rx_vga_iip2_dbm : kInf,
                      nl ? cfg.rx_vga_iip3_dbm : kInf, "rx vga"};
  Rng vgar = seeds.stream(ChainStream::kRxVgaNoise);
  ComplexSignal det = apply_stage(r2, vga, bw, vgar);

  if (cfg.adc_enabled) {
    det = quantize(det, cfg.adc_bits, cfg.adc_full_scale_w(), &res.diag.clipped);
  }
  res.diag.detector_dbm = measure_power_dbm(det);
  res.y = std::move(det);
  return res;
}

}  // namespace fdx
