#pragma once

// Waveform measurements: image-rejection ratio from tone spectra, Rician
// K-factor from channel ensembles, and the twin-run SINR protocol.
//
// SINR protocol. The chain is nonlinear, so the signal of interest cannot be
// separated from the residual by superposition. Instead every operating point
// is simulated twice with common random numbers: pass A carries the signal of
// interest, pass B repeats the identical realization without it. Pass A runs
// first and its solved receiver state (AGC gain, vector-modulator weight) is
// forced onto pass B and onto a separate calibration pass, so all three share
// one operating point. After digital cancellation with coefficients fitted on
// the calibration pass, the sample-wise difference A - B isolates the signal
// of interest and the cancelled pass-B output is the residual; SINR is their
// in-band power ratio. Nonlinear cross-terms between the signal of interest
// and the self-interference end up attributed to the signal estimate, which
// is negligible here because the signal of interest sits far below the
// self-interference at every nonlinear stage.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdx/cancellers.hpp"
#include "fdx/chain.hpp"
#include "fdx/config.hpp"
#include "fdx/fft.hpp"
#include "fdx/impairments.hpp"
#include "fdx/signal.hpp"

namespace fdx {

// ---------------------------------------------------------------------------
// Spectrum measurements
// ---------------------------------------------------------------------------

/// Image-rejection ratio of a processed tone: locate the reference tone's bin
/// in `before`, then return the direct-to-image bin power ratio of `after` in
/// dB. The reference must be a single complex exponential away from DC and
/// Nyquist; an image below the numerical floor yields +inf.
inline double measure_irr(const ComplexSignal& before, const ComplexSignal& after) {
  const std::size_t n = before.samples.size();
  if (n == 0 || after.samples.size() != n) {
    throw std::invalid_argument("measure_irr: signals must be nonempty and equal length");
  }
  const cvec fb = fft::transform(before.samples, false);
  std::size_t k0 = 0;
  double peak = 0.0, total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double p = std::norm(fb[k]);
    total += p;
    if (p > peak) {
      peak = p;
      k0 = k;
    }
  }
  if (total == 0.0 || peak < 0.99 * total) {
    throw std::invalid_argument("measure_irr: reference is not a single complex tone");
  }
  if (k0 == 0 || 2 * k0 == n) {
    throw std::invalid_argument("measure_irr: tone at DC or Nyquist has no distinct image bin");
  }
  const cvec fa = fft::transform(after.samples, false);
  const double direct = std::norm(fa[k0]);
  const double image = std::norm(fa[n - k0]);
  if (image == 0.0 || direct > image * 1e25) return kInf;
  return lin_to_db(direct / image);
}

/// Rician K-factor of a channel ensemble: total line-of-sight power over
/// total diffuse power, in dB. A diffuse-free ensemble yields +inf.
inline double measure_k_factor(const std::vector<SiChannel>& ensemble) {
  if (ensemble.empty()) throw std::invalid_argument("measure_k_factor: empty ensemble");
  double los = 0.0, diffuse = 0.0;
  for (const SiChannel& ch : ensemble) {
    if (ch.taps.empty()) throw std::invalid_argument("measure_k_factor: channel has no taps");
    los += std::norm(ch.taps[0]);
    for (std::size_t i = 1; i < ch.taps.size(); ++i) diffuse += std::norm(ch.taps[i]);
  }
  if (diffuse == 0.0) return kInf;
  if (los == 0.0) return -kInf;
  return lin_to_db(los / diffuse);
}

// ---------------------------------------------------------------------------
// Twin-run SINR
// ---------------------------------------------------------------------------

/// Frame lengths (OFDM symbols of 320 samples): 63 evaluation symbols
/// (20160 samples) and 32 calibration symbols (10240 samples).
inline constexpr int kEvalSymbols = 63;
inline constexpr int kCalSymbols = 32;
/// Canceller defaults: memory 10 taps, nonlinear order 5.
inline constexpr int kCancellerMemory = 10;
inline constexpr int kCancellerOrder = 5;
/// Salt mixed into the master seed to draw the calibration frame's waveform
/// and noise independently of the evaluation frame (same physical channel).
inline constexpr std::uint64_t kCalibrationSalt = 0x5ca1ab1eull;

struct TwinRun {
  ChainResult a;    ///< signal of interest on, receiver state solved here
  ChainResult b;    ///< signal of interest off, state forced from pass A
  ChainResult cal;  ///< calibration frame (independent data), state from A
};

/// Execute the three passes of the protocol at one operating point.
inline TwinRun run_twin(const TransceiverConfig& cfg, double tx_power_dbm, const SeedSet& seeds,
                        int eval_symbols = kEvalSymbols, int cal_symbols = kCalSymbols) {
  TwinRun t;
  t.a = full_chain(cfg, tx_power_dbm, eval_symbols, seeds, true, {});
  ChainOverrides ov;
  ov.forced_agc_gain_db = t.a.diag.agc_gain_db;
  ov.forced_vm_scale = t.a.diag.vm_scale;
  t.b = full_chain(cfg, tx_power_dbm, eval_symbols, seeds, false, ov);
  SeedSet cal_seeds = seeds;
  cal_seeds.master = Rng::mix(seeds.master, kCalibrationSalt);
  t.cal = full_chain(cfg, tx_power_dbm, cal_symbols, cal_seeds, false, ov);
  return t;
}

struct SinrMeasurement {
  double sinr_db = 0.0;
  double residual_dbm = -kInf;  ///< in-band residual (noise-plus-interference)
};

namespace detail {

inline ComplexSignal signal_diff(const ComplexSignal& a, const ComplexSignal& b) {
  if (a.samples.size() != b.samples.size()) {
    throw std::logic_error("signal_diff: twin passes diverged in length");
  }
  ComplexSignal out;
  out.sample_rate = a.sample_rate;
  out.samples.resize(a.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    out.samples[i] = a.samples[i] - b.samples[i];
  }
  return out;
}

}  // namespace detail

/// SINR and residual power after one digital canceller, given the three
/// chain passes of a twin run.
inline SinrMeasurement sinr_from_twin(const TransceiverConfig& cfg, const TwinRun& t,
                                      CancellerKind kind) {
  const CancellerEstimate est =
      estimate(kind, t.cal.x, t.cal.y, kCancellerMemory, kCancellerOrder);
  const ComplexSignal ca = cancel(est, t.a.x, t.a.y);
  const ComplexSignal cb = cancel(est, t.b.x, t.b.y);
  const ComplexSignal soi = detail::signal_diff(ca, cb);
  const double ps = inband_power(soi, cfg.bandwidth_hz);
  const double pr = inband_power(cb, cfg.bandwidth_hz);
  return {lin_to_db(ps / pr), watts_to_dbm(pr)};
}

/// Full protocol for a single (tx power, canceller) pair.
inline double sinr_twin_run(const TransceiverConfig& cfg, double tx_power_dbm, CancellerKind kind,
                            const SeedSet& seeds) {
  return sinr_from_twin(cfg, run_twin(cfg, tx_power_dbm, seeds), kind).sinr_db;
}

/// Interference-free bound: the same twin protocol on a copy of the config
/// with the self-interference channel removed and no digital canceller.
inline SinrMeasurement sinr_reference(const TransceiverConfig& cfg, double tx_power_dbm,
                                      const SeedSet& seeds, int eval_symbols = kEvalSymbols) {
  TransceiverConfig ref = cfg;
  ref.antenna_separation_db = kInf;
  const ChainResult a = full_chain(ref, tx_power_dbm, eval_symbols, seeds, true, {});
  ChainOverrides ov;
  ov.forced_agc_gain_db = a.diag.agc_gain_db;
  ov.forced_vm_scale = a.diag.vm_scale;
  const ChainResult b = full_chain(ref, tx_power_dbm, eval_symbols, seeds, false, ov);
  const ComplexSignal soi = detail::signal_diff(a.y, b.y);
  const double ps = inband_power(soi, ref.bandwidth_hz);
  const double pr = inband_power(b.y, ref.bandwidth_hz);
  return {lin_to_db(ps / pr), watts_to_dbm(pr)};
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SinrRow {
  double tx_power_dbm = 0.0;
  std::string canceller;  ///< "reference" or a canceller kind name
  double sinr_db = 0.0;
  double residual_dbm = -kInf;
};

struct SinrReport {
  std::vector<SinrRow> rows;
};

/// Sweep transmit power; per point emit one reference row and one row per
/// canceller kind. The physical environment (channel taps, image phases) is
/// held fixed across the sweep while waveforms and noise are redrawn per
/// point from a point-specific master seed.
inline SinrReport sinr_sweep(const TransceiverConfig& cfg, const std::vector<double>& tx_powers,
                             const SeedSet& base_seeds) {
  if (tx_powers.empty()) throw std::invalid_argument("sinr_sweep: empty transmit power grid");
  static constexpr CancellerKind kKinds[] = {CancellerKind::Linear, CancellerKind::WidelyLinear,
                                             CancellerKind::NonlinearPH,
                                             CancellerKind::JointAugmented};
  SinrReport rep;
  rep.rows.reserve(tx_powers.size() * 5);
  for (std::size_t i = 0; i < tx_powers.size(); ++i) {
    SeedSet seeds = base_seeds;
    seeds.master = Rng::mix(base_seeds.master, std::uint64_t(i) + 1);
    const double tx = tx_powers[i];
    const SinrMeasurement ref = sinr_reference(cfg, tx, seeds);
    rep.rows.push_back({tx, "reference", ref.sinr_db, ref.residual_dbm});
    const TwinRun twin = run_twin(cfg, tx, seeds);
    for (CancellerKind kind : kKinds) {
      const SinrMeasurement m = sinr_from_twin(cfg, twin, kind);
      rep.rows.push_back({tx, canceller_name(kind), m.sinr_db, m.residual_dbm});
    }
  }
  return rep;
}

}  // namespace fdx
