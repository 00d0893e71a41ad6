#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdx/config.hpp"
#include "fdx/signal.hpp"

namespace fdx {

// ---------------------------------------------------------------------------
// Widely-linear IQ imbalance
// ---------------------------------------------------------------------------

/// Frequency-flat (or short-FIR) widely-linear response
/// y = direct * x + conjugate * conj(x).
struct WidelyLinearResponse {
  cvec direct{cd(1, 0)};
  cvec conjugate{};  // empty = no image path
};

inline ComplexSignal apply_wl(const ComplexSignal& s, const WidelyLinearResponse& r) {
  if (r.direct.empty()) throw std::invalid_argument("apply_wl: empty direct taps");
  ComplexSignal out;
  out.sample_rate = s.sample_rate;
  out.samples = convolve_trunc(s.samples, r.direct);
  if (!r.conjugate.empty()) {
    cvec c(s.samples.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = std::conj(s.samples[i]);
    const cvec img = convolve_trunc(c, r.conjugate);
    for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] += img[i];
  }
  return out;
}

/// Build a single-tap widely-linear response from an image-rejection ratio.
/// IRR fixes |direct|^2 / |conjugate|^2; the image tap carries the given
/// phase. irr_db = inf yields an ideal (image-free) response.
inline WidelyLinearResponse irr_to_response(double irr_db, double image_phase_rad,
                                            double gain_db = 0.0) {
  if (irr_db < 0.0) throw std::invalid_argument("irr_to_response: negative IRR");
  WidelyLinearResponse r;
  const double g1 = std::sqrt(db_to_lin(gain_db));
  r.direct = {cd(g1, 0)};
  if (std::isfinite(irr_db)) {
    const double mag = g1 * std::pow(10.0, -irr_db / 20.0);
    r.conjugate = {std::polar(mag, image_phase_rad)};
  }
  return r;
}

/// Power gain of a widely-linear response for a proper (circular) input.
inline double wl_power_gain(const WidelyLinearResponse& r) {
  double g = 0.0;
  for (const cd& t : r.direct) g += std::norm(t);
  for (const cd& t : r.conjugate) g += std::norm(t);
  return g;
}

// ---------------------------------------------------------------------------
// Parallel-Hammerstein power amplifier
// ---------------------------------------------------------------------------

/// Parallel-Hammerstein model: y = sum_p taps_p * psi_p(x) over odd p with
/// psi_p(x) = |x|^(p-1) x. branches[i] holds the FIR taps of order p = 2i+1.
struct PhModel {
  int order = 3;
  std::vector<cvec> branches;

  void validate() const {
    if (order < 1 || order % 2 == 0) throw std::invalid_argument("ph: order must be odd and >= 1");
    if (branches.size() != std::size_t((order + 1) / 2))
      throw std::invalid_argument("ph: branch count must be (order+1)/2");
    for (const auto& b : branches) {
      if (b.empty()) throw std::invalid_argument("ph: empty branch taps");
    }
  }
};

inline cvec ph_basis(const cvec& x, int p) {
  if (p < 1 || p % 2 == 0) throw std::invalid_argument("ph_basis: order must be odd and >= 1");
  cvec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::abs(x[i]);
    out[i] = std::pow(a, p - 1) * x[i];
  }
  return out;
}

inline ComplexSignal apply_ph(const ComplexSignal& s, const PhModel& m) {
  m.validate();
  ComplexSignal out;
  out.sample_rate = s.sample_rate;
  out.samples.assign(s.samples.size(), cd(0, 0));
  for (std::size_t b = 0; b < m.branches.size(); ++b) {
    const int p = int(2 * b + 1);
    const cvec psi = (p == 1) ? s.samples : ph_basis(s.samples, p);
    const cvec y = convolve_trunc(psi, m.branches[b]);
    for (std::size_t i = 0; i < y.size(); ++i) out.samples[i] += y[i];
  }
  return out;
}

/// Default short memory profile: a dominant leading tap with two small echoes
/// of alternating sign, giving a fraction of a dB of in-band gain ripple. The
/// taps are normalized to unit DC gain so the branch gain is not biased.
inline cvec default_pa_memory() {
  const double s = 1.0 / 0.96;
  return {cd(1.0 * s, 0), cd(-0.05 * s, 0), cd(0.01 * s, 0)};
}

/// Build a PA model from line-up numbers. The linear branch carries the
/// amplitude gain; the cubic branch is compressive with magnitude gain/IIP3
/// (in watt units), which reproduces the classic per-tone intermodulation
/// law p_im3 = p_out - 2 (iip3 - p_in) exactly. The optional quintic branch
/// is scaled from the cubic one by a reference envelope power.
inline PhModel pa_from_specs(double gain_db, double iip3_dbm, int order = 5,
                             cvec memory = default_pa_memory(),
                             double fifth_order_ref_w = 0.2) {
  if (order < 3 || order % 2 == 0)
    throw std::invalid_argument("pa_from_specs: order must be odd and >= 3");
  if (memory.empty()) throw std::invalid_argument("pa_from_specs: empty memory profile");
  if (!(fifth_order_ref_w > 0.0))
    throw std::invalid_argument("pa_from_specs: fifth-order reference must be positive");
  PhModel m;
  m.order = order;
  const double g1 = std::sqrt(db_to_lin(gain_db));
  m.branches.resize(std::size_t((order + 1) / 2));
  m.branches[0] = memory;
  for (cd& t : m.branches[0]) t *= g1;
  double prev = 0.0;
  if (std::isfinite(iip3_dbm) && order >= 3) {
    const double a3 = -g1 / dbm_to_watts(iip3_dbm);
    m.branches[1] = memory;
    for (cd& t : m.branches[1]) t *= a3;
    prev = a3;
  } else {
    for (std::size_t b = 1; b < m.branches.size(); ++b) m.branches[b] = {cd(0, 0)};
  }
  if (std::isfinite(iip3_dbm) && order >= 5) {
    const double a5 = prev / fifth_order_ref_w;
    m.branches[2] = memory;
    for (cd& t : m.branches[2]) t *= a5;
    for (std::size_t b = 3; b < m.branches.size(); ++b) m.branches[b] = {cd(0, 0)};
  }
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Generic analog stage: memoryless distortion + gain + additive noise
// ---------------------------------------------------------------------------

struct StageSpec {
  double gain_db = 0.0;
  double nf_db = 0.0;
  double iip2_dbm = kInf;
  double iip3_dbm = kInf;
  std::string name = "stage";
};

/// Apply one analog stage. The polynomial model
///   y = a1 x + a2 |x|^2 - a3 |x|^2 x
/// uses a1 = sqrt(g), a2 = sqrt(g / iip2_w), a3 = sqrt(g) / iip3_w (watt
/// units), so the second/third-order product powers follow
/// p_imn = p_out - (n-1)(iipn - p_in) exactly, and the cubic is compressive.
/// Stage noise (F - 1) g p_th is band-limited to the configured bandwidth.
inline ComplexSignal apply_stage(const ComplexSignal& s, const StageSpec& st, double bandwidth_hz,
                                 Rng& rng) {
  if (st.nf_db < 0.0) throw std::invalid_argument("apply_stage: negative noise figure (" + st.name + ")");
  const double g = db_to_lin(st.gain_db);
  const double a1 = std::sqrt(g);
  const double a2 = std::isfinite(st.iip2_dbm) ? std::sqrt(g / dbm_to_watts(st.iip2_dbm)) : 0.0;
  const double a3 = std::isfinite(st.iip3_dbm) ? a1 / dbm_to_watts(st.iip3_dbm) : 0.0;
  ComplexSignal out;
  out.sample_rate = s.sample_rate;
  out.samples.resize(s.samples.size());
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    const cd x = s.samples[i];
    const double e2 = std::norm(x);
    out.samples[i] = a1 * x + cd(a2 * e2, 0.0) - a3 * e2 * x;
  }
  const double p_noise = (db_to_lin(st.nf_db) - 1.0) * g * dbm_to_watts(thermal_floor_dbm(bandwidth_hz));
  if (p_noise > 0.0 && !out.samples.empty()) {
    const cvec n = band_noise_samples(out.samples.size(), p_noise, s.sample_rate, bandwidth_hz, rng);
    for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] += n[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Self-interference channel
// ---------------------------------------------------------------------------

/// Rician multipath between PA output and LNA input. Tap 0 is the
/// line-of-sight component; diffuse taps follow at sample spacing with an
/// exponentially decaying power profile. The realized taps are normalized so
/// the total power gain equals the configured antenna separation exactly.
struct SiChannel {
  cvec taps{cd(0, 0)};
  double k_factor_db = kInf;
  double total_gain_db = -kInf;

  bool is_zero() const {
    for (const cd& t : taps) {
      if (t != cd(0, 0)) return false;
    }
    return true;
  }
};

inline SiChannel draw_si_channel(double k_factor_db, double antenna_separation_db, int n_diffuse,
                                 Rng& rng, double decay_db_per_tap = 3.0) {
  if (antenna_separation_db < 0.0)
    throw std::invalid_argument("draw_si_channel: negative antenna separation");
  SiChannel ch;
  ch.k_factor_db = k_factor_db;
  ch.total_gain_db = -antenna_separation_db;
  if (std::isinf(antenna_separation_db)) {
    ch.taps = {cd(0, 0)};
    return ch;
  }
  const double g = db_to_lin(-antenna_separation_db);
  if (std::isinf(k_factor_db)) {
    ch.taps = {cd(std::sqrt(g), 0)};
    return ch;
  }
  if (n_diffuse < 1)
    throw std::invalid_argument("draw_si_channel: finite K-factor requires diffuse taps");
  const double k = db_to_lin(k_factor_db);
  ch.taps.assign(std::size_t(n_diffuse) + 1, cd(0, 0));
  ch.taps[0] = cd(std::sqrt(g * k / (k + 1.0)), 0.0);
  double profile_sum = 0.0;
  for (int i = 0; i < n_diffuse; ++i) profile_sum += db_to_lin(-decay_db_per_tap * i);
  const double v0 = g / ((k + 1.0) * profile_sum);
  double raw = 0.0;
  for (int i = 0; i < n_diffuse; ++i) {
    const double v = v0 * db_to_lin(-decay_db_per_tap * i);
    const cd t = std::sqrt(v) * rng.cgauss();
    ch.taps[std::size_t(i) + 1] = t;
    raw += std::norm(t);
  }
  // Normalize the diffuse block to its exact Rician share so that both the
  // total gain and the LOS/diffuse power split are exact per realization
  // (tap phases and the inter-tap profile stay random).
  const double fix = std::sqrt(g / ((k + 1.0) * raw));
  for (int i = 0; i < n_diffuse; ++i) ch.taps[std::size_t(i) + 1] *= fix;
  return ch;
}

inline ComplexSignal apply_channel(const ComplexSignal& s, const SiChannel& ch) {
  return {convolve_trunc(s.samples, ch.taps), s.sample_rate};
}

// ---------------------------------------------------------------------------
// Vector-modulator RF cancellation
// ---------------------------------------------------------------------------

struct RfCancResult {
  ComplexSignal out;
  double vm_scale = 0.0;        // real weight applied to the LOS-matched tap
  double suppression_db = 0.0;  // realized SI suppression
};

/// Cancel the line-of-sight part of the self-interference by feeding an
/// attenuated, vector-modulated copy of the PA output into the receive
/// combiner. The modulator weight is tuned against the known SI waveform so
/// the realized suppression hits cfg.rf_cancellation_db exactly; of the two
/// admissible weights the smaller (undershooting) one is chosen. The
/// modulator injects its own thermal noise behind the second attenuator.
inline RfCancResult rf_cancellation(const ComplexSignal& rx_in, const ComplexSignal& pa_out,
                                    const SiChannel& ch, const TransceiverConfig& cfg, Rng& rng,
                                    const cvec* si_reference = nullptr,
                                    std::optional<double> forced_scale = std::nullopt) {
  if (rx_in.samples.size() != pa_out.samples.size())
    throw std::invalid_argument("rf_cancellation: signal length mismatch");
  RfCancResult res;
  res.out = rx_in;
  if (std::isinf(cfg.rf_cancellation_db) || ch.is_zero()) {
    res.vm_scale = 0.0;
    res.suppression_db = 0.0;
    return res;
  }
  cvec si_local;
  const cvec* si = si_reference;
  if (si == nullptr) {
    si_local = convolve_trunc(pa_out.samples, ch.taps);
    si = &si_local;
  }
  const double p_si = measure_power(*si);
  const double los = std::abs(ch.taps[0]);

  double s_weight;
  if (forced_scale) {
    s_weight = *forced_scale;
  } else if (p_si == 0.0) {
    // Nothing to cancel (e.g. the transmitter is silent): keep the modulator
    // idle but leave its noise path live.
    s_weight = 0.0;
  } else if (los == 0.0) {
    throw std::invalid_argument("rf_cancellation: no line-of-sight component to cancel");
  } else {
    // Residual power as a function of the real weight s applied to los*pa_out:
    //   P(s) = p_si + b s + a s^2,  a = los^2 * p_pa,  b = -2 los Re<si, pa>.
    const double p_pa = measure_power(pa_out);
    double cross = 0.0;
    for (std::size_t i = 0; i < si->size(); ++i) {
      cross += ((*si)[i] * std::conj(pa_out.samples[i])).real();
    }
    cross /= double(si->size());
    const double a = los * los * p_pa;
    const double b = -2.0 * los * cross;
    const double target = p_si * db_to_lin(-cfg.rf_cancellation_db);
    const double best = p_si - b * b / (4.0 * a);  // minimum of P(s)
    if (best > target) {
      const double bound = 10.0 * std::log10(p_si / std::max(best, 1e-300));
      throw std::runtime_error(
          "rf_cancellation: requested " + std::to_string(cfg.rf_cancellation_db) +
          " dB exceeds the line-of-sight-matched limit of " + std::to_string(bound) + " dB");
    }
    const double disc = std::sqrt(b * b - 4.0 * a * (p_si - target));
    s_weight = (-b - disc) / (2.0 * a);
  }
  res.vm_scale = s_weight;

  // Cancellation path: weight * los * pa_out plus VM noise behind the second
  // attenuator. The weight directly multiplies the LOS tap.
  const double att2 = db_to_lin(-cfg.att_after_vm_db);
  const double p_vm_noise =
      (db_to_lin(cfg.vm_nf_db) - 1.0) * db_to_lin(cfg.vm_gain_db) * att2 * cfg.thermal_floor_w();
  cvec noise;
  if (p_vm_noise > 0.0) {
    noise = band_noise_samples(rx_in.samples.size(), p_vm_noise, rx_in.sample_rate,
                               cfg.bandwidth_hz, rng);
  }
  const double w = s_weight * los;
  double p_resid = 0.0;
  for (std::size_t i = 0; i < res.out.samples.size(); ++i) {
    res.out.samples[i] -= w * pa_out.samples[i];
    if (!noise.empty()) res.out.samples[i] += noise[i];
    const cd r = (*si)[i] - w * pa_out.samples[i];
    p_resid += std::norm(r);
  }
  p_resid /= double(res.out.samples.size());
  res.suppression_db =
      p_si > 0.0 ? 10.0 * std::log10(p_si / std::max(p_resid, 1e-300)) : 0.0;
  return res;
}

// ---------------------------------------------------------------------------
// AGC and quantization
// ---------------------------------------------------------------------------

/// Gain (dB) that brings a measured power to the AGC target at the converter.
inline double solve_agc_gain_db(double measured_w, const TransceiverConfig& cfg) {
  if (!(measured_w > 0.0)) throw std::invalid_argument("agc: cannot level a zero-power signal");
  return 10.0 * std::log10(cfg.agc_target_w() / measured_w);
}

/// Mid-rise uniform quantizer per rail, clipping at the full-scale sine
/// amplitude. full_scale_sine_w is the power of a complex tone whose rails
/// exactly span the converter range.
inline ComplexSignal quantize(const ComplexSignal& s, int bits, double full_scale_sine_w,
                              std::size_t* clipped = nullptr) {
  if (bits < 1 || bits > 32) throw std::invalid_argument("quantize: bits out of range [1,32]");
  if (!(full_scale_sine_w > 0.0)) throw std::invalid_argument("quantize: full scale must be positive");
  const double ufs = std::sqrt(full_scale_sine_w);
  const double step = 2.0 * ufs / double(1u << bits);
  const double lo = -double(1u << (bits - 1));
  const double hi = double(1u << (bits - 1)) - 1.0;
  std::size_t clips = 0;
  auto q = [&](double v) {
    double code = std::floor(v / step);
    if (code < lo) {
      code = lo;
      ++clips;
    } else if (code > hi) {
      code = hi;
      ++clips;
    }
    return (code + 0.5) * step;
  };
  ComplexSignal out;
  out.sample_rate = s.sample_rate;
  out.samples.resize(s.samples.size());
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    out.samples[i] = cd(q(s.samples[i].real()), q(s.samples[i].imag()));
  }
  if (clipped) *clipped = clips;
  return out;
}

struct AgcAdcResult {
  ComplexSignal out;
  double gain_db = 0.0;
  std::size_t clipped = 0;
};

/// Level the signal to the AGC target, then quantize.
inline AgcAdcResult agc_adc(const ComplexSignal& s, const TransceiverConfig& cfg,
                            std::optional<double> forced_gain_db = std::nullopt) {
  AgcAdcResult r;
  r.gain_db = forced_gain_db ? *forced_gain_db : solve_agc_gain_db(measure_power(s), cfg);
  const double a = std::sqrt(db_to_lin(r.gain_db));
  ComplexSignal level;
  level.sample_rate = s.sample_rate;
  level.samples.resize(s.samples.size());
  for (std::size_t i = 0; i < s.samples.size(); ++i) level.samples[i] = a * s.samples[i];
  r.out = quantize(level, cfg.adc_bits, cfg.adc_full_scale_w(), &r.clipped);
  return r;
}

}  // namespace fdx
