#pragma once

// Analytic link-budget calculator: closed-form intermodulation, quantization
// and thermal-noise levels for the full-duplex line-up, plus a per-component
// power budget versus transmit power in the style of a residual-component
// chart at the detector input.

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdx/chain.hpp"
#include "fdx/config.hpp"
#include "fdx/signal.hpp"

namespace fdx {

// ---------------------------------------------------------------------------
// Closed-form component laws
// ---------------------------------------------------------------------------

/// Power of an nth-order intermodulation product from the intercept-point
/// law: p_out - (n - 1) * (iipn - p_in), all in dB/dBm.
inline double nl_power(double p_out_dbm, double p_in_dbm, double iipn_dbm, int n) {
  if (n < 2) throw std::invalid_argument("nl_power: order must be at least 2");
  return p_out_dbm - double(n - 1) * (iipn_dbm - p_in_dbm);
}

/// Converter signal-to-quantization-noise ratio at a given loading backoff.
/// The coefficients are scaled integers so the flagship case (12 bits, 10 dB
/// PAPR) evaluates to exactly 67.0.
inline double adc_snr(int bits, double papr_db) {
  if (bits < 1) throw std::invalid_argument("adc_snr: need at least one bit");
  return double(602 * bits + 476) / 100.0 - papr_db;
}

/// Quantization-noise floor for a converter loaded to p_ad.
inline double quantization_floor(double p_ad_dbm, int bits, double papr_db) {
  return p_ad_dbm - adc_snr(bits, papr_db);
}

// ---------------------------------------------------------------------------
// Thermal-noise budget
// ---------------------------------------------------------------------------

struct ThermalNoisePowers {
  double p_n_rx_w = 0.0;  ///< receiver-induced thermal noise at the detector
  double p_n_tx_w = 0.0;  ///< transmitter-induced thermal noise at the detector
};

namespace detail {

/// Bracket of the transmitter-noise term: vector-modulator path, the antenna
/// coupling correction, and the TX chain noise that crossed the antenna
/// interface and survived RF cancellation.
inline double tx_noise_bracket(const TransceiverConfig& cfg, double tx_power_dbm) {
  const double a2_sq = db_to_lin(-cfg.att_after_vm_db);
  const double avm_sq = db_to_lin(cfg.vm_gain_db);
  const double f_vm = db_to_lin(cfg.vm_nf_db);
  const double a_ant_sq = db_to_lin(-cfg.antenna_separation_db);
  const double a_rf_sq = db_to_lin(-cfg.rf_cancellation_db);
  const double k_pa_sq = db_to_lin(cfg.pa_gain_db);
  const double f_pa = db_to_lin(cfg.pa_nf_db);
  const double f_tx = db_to_lin(cfg.tx_mixer_nf_db);
  const double g_tx_sq = db_to_lin(cfg.tx_mixer_gain_db);
  const double k_vga_sq = db_to_lin(tx_vga_gain_db(cfg, tx_power_dbm));
  return a2_sq * (avm_sq * f_vm - 1.0) - a_ant_sq +
         a_ant_sq * a_rf_sq * k_pa_sq * (f_pa - 1.0 + f_tx * g_tx_sq * k_vga_sq);
}

inline void check_noise_factors(const TransceiverConfig& cfg) {
  for (double nf : {cfg.tx_mixer_nf_db, cfg.pa_nf_db, cfg.vm_nf_db, cfg.lna_nf_db,
                    cfg.rx_mixer_nf_db, cfg.rx_vga_nf_db}) {
    if (db_to_lin(nf) < 1.0) {
      throw std::invalid_argument("thermal_noise_powers: noise factor below one (NF " +
                                  std::to_string(nf) + " dB) is unphysical");
    }
  }
}

}  // namespace detail

/// Split thermal-noise budget at the detector input: the receiver cascade
/// term and the transmitter-induced term, for the given operating point.
inline ThermalNoisePowers thermal_noise_powers(const TransceiverConfig& cfg, double tx_power_dbm,
                                               double rx_vga_gain_db) {
  detail::check_noise_factors(cfg);
  const double pref =
      db_to_lin(cfg.lna_gain_db + cfg.rx_mixer_gain_db + rx_vga_gain_db);
  const double pth = cfg.thermal_floor_w();
  const double bracket = detail::tx_noise_bracket(cfg, tx_power_dbm);
  if (bracket < 0.0) {
    throw std::domain_error(
        "thermal_noise_powers: transmitter-noise bracket is negative (" +
        std::to_string(bracket) +
        "); antenna coupling too strong for this line-up, outside the model's validity");
  }
  ThermalNoisePowers out;
  out.p_n_rx_w = pref * cfg.composite_rx_noise_factor() * pth;
  out.p_n_tx_w = pref * bracket * pth;
  return out;
}

/// Single-expression total of the two thermal terms; by construction equal to
/// the split evaluation to machine precision.
inline double thermal_noise_total_w(const TransceiverConfig& cfg, double tx_power_dbm,
                                    double rx_vga_gain_db) {
  detail::check_noise_factors(cfg);
  const double bracket = detail::tx_noise_bracket(cfg, tx_power_dbm);
  if (bracket < 0.0) {
    throw std::domain_error("thermal_noise_total: negative transmitter-noise bracket");
  }
  return db_to_lin(cfg.lna_gain_db + cfg.rx_mixer_gain_db + rx_vga_gain_db) *
         (cfg.composite_rx_noise_factor() + bracket) * cfg.thermal_floor_w();
}

// ---------------------------------------------------------------------------
// Component power budget versus transmit power
// ---------------------------------------------------------------------------

struct BudgetRow {
  double tx_power_dbm = 0.0;
  double p_si_dbm = 0.0;     ///< linear SI after digital cancellation
  double p_si_im_dbm = 0.0;  ///< conjugate (IQ image) SI residual
  double p_n_rx_dbm = 0.0;   ///< receiver thermal noise
  double p_n_tx_dbm = 0.0;   ///< transmitter-induced noise
  double p_nl_tx_dbm = 0.0;  ///< PA intermodulation residual
  double p_nl_rx_dbm = 0.0;  ///< receiver-stage intermodulation residual
  double p_q_dbm = 0.0;      ///< quantization floor
  double p_soi_dbm = 0.0;    ///< signal of interest
  double rx_vga_gain_db = 0.0;
};

struct PowerBudgetReport {
  std::vector<BudgetRow> rows;
};

namespace detail {

inline double power_sum_dbm(std::initializer_list<double> terms_dbm) {
  double acc = 0.0;
  for (double t : terms_dbm) acc += dbm_to_watts(t);
  return watts_to_dbm(acc);
}

}  // namespace detail

/// Stage-by-stage composition of every detector-input component power.
/// All receive-plane entries are dBm at the detector (post-VGA) plane.
inline PowerBudgetReport budget_sweep(const TransceiverConfig& cfg,
                                      const std::vector<double>& tx_powers_dbm) {
  if (tx_powers_dbm.empty()) throw std::invalid_argument("budget_sweep: empty sweep");
  PowerBudgetReport rep;
  rep.rows.reserve(tx_powers_dbm.size());
  const double pth_dbm = thermal_floor_dbm(cfg.bandwidth_hz);
  const double nf_db = cfg.composite_rx_nf_db();
  const double agc_target_dbm = watts_to_dbm(cfg.agc_target_w());

  for (double tx : tx_powers_dbm) {
    BudgetRow row;
    row.tx_power_dbm = tx;

    // Linear SI at the receiver input after the antenna interface and the
    // RF canceller, and the aggregate power that drives the AGC.
    const double si_in = tx - cfg.antenna_separation_db - cfg.rf_cancellation_db;
    const double noise_in = pth_dbm + nf_db;
    const double total_in = detail::power_sum_dbm({si_in, cfg.soi_power_dbm, noise_in});
    const double in_mix = total_in + cfg.lna_gain_db;
    const double in_vga = in_mix + cfg.rx_mixer_gain_db;
    const double g_vga = std::clamp(agc_target_dbm - in_vga, cfg.rx_vga_min_db,
                                    cfg.rx_vga_max_db);
    row.rx_vga_gain_db = g_vga;
    const double g_det = cfg.lna_gain_db + cfg.rx_mixer_gain_db + g_vga;

    // Thermal terms at this operating point.
    const ThermalNoisePowers tn = thermal_noise_powers(cfg, tx, g_vga);
    row.p_n_rx_dbm = watts_to_dbm(tn.p_n_rx_w);
    row.p_n_tx_dbm = watts_to_dbm(tn.p_n_tx_w);

    // Linear SI before digital cancellation, at the detector plane; the
    // digital canceller then pins the linear residual just below the
    // receiver noise floor.
    const double si_det = si_in + g_det;
    row.p_si_dbm = row.p_n_rx_dbm - cfg.digital_margin_db;

    // Conjugate SI: image contributions of the TX and RX IQ mixers ride on
    // the pre-digital linear SI and are not touched by a linear canceller.
    row.p_si_im_dbm =
        detail::power_sum_dbm({si_det - cfg.tx_irr_db, si_det - cfg.rx_irr_db});

    // PA intermodulation: third-order law at the PA plane, then the same
    // antenna/RF-cancellation path as the SI it rides on.
    const double pa_in = tx - cfg.pa_gain_db;
    row.p_nl_tx_dbm = nl_power(tx, pa_in, cfg.pa_iip3_dbm, 3) -
                      cfg.antenna_separation_db - cfg.rf_cancellation_db + g_det;

    // Receiver-stage intermodulation: second- and third-order products of
    // LNA, mixer and VGA driven by the composite input, referred to the
    // detector.
    struct StageRef {
      double in_dbm, gain_db, to_det_db, iip2, iip3;
    };
    const StageRef stages[] = {
        {total_in, cfg.lna_gain_db, cfg.rx_mixer_gain_db + g_vga, cfg.lna_iip2_dbm,
         cfg.lna_iip3_dbm},
        {in_mix, cfg.rx_mixer_gain_db, g_vga, cfg.rx_mixer_iip2_dbm, cfg.rx_mixer_iip3_dbm},
        {in_vga, g_vga, 0.0, cfg.rx_vga_iip2_dbm, cfg.rx_vga_iip3_dbm},
    };
    double nl_rx_w = 0.0;
    for (const StageRef& st : stages) {
      const double out = st.in_dbm + st.gain_db;
      nl_rx_w += dbm_to_watts(nl_power(out, st.in_dbm, st.iip3, 3) + st.to_det_db);
      nl_rx_w += dbm_to_watts(nl_power(out, st.in_dbm, st.iip2, 2) + st.to_det_db);
    }
    row.p_nl_rx_dbm = watts_to_dbm(nl_rx_w);

    // Quantization floor at the converter loading the AGC establishes.
    row.p_q_dbm = quantization_floor(agc_target_dbm, cfg.adc_bits, cfg.papr_backoff_db);

    // Signal of interest through the receive gain chain.
    row.p_soi_dbm = cfg.soi_power_dbm + g_det;

    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace fdx
