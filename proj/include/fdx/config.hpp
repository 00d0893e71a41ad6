#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdx/ofdm.hpp"
#include "fdx/signal.hpp"

namespace fdx {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Transceiver and waveform parameters. Defaults describe the reference
/// line-up: a direct-conversion full-duplex transceiver with a 12.5 MHz
/// channel, 16-QAM OFDM at 64 Msps, a 40 dB antenna interface, a 30 dB
/// vector-modulator RF canceller and a 12-bit converter.
struct TransceiverConfig {
  // System-level parameters.
  double snr_requirement_db = 10.0;
  double bandwidth_hz = 12.5e6;
  double sensitivity_dbm = -88.9;
  double soi_power_dbm = -83.9;
  double antenna_separation_db = 40.0;  // inf disables the self-interference path
  double rf_cancellation_db = 30.0;     // inf disables the RF canceller stage
  double att_before_vm_db = 15.0;
  double att_after_vm_db = 15.0;
  double tx_irr_db = 30.0;  // inf = ideal IQ modulator
  double rx_irr_db = 30.0;
  int adc_bits = 12;
  double adc_vpp = 4.5;
  double papr_backoff_db = 10.0;

  // Component line-up (gain / NF / intercept points, dB and dBm).
  double tx_mixer_gain_db = 6.0;
  double tx_mixer_nf_db = 10.0;
  double tx_vga_min_db = 0.0;
  double tx_vga_max_db = 30.0;
  double pa_gain_db = 27.0;
  double pa_iip3_dbm = 13.0;
  double pa_nf_db = 5.0;
  double vm_gain_db = -10.0;
  double vm_nf_db = 20.0;
  double lna_gain_db = 25.0;
  double lna_iip2_dbm = 43.0;
  double lna_iip3_dbm = -9.0;
  double lna_nf_db = 4.1;
  double rx_mixer_gain_db = 6.0;
  double rx_mixer_iip2_dbm = 42.0;
  double rx_mixer_iip3_dbm = 15.0;
  double rx_mixer_nf_db = 4.0;
  double rx_vga_min_db = 0.0;
  double rx_vga_max_db = 69.0;
  double rx_vga_iip2_dbm = 43.0;
  double rx_vga_iip3_dbm = 14.0;
  double rx_vga_nf_db = 4.0;

  // Waveform and channel.
  int n_subcarriers = 64;
  int n_data_subcarriers = 48;
  int guard_samples = 16;
  int oversampling = 4;
  double chip_rate_hz = 16e6;
  double k_factor_db = 35.8;  // inf = line-of-sight only
  int n_diffuse_taps = 7;
  double diffuse_decay_db_per_tap = 3.0;

  // Simulator knobs.
  double dac_power_dbm = -35.0;
  int calibration_symbols = 32;
  int evaluation_symbols = 63;
  int canceller_memory = 10;
  int canceller_order = 5;
  int pa_order = 5;
  double pa_fifth_order_ref_w = 0.2;
  double digital_margin_db = 3.0;
  bool nonlinearities_enabled = true;
  bool adc_enabled = true;

  double sample_rate_hz() const { return chip_rate_hz * oversampling; }
  double thermal_floor_w() const { return dbm_to_watts(thermal_floor_dbm(bandwidth_hz)); }

  /// Full-scale sine power of the converter: a complex tone whose envelope
  /// spans the peak-to-peak range on each rail, referred to 50 ohm.
  double adc_full_scale_w() const {
    const double vp = adc_vpp / 2.0;
    return vp * vp / 100.0;
  }
  /// AGC output target: full-scale sine power backed off by the PAPR allowance.
  double agc_target_w() const { return adc_full_scale_w() / db_to_lin(papr_backoff_db); }

  /// Cascade (Friis) noise factor of the receive line-up referred to the
  /// antenna: LNA, mixer and VGA excesses divided down by the preceding gains.
  double composite_rx_noise_factor() const {
    const double f_lna = db_to_lin(lna_nf_db);
    const double f_mix = db_to_lin(rx_mixer_nf_db);
    const double f_vga = db_to_lin(rx_vga_nf_db);
    const double g_lna = db_to_lin(lna_gain_db);
    const double g_mix = db_to_lin(rx_mixer_gain_db);
    return f_lna + (f_mix - 1.0) / g_lna + (f_vga - 1.0) / (g_lna * g_mix);
  }
  double composite_rx_nf_db() const { return lin_to_db(composite_rx_noise_factor()); }

  OfdmParams ofdm() const {
    OfdmParams p;
    p.n_subcarriers = n_subcarriers;
    p.n_data = n_data_subcarriers;
    p.guard = guard_samples;
    p.oversampling = oversampling;
    p.chip_rate_hz = chip_rate_hz;
    return p;
  }

  void validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
    if (!(bandwidth_hz > 0.0)) fail("bandwidth_hz must be positive");
    if (bandwidth_hz > sample_rate_hz()) fail("bandwidth_hz exceeds the sample rate");
    if (adc_bits < 1 || adc_bits > 32) fail("adc_bits out of range [1,32]");
    if (!(adc_vpp > 0.0)) fail("adc_vpp must be positive");
    if (antenna_separation_db < 0.0) fail("antenna_separation_db must be non-negative");
    if (rf_cancellation_db < 0.0) fail("rf_cancellation_db must be non-negative");
    if (tx_irr_db < 0.0 || rx_irr_db < 0.0) fail("image rejection ratios must be non-negative");
    if (tx_vga_max_db < tx_vga_min_db) fail("tx vga range is inverted");
    if (rx_vga_max_db < rx_vga_min_db) fail("rx vga range is inverted");
    for (double nf : {tx_mixer_nf_db, pa_nf_db, vm_nf_db, lna_nf_db, rx_mixer_nf_db, rx_vga_nf_db}) {
      if (nf < 0.0) fail("noise figures must be non-negative");
    }
    if (n_diffuse_taps < 0) fail("n_diffuse_taps must be non-negative");
    if (std::isfinite(k_factor_db) && n_diffuse_taps == 0) {
      fail("finite k_factor_db requires at least one diffuse tap");
    }
    if (calibration_symbols < 1 || evaluation_symbols < 1) fail("frame lengths must be positive");
    if (canceller_memory < 1) fail("canceller_memory must be positive");
    if (canceller_order < 1 || canceller_order % 2 == 0) fail("canceller_order must be odd");
    if (pa_order < 1 || pa_order % 2 == 0) fail("pa_order must be odd");
    if (!(pa_fifth_order_ref_w > 0.0)) fail("pa_fifth_order_ref_w must be positive");
    // Link-budget coherence: the stated sensitivity must equal thermal floor
    // plus receiver noise figure plus the SNR requirement.
    const double implied =
        thermal_floor_dbm(bandwidth_hz) + composite_rx_nf_db() + snr_requirement_db;
    if (std::abs(implied - sensitivity_dbm) > 0.1) {
      fail("sensitivity_dbm inconsistent with thermal floor + receiver NF + SNR requirement (" +
           std::to_string(implied) + " dBm implied vs " + std::to_string(sensitivity_dbm) +
           " dBm stated)");
    }
    ofdm().validate();
  }
};

namespace detail {

struct ConfigFields {
  std::map<std::string, double TransceiverConfig::*> d;
  std::map<std::string, int TransceiverConfig::*> i;
  std::map<std::string, bool TransceiverConfig::*> b;
  std::vector<std::string> order;

  ConfigFields() {
    auto add_d = [&](const char* k, double TransceiverConfig::*p) {
      d[k] = p;
      order.push_back(k);
    };
    auto add_i = [&](const char* k, int TransceiverConfig::*p) {
      i[k] = p;
      order.push_back(k);
    };
    auto add_b = [&](const char* k, bool TransceiverConfig::*p) {
      b[k] = p;
      order.push_back(k);
    };
    add_d("snr_requirement_db", &TransceiverConfig::snr_requirement_db);
    add_d("bandwidth_hz", &TransceiverConfig::bandwidth_hz);
    add_d("sensitivity_dbm", &TransceiverConfig::sensitivity_dbm);
    add_d("soi_power_dbm", &TransceiverConfig::soi_power_dbm);
    add_d("antenna_separation_db", &TransceiverConfig::antenna_separation_db);
    add_d("rf_cancellation_db", &TransceiverConfig::rf_cancellation_db);
    add_d("att_before_vm_db", &TransceiverConfig::att_before_vm_db);
    add_d("att_after_vm_db", &TransceiverConfig::att_after_vm_db);
    add_d("tx_irr_db", &TransceiverConfig::tx_irr_db);
    add_d("rx_irr_db", &TransceiverConfig::rx_irr_db);
    add_i("adc_bits", &TransceiverConfig::adc_bits);
    add_d("adc_vpp", &TransceiverConfig::adc_vpp);
    add_d("papr_backoff_db", &TransceiverConfig::papr_backoff_db);
    add_d("tx_mixer_gain_db", &TransceiverConfig::tx_mixer_gain_db);
    add_d("tx_mixer_nf_db", &TransceiverConfig::tx_mixer_nf_db);
    add_d("tx_vga_min_db", &TransceiverConfig::tx_vga_min_db);
    add_d("tx_vga_max_db", &TransceiverConfig::tx_vga_max_db);
    add_d("pa_gain_db", &TransceiverConfig::pa_gain_db);
    add_d("pa_iip3_dbm", &TransceiverConfig::pa_iip3_dbm);
    add_d("pa_nf_db", &TransceiverConfig::pa_nf_db);
    add_d("vm_gain_db", &TransceiverConfig::vm_gain_db);
    add_d("vm_nf_db", &TransceiverConfig::vm_nf_db);
    add_d("lna_gain_db", &TransceiverConfig::lna_gain_db);
    add_d("lna_iip2_dbm", &TransceiverConfig::lna_iip2_dbm);
    add_d("lna_iip3_dbm", &TransceiverConfig::lna_iip3_dbm);
    add_d("lna_nf_db", &TransceiverConfig::lna_nf_db);
    add_d("rx_mixer_gain_db", &TransceiverConfig::rx_mixer_gain_db);
    add_d("rx_mixer_iip2_dbm", &TransceiverConfig::rx_mixer_iip2_dbm);
    add_d("rx_mixer_iip3_dbm", &TransceiverConfig::rx_mixer_iip3_dbm);
    add_d("rx_mixer_nf_db", &TransceiverConfig::rx_mixer_nf_db);
    add_d("rx_vga_min_db", &TransceiverConfig::rx_vga_min_db);
    add_d("rx_vga_max_db", &TransceiverConfig::rx_vga_max_db);
    add_d("rx_vga_iip2_dbm", &TransceiverConfig::rx_vga_iip2_dbm);
    add_d("rx_vga_iip3_dbm", &TransceiverConfig::rx_vga_iip3_dbm);
    add_d("rx_vga_nf_db", &TransceiverConfig::rx_vga_nf_db);
    add_i("n_subcarriers", &TransceiverConfig::n_subcarriers);
    add_i("n_data_subcarriers", &TransceiverConfig::n_data_subcarriers);
    add_i("guard_samples", &TransceiverConfig::guard_samples);
    add_i("oversampling", &TransceiverConfig::oversampling);
    add_d("chip_rate_hz", &TransceiverConfig::chip_rate_hz);
    add_d("k_factor_db", &TransceiverConfig::k_factor_db);
    add_i("n_diffuse_taps", &TransceiverConfig::n_diffuse_taps);
    add_d("diffuse_decay_db_per_tap", &TransceiverConfig::diffuse_decay_db_per_tap);
    add_d("dac_power_dbm", &TransceiverConfig::dac_power_dbm);
    add_i("calibration_symbols", &TransceiverConfig::calibration_symbols);
    add_i("evaluation_symbols", &TransceiverConfig::evaluation_symbols);
    add_i("canceller_memory", &TransceiverConfig::canceller_memory);
    add_i("canceller_order", &TransceiverConfig::canceller_order);
    add_i("pa_order", &TransceiverConfig::pa_order);
    add_d("pa_fifth_order_ref_w", &TransceiverConfig::pa_fifth_order_ref_w);
    add_d("digital_margin_db", &TransceiverConfig::digital_margin_db);
    add_b("nonlinearities_enabled", &TransceiverConfig::nonlinearities_enabled);
    add_b("adc_enabled", &TransceiverConfig::adc_enabled);
  }

  static const ConfigFields& instance() {
    static ConfigFields f;
    return f;
  }
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& v, const std::string& key) {
  if (v == "inf" || v == "+inf") return kInf;
  if (v == "-inf") return -kInf;
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad numeric value '" + v + "' for key '" + key + "'");
  }
}

}  // namespace detail

/// Apply a single key=value assignment; unknown keys and malformed values are
/// errors so typos never silently fall back to defaults.
inline void apply_config_entry(TransceiverConfig& cfg, const std::string& key,
                               const std::string& value) {
  const auto& f = detail::ConfigFields::instance();
  if (auto it = f.d.find(key); it != f.d.end()) {
    cfg.*(it->second) = detail::parse_double(value, key);
    return;
  }
  if (auto it = f.i.find(key); it != f.i.end()) {
    const double x = detail::parse_double(value, key);
    if (x != std::floor(x) || !std::isfinite(x)) {
      throw std::invalid_argument("config: key '" + key + "' requires an integer, got '" + value + "'");
    }
    cfg.*(it->second) = int(x);
    return;
  }
  if (auto it = f.b.find(key); it != f.b.end()) {
    if (value == "true" || value == "1") {
      cfg.*(it->second) = true;
    } else if (value == "false" || value == "0") {
      cfg.*(it->second) = false;
    } else {
      throw std::invalid_argument("config: key '" + key + "' requires a boolean, got '" + value + "'");
    }
    return;
  }
  throw std::invalid_argument("config: unknown key '" + key + "'");
}

/// Parse flat key=value text. '#' starts a comment; blank lines are ignored.
inline TransceiverConfig parse_config(std::istream& in) {
  TransceiverConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not a key=value assignment: '" + line + "'");
    }
    apply_config_entry(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

/// Serialize every key in registry order as flat key=value text. Doubles are
/// printed with enough digits to round-trip exactly: parse_config(dump_config
/// (cfg)) reproduces cfg bit-for-bit.
inline std::string dump_config(const TransceiverConfig& cfg) {
  const auto& f = detail::ConfigFields::instance();
  std::ostringstream out;
  out.precision(17);
  for (const std::string& key : f.order) {
    out << key << " = ";
    if (auto it = f.d.find(key); it != f.d.end()) {
      const double v = cfg.*(it->second);
      if (std::isinf(v)) {
        out << (v > 0 ? "inf" : "-inf");
      } else {
        out << v;
      }
    } else if (auto it2 = f.i.find(key); it2 != f.i.end()) {
      out << cfg.*(it2->second);
    } else {
      out << (cfg.*(f.b.at(key)) ? "true" : "false");
    }
    out << "\n";
  }
  return out.str();
}

inline TransceiverConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  try {
    return parse_config(in);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(e.what()) + " [" + path + "]");
  }
}

}  // namespace fdx
