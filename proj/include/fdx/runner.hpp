#pragma once

/// Experiment runner: expands a transmit-power grid, orchestrates the SINR
/// and power-budget sweeps over a loaded configuration, emits versioned CSV
/// reports, and cross-checks a configuration's operating ranges.
///
/// Reports are assembled fully in memory and written in one pass so an I/O
/// failure never leaves a truncated CSV behind. Identical run specifications
/// produce byte-identical files.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdx/config.hpp"
#include "fdx/linkbudget.hpp"
#include "fdx/metrics.hpp"

namespace fdx {

// ---------------------------------------------------------------------------
// Run specification
// ---------------------------------------------------------------------------

enum class RunMode { SinrSweep, BudgetSweep, Validate };

inline const char* run_mode_name(RunMode m) {
  switch (m) {
    case RunMode::SinrSweep: return "sinr-sweep";
    case RunMode::BudgetSweep: return "budget-sweep";
    case RunMode::Validate: return "validate";
  }
  throw std::logic_error("run_mode_name: bad mode");
}

inline RunMode run_mode_from_name(const std::string& s) {
  if (s == "sinr-sweep") return RunMode::SinrSweep;
  if (s == "budget-sweep") return RunMode::BudgetSweep;
  if (s == "validate") return RunMode::Validate;
  throw std::invalid_argument("unknown mode '" + s +
                              "' (expected sinr-sweep, budget-sweep or validate)");
}

/// One experiment request: which mode, on which config, over which transmit
/// powers, with which seed, into which file. An empty config path means the
/// built-in defaults; the seed feeds both the waveform/noise and the
/// channel/hardware draws of the simulation (SeedSet{seed, seed}).
struct RunSpec {
  std::string config_path;
  RunMode mode = RunMode::Validate;
  double tx_min_dbm = 0.0;
  double tx_max_dbm = 25.0;
  double tx_step_db = 2.5;
  std::uint64_t seed = 2;
  std::string out_path;
};

/// Expand the grid [tx_min, tx_max] in steps of tx_step (inclusive of the
/// endpoint up to a small tolerance against accumulated float error).
inline std::vector<double> tx_grid(const RunSpec& spec) {
  if (!(spec.tx_step_db > 0.0)) throw std::invalid_argument("tx grid: step must be positive");
  if (spec.tx_max_dbm < spec.tx_min_dbm) throw std::invalid_argument("tx grid: max below min");
  const double span = spec.tx_max_dbm - spec.tx_min_dbm;
  const int n = 1 + int(span / spec.tx_step_db + 1e-9);
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) grid[std::size_t(i)] = spec.tx_min_dbm + spec.tx_step_db * i;
  return grid;
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

namespace detail {

/// Fixed CSV number format: six significant digits, default float notation.
inline std::string csv_num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace detail

inline std::string sinr_csv(const SinrReport& rep) {
  std::string out = "# fdxsim sinr-sweep csv v1\n";
  out += "tx_power_dbm,canceller,sinr_db,residual_dbm\n";
  for (const SinrRow& r : rep.rows) {
    out += detail::csv_num(r.tx_power_dbm) + "," + r.canceller + "," +
           detail::csv_num(r.sinr_db) + "," + detail::csv_num(r.residual_dbm) + "\n";
  }
  return out;
}

inline std::string budget_csv(const PowerBudgetReport& rep) {
  std::string out = "# fdxsim budget-sweep csv v1\n";
  out += "tx_power_dbm,p_si,p_si_im,p_n_rx,p_n_tx,p_nl_tx,p_nl_rx,p_q,p_soi\n";
  for (const BudgetRow& r : rep.rows) {
    out += detail::csv_num(r.tx_power_dbm) + "," + detail::csv_num(r.p_si_dbm) + "," +
           detail::csv_num(r.p_si_im_dbm) + "," + detail::csv_num(r.p_n_rx_dbm) + "," +
           detail::csv_num(r.p_n_tx_dbm) + "," + detail::csv_num(r.p_nl_tx_dbm) + "," +
           detail::csv_num(r.p_nl_rx_dbm) + "," + detail::csv_num(r.p_q_dbm) + "," +
           detail::csv_num(r.p_soi_dbm) + "\n";
  }
  return out;
}

/// Single-pass file write; on failure the partial file is removed before the
/// error propagates.
inline void write_report_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open output file '" + path + "'");
  f << content;
  f.flush();
  if (!f) {
    f.close();
    std::remove(path.c_str());
    throw std::runtime_error("failed writing output file '" + path + "' (partial file removed)");
  }
}

// ---------------------------------------------------------------------------
// Configuration cross-checks (validate mode)
// ---------------------------------------------------------------------------

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Operating-range cross-checks over the requested transmit grid. The
/// structural invariants (positivity, VGA min/max ordering, sensitivity
/// coherence) are already enforced when the config is parsed; these checks
/// confirm the sweep can actually run at every grid point.
inline std::vector<CheckResult> validate_config(const TransceiverConfig& cfg,
                                                const std::vector<double>& grid) {
  std::vector<CheckResult> out;
  std::ostringstream os;
  os.precision(4);

  // Stated sensitivity versus thermal floor + cascade NF + SNR requirement.
  {
    const double implied =
        thermal_floor_dbm(cfg.bandwidth_hz) + cfg.composite_rx_nf_db() + cfg.snr_requirement_db;
    os.str("");
    os << "stated " << cfg.sensitivity_dbm << " dBm, implied " << implied << " dBm";
    out.push_back({"sensitivity-arithmetic", std::abs(implied - cfg.sensitivity_dbm) <= 0.1,
                   os.str()});
  }

  // Transmit VGA control range across the grid (monotone in tx power, so the
  // endpoints bound every interior point).
  {
    CheckResult c{"tx-vga-range", true, ""};
    for (double tx : {grid.front(), grid.back()}) {
      try {
        tx_vga_gain_db(cfg, tx);
      } catch (const std::exception& e) {
        c.pass = false;
        c.detail = e.what();
        break;
      }
    }
    if (c.pass) {
      os.str("");
      os << tx_vga_gain_db(cfg, grid.front()) << ".." << tx_vga_gain_db(cfg, grid.back())
         << " dB needed of " << cfg.tx_vga_min_db << ".." << cfg.tx_vga_max_db << " dB available";
      c.detail = os.str();
    }
    out.push_back(c);
  }

  // Receive VGA: the AGC must be able to reach its target level at every
  // grid point without pinning at either end of the control range.
  {
    CheckResult c{"rx-vga-range", true, ""};
    const double target_dbm = watts_to_dbm(cfg.agc_target_w());
    double lo = kInf, hi = -kInf;
    for (double tx : grid) {
      const double si_in = tx - cfg.antenna_separation_db - cfg.rf_cancellation_db;
      const double noise_in = thermal_floor_dbm(cfg.bandwidth_hz) + cfg.composite_rx_nf_db();
      const double total_in = detail::power_sum_dbm({si_in, cfg.soi_power_dbm, noise_in});
      const double needed = target_dbm - (total_in + cfg.lna_gain_db + cfg.rx_mixer_gain_db);
      lo = std::min(lo, needed);
      hi = std::max(hi, needed);
    }
    c.pass = lo >= cfg.rx_vga_min_db && hi <= cfg.rx_vga_max_db;
    os.str("");
    os << lo << ".." << hi << " dB needed of " << cfg.rx_vga_min_db << ".." << cfg.rx_vga_max_db
       << " dB available";
    c.detail = os.str();
    out.push_back(c);
  }

  // Calibration frame length versus the least-squares precondition of the
  // largest canceller (ten rows per unknown).
  {
    const int cols = canceller_columns(CancellerKind::JointAugmented, cfg.canceller_memory,
                                       cfg.canceller_order);
    const long have = long(cfg.calibration_symbols) * cfg.ofdm().symbol_len();
    const long need = 10L * cols;
    os.str("");
    os << have << " calibration samples, " << need << " required for " << cols << " unknowns";
    out.push_back({"calibration-length", have >= need, os.str()});
  }

  return out;
}

// ---------------------------------------------------------------------------
// Top-level dispatch
// ---------------------------------------------------------------------------

/// Execute a run specification. Returns the process exit status: 0 on
/// success, 1 when a validate check fails (the failing check is named on
/// err), 2 on configuration or I/O errors.
inline int run(const RunSpec& spec, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  TransceiverConfig cfg;
  try {
    if (!spec.config_path.empty()) {
      cfg = load_config(spec.config_path);
    } else {
      cfg.validate();
    }
  } catch (const std::exception& e) {
    err << "[FAIL] config-load — " << e.what() << "\n";
    return spec.mode == RunMode::Validate ? 1 : 2;
  }

  std::vector<double> grid;
  try {
    grid = tx_grid(spec);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  switch (spec.mode) {
    case RunMode::Validate: {
      out << "[PASS] config-load — " << (spec.config_path.empty() ? "built-in defaults"
                                                                  : spec.config_path)
          << "\n";
      int failures = 0;
      for (const CheckResult& c : validate_config(cfg, grid)) {
        out << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " — " << c.detail << "\n";
        if (!c.pass) {
          ++failures;
          err << "validate: check '" << c.name << "' failed\n";
        }
      }
      return failures == 0 ? 0 : 1;
    }
    case RunMode::BudgetSweep:
    case RunMode::SinrSweep: {
      if (spec.out_path.empty()) {
        err << "error: mode " << run_mode_name(spec.mode) << " requires an output path\n";
        return 2;
      }
      try {
        const std::string csv = spec.mode == RunMode::BudgetSweep
                                    ? budget_csv(budget_sweep(cfg, grid))
                                    : sinr_csv(sinr_sweep(cfg, grid,
                                                          SeedSet{spec.seed, spec.seed}));
        write_report_file(spec.out_path, csv);
      } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
      }
      out << "wrote " << spec.out_path << " (" << grid.size() << " grid points)\n";
      return 0;
    }
  }
  return 2;
}

}  // namespace fdx
