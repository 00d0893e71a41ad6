// fdxsim — full-duplex transceiver simulator command line.
//
// Modes:
//   sinr-sweep    simulate the chain over a transmit-power grid and report
//                 SINR for the reference receiver and each digital canceller
//   budget-sweep  analytic per-component residual power budget over the grid
//   validate      cross-check a configuration's operating ranges
//
// Examples:
//   fdxsim --mode sinr-sweep --out sinr.csv
//   fdxsim --mode budget-sweep --config configs/default.cfg --out budget.csv
//   fdxsim --mode validate --config configs/default.cfg

#include <string>

#include "CLI11.hpp"
#include "fdx/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"in-band full-duplex transceiver simulator"};
  app.get_formatter()->column_width(28);

  fdx::RunSpec spec;
  std::string mode;
  app.add_option("--mode", mode, "sinr-sweep, budget-sweep or validate")->required();
  app.add_option("--config", spec.config_path,
                 "flat key=value configuration file (default: built-in values)")
      ->check(CLI::ExistingFile);
  app.add_option("--tx-min", spec.tx_min_dbm, "grid start in dBm")->capture_default_str();
  app.add_option("--tx-max", spec.tx_max_dbm, "grid end in dBm, inclusive")
      ->capture_default_str();
  app.add_option("--tx-step", spec.tx_step_db, "grid spacing in dB")->capture_default_str();
  app.add_option("--seed", spec.seed, "master seed for waveforms, noise and channel draws")
      ->capture_default_str();
  app.add_option("--out", spec.out_path, "output CSV path (sweep modes)");

  CLI11_PARSE(app, argc, argv);

  try {
    spec.mode = fdx::run_mode_from_name(mode);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return fdx::run(spec);
}
