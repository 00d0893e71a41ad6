#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "fdx/metrics.hpp"
#include "fdx/ofdm.hpp"

using namespace fdx;

namespace {

ComplexSignal tone(std::size_t n, std::size_t bin, double amp = 0.1) {
  ComplexSignal s;
  s.sample_rate = double(n);
  s.samples.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    s.samples[t] = std::polar(amp, 2.0 * std::numbers::pi * double(bin) * double(t) / double(n));
  }
  return s;
}

}  // namespace

TEST_CASE("measure_irr closes the loop with irr_to_response") {
  const ComplexSignal ref = tone(1024, 37);

  SECTION("30 dB response measures 30 dB") {
    auto out = apply_wl(ref, irr_to_response(30.0, 1.234));
    CHECK(measure_irr(ref, out) == Catch::Approx(30.0).margin(0.1));
  }
  SECTION("0 dB response splits evenly") {
    auto out = apply_wl(ref, irr_to_response(0.0, -0.7));
    CHECK(measure_irr(ref, out) == Catch::Approx(0.0).margin(0.1));
  }
  SECTION("ideal mixer yields the +inf sentinel") {
    auto out = apply_wl(ref, irr_to_response(kInf, 0.0));
    CHECK(std::isinf(measure_irr(ref, out)));
    CHECK(measure_irr(ref, out) > 0.0);
  }
  SECTION("gain does not bias the ratio") {
    auto out = apply_wl(ref, irr_to_response(25.0, 0.3, 6.0));
    CHECK(measure_irr(ref, out) == Catch::Approx(25.0).margin(0.1));
  }
  SECTION("non-tonal reference is rejected") {
    Rng rng(3);
    ComplexSignal noise{awgn_samples(1024, 1.0, rng), 1024.0};
    CHECK_THROWS_AS(measure_irr(noise, noise), std::invalid_argument);
  }
  SECTION("DC and Nyquist tones are rejected") {
    ComplexSignal dc{cvec(256, cd(1.0, 0.0)), 256.0};
    CHECK_THROWS_AS(measure_irr(dc, dc), std::invalid_argument);
    const ComplexSignal nyq = tone(256, 128);
    CHECK_THROWS_AS(measure_irr(nyq, nyq), std::invalid_argument);
  }
  SECTION("length mismatch is rejected") {
    const ComplexSignal shorter = tone(512, 19);
    CHECK_THROWS_AS(measure_irr(ref, shorter), std::invalid_argument);
  }
}

TEST_CASE("measure_k_factor recovers the construction value") {
  auto draw_ensemble = [](double k_db, int count) {
    Rng rng(77);
    std::vector<SiChannel> ch;
    ch.reserve(std::size_t(count));
    for (int i = 0; i < count; ++i) ch.push_back(draw_si_channel(k_db, 40.0, 8, rng));
    return ch;
  };

  SECTION("pure line-of-sight gives the +inf sentinel") {
    CHECK(std::isinf(measure_k_factor(draw_ensemble(kInf, 200))));
  }
  SECTION("0 dB construction") {
    CHECK(measure_k_factor(draw_ensemble(0.0, 1000)) == Catch::Approx(0.0).margin(0.5));
  }
  SECTION("35.8 dB construction") {
    CHECK(measure_k_factor(draw_ensemble(35.8, 1000)) == Catch::Approx(35.8).margin(1.0));
  }
  SECTION("empty ensemble is rejected") {
    CHECK_THROWS_AS(measure_k_factor({}), std::invalid_argument);
  }
}

TEST_CASE("reference sinr sits at the design value at every transmit power") {
  TransceiverConfig cfg;
  double lo = kInf, hi = -kInf;
  for (double tx : {0.0, 12.5, 25.0}) {
    SeedSet seeds;
    seeds.master = 40 + std::uint64_t(tx);
    const SinrMeasurement m = sinr_reference(cfg, tx, seeds);
    INFO("tx " << tx << " dBm -> " << m.sinr_db << " dB");
    CHECK(m.sinr_db == Catch::Approx(15.0).margin(0.5));
    lo = std::min(lo, m.sinr_db);
    hi = std::max(hi, m.sinr_db);
  }
  CHECK(hi - lo < 0.5);
}

TEST_CASE("canceller hierarchy at 10 dBm transmit power") {
  TransceiverConfig cfg;
  SeedSet seeds;
  seeds.master = 91;
  const double tx = 10.0;
  const SinrMeasurement ref = sinr_reference(cfg, tx, seeds);
  const TwinRun twin = run_twin(cfg, tx, seeds);
  const double lin = sinr_from_twin(cfg, twin, CancellerKind::Linear).sinr_db;
  const double wl = sinr_from_twin(cfg, twin, CancellerKind::WidelyLinear).sinr_db;
  const double ph = sinr_from_twin(cfg, twin, CancellerKind::NonlinearPH).sinr_db;
  const double joint = sinr_from_twin(cfg, twin, CancellerKind::JointAugmented).sinr_db;
  INFO("ref " << ref.sinr_db << " lin " << lin << " wl " << wl << " ph " << ph << " joint "
              << joint);

  // The conjugate image dominates: augmented kinds gain double digits.
  CHECK(wl >= lin + 10.0);
  // Column-space nesting (small estimation-noise allowance).
  CHECK(joint >= wl - 0.2);
  CHECK(joint >= ph - 0.2);
  // No canceller beats the interference-free bound.
  for (double s : {lin, wl, ph, joint}) CHECK(s <= ref.sinr_db + 0.5);
}

TEST_CASE("ideal hardware lets the plain linear canceller reach the bound") {
  TransceiverConfig cfg;
  cfg.nonlinearities_enabled = false;
  cfg.tx_irr_db = kInf;
  cfg.rx_irr_db = kInf;
  SeedSet seeds;
  seeds.master = 17;
  const double tx = 10.0;
  const SinrMeasurement ref = sinr_reference(cfg, tx, seeds);
  const double lin = sinr_twin_run(cfg, tx, CancellerKind::Linear, seeds);
  INFO("ref " << ref.sinr_db << " linear " << lin);
  CHECK(lin == Catch::Approx(ref.sinr_db).margin(1.0));
}

TEST_CASE("sinr sweep emits one reference and four canceller rows per point") {
  TransceiverConfig cfg;
  SeedSet seeds;
  seeds.master = 5;
  const std::vector<double> grid{5.0, 20.0};
  const SinrReport rep = sinr_sweep(cfg, grid, seeds);
  REQUIRE(rep.rows.size() == 10);
  const char* order[] = {"reference", "linear", "widely-linear", "nonlinear-ph", "joint"};
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    CHECK(rep.rows[i].tx_power_dbm == grid[i / 5]);
    CHECK(rep.rows[i].canceller == order[i % 5]);
    CHECK(std::isfinite(rep.rows[i].sinr_db));
    CHECK(std::isfinite(rep.rows[i].residual_dbm));
  }
  CHECK_THROWS_AS(sinr_sweep(cfg, {}, seeds), std::invalid_argument);
}
