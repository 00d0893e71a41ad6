#include "fdx/ofdm.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <set>

using namespace fdx;

namespace {
OfdmParams default_params() { return OfdmParams{}; }
}

TEST_CASE("qam16 constellation is gray-coded and unit power") {
  // Adjacent levels in bit order 00,01,11,10 differ by one bit.
  CHECK(qam16_level(0b00) == Catch::Approx(-3.0 / std::sqrt(10.0)));
  CHECK(qam16_level(0b01) == Catch::Approx(-1.0 / std::sqrt(10.0)));
  CHECK(qam16_level(0b11) == Catch::Approx(1.0 / std::sqrt(10.0)));
  CHECK(qam16_level(0b10) == Catch::Approx(3.0 / std::sqrt(10.0)));
  double p = 0.0;
  for (unsigned b = 0; b < 16; ++b) p += std::norm(qam16_symbol(b));
  CHECK(p / 16.0 == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("symbol geometry: 320 samples at 64 Msps") {
  const auto p = default_params();
  CHECK(p.fft_size() == 256);
  CHECK(p.guard_len() == 64);
  CHECK(p.symbol_len() == 320);
  CHECK(p.sample_rate_hz() == Catch::Approx(64e6));
  CHECK(p.subcarrier_spacing_hz() == Catch::Approx(250e3));
  Rng rng(1);
  auto s = generate_ofdm(p, 3, rng);
  CHECK(s.samples.size() == 3 * 320);
  CHECK(s.sample_rate == Catch::Approx(64e6));
}

TEST_CASE("guard interval is a cyclic prefix") {
  Rng rng(7);
  auto s = generate_ofdm(default_params(), 2, rng);
  for (int sym = 0; sym < 2; ++sym) {
    const std::size_t base = std::size_t(sym) * 320;
    for (int i = 0; i < 64; ++i) {
      CHECK(s.samples[base + i] == s.samples[base + 256 + i]);
    }
  }
}

TEST_CASE("mean power is unity") {
  Rng rng(99);
  auto s = generate_ofdm(default_params(), 1000, rng);
  CHECK(measure_power(s) == Catch::Approx(1.0).epsilon(0.01));
}

TEST_CASE("occupied bins are +-1..24 at 250 kHz spacing") {
  Rng rng(5);
  const auto p = default_params();
  auto s = generate_ofdm(p, 1, rng);
  // Drop the prefix, transform one body.
  cvec body(s.samples.begin() + 64, s.samples.begin() + 320);
  auto spec = fft::transform(body, false);
  std::set<int> occupied;
  for (int k = 0; k < 256; ++k) {
    if (std::abs(spec[std::size_t(k)]) > 1e-6) occupied.insert(k);
  }
  std::set<int> expect;
  for (int k = 1; k <= 24; ++k) {
    expect.insert(k);
    expect.insert(256 - k);
  }
  CHECK(occupied == expect);
  // 99%+ of the energy within the occupied band.
  const double frac = inband_power(s, p.occupied_bandwidth_hz()) / measure_power(s);
  CHECK(frac > 0.99);
}

TEST_CASE("papr of the default waveform sits in the usual ofdm range") {
  Rng rng(2024);
  auto s = generate_ofdm(default_params(), 1000, rng);
  const double papr = papr_db(s);
  CHECK(papr > 8.0);
  CHECK(papr < 12.0);
}

TEST_CASE("generation is deterministic per seed") {
  Rng r1(42), r2(42), r3(43);
  auto a = generate_ofdm(default_params(), 4, r1);
  auto b = generate_ofdm(default_params(), 4, r2);
  auto c = generate_ofdm(default_params(), 4, r3);
  REQUIRE(a.samples.size() == b.samples.size());
  bool same = true, differ = false;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    same &= (a.samples[i] == b.samples[i]);
    differ |= (a.samples[i] != c.samples[i]);
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("parameter validation") {
  Rng rng(1);
  OfdmParams p;
  p.n_data = 64;
  CHECK_THROWS_AS(generate_ofdm(p, 1, rng), std::invalid_argument);
  p = OfdmParams{};
  p.n_data = 47;
  CHECK_THROWS_AS(generate_ofdm(p, 1, rng), std::invalid_argument);
  p = OfdmParams{};
  p.n_subcarriers = 60;
  CHECK_THROWS_AS(generate_ofdm(p, 1, rng), std::invalid_argument);
  p = OfdmParams{};
  p.guard = -1;
  CHECK_THROWS_AS(generate_ofdm(p, 1, rng), std::invalid_argument);
  p = OfdmParams{};
  CHECK_THROWS_AS(generate_ofdm(p, 0, rng), std::invalid_argument);
  ComplexSignal z;
  z.samples.assign(8, cd(0, 0));
  CHECK_THROWS_AS(papr_db(z), std::invalid_argument);
}
