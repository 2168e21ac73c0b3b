#include "async_meter.hpp"
#include "error.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

using namespace ctcal;
using namespace ctcal::meter;
using ctcal::signal::SampleBuffer;
using ctcal::signal::WaveformSpec;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

WaveformSpec spec_for(double f, double fs, double duration, double amp = 5.0) {
  WaveformSpec s;
  s.test_frequency = f;
  s.test_amplitude = amp;
  s.sample_rate = fs;
  s.duration = duration;
  return s;
}

double phase_distance(double a, double b) { return std::abs(wrap_phase(a - b)); }

}  // namespace

TEST_CASE("wrap_phase maps into (-pi, pi]") {
  CHECK(wrap_phase(std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_phase(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_phase(3.0 * std::numbers::pi / 2.0) == doctest::Approx(-std::numbers::pi / 2.0));
  CHECK(wrap_phase(0.25) == 0.25);
}

TEST_CASE("window_samples examples") {
  CHECK(window_samples(49.0, 50.0, 9800.0) == 9800);
  CHECK(window_samples(51.0, 50.0, 10200.0) == 10200);
  CHECK(window_samples(45.0, 50.0, 9000.0) == 1800);
  CHECK_THROWS_AS(window_samples(45.0, 50.0, 9001.0), ctcal::Error);
  try {
    window_samples(49.0, 50.0, 9800.5);
  } catch (const ctcal::Error& e) {
    CHECK(std::string(e.what()).find("sample rate") != std::string::npos);
  }
}

TEST_CASE("phasor examples") {
  const auto pure = signal::synthesize(spec_for(45.0, 9000.0, 0.2));
  const auto p = phasor(pure, 45.0);
  CHECK(p.amplitude == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(p.window_samples == 1800);

  auto s = spec_for(49.0, 9800.0, 1.0);
  s.interference_amplitude = 0.5;
  const auto full = signal::synthesize(s);
  CHECK(std::abs(phasor(full, 49.0).amplitude - 5.0) < 0.01);

  CHECK_THROWS_AS(phasor(pure, 4600.0), ctcal::Error);
  const SampleBuffer tiny(std::vector<double>(15, 1.0), 9000.0, "t");
  CHECK_THROWS_AS(phasor(tiny, 45.0), ctcal::Error);
}

TEST_CASE("phasor matches a direct long-double DFT on arbitrary windows") {
  auto s = spec_for(49.0, 9800.0, 1.0);
  s.interference_amplitude = 0.5;
  s.interference_phase = 2.2;
  s.noise_rms = 0.05;
  s.seed = 8;
  const auto full = signal::synthesize(s);
  for (std::size_t n : {2000u, 3333u, 4900u, 9800u}) {
    const auto b = full.head(n);
    const auto p = phasor(b, 49.0);
    const auto o = oracle::naive_bin({b.samples().begin(), b.samples().end()}, 49.0, 9800.0);
    CAPTURE(n);
    CHECK(p.amplitude == doctest::Approx(o.amplitude).epsilon(1e-10));
    CHECK(phase_distance(p.phase, o.phase) < 1e-9);
  }
}

TEST_CASE("phasor recovers the sine phase") {
  for (double ph : {-3.0, -1.0, 0.0, 0.5, 2.9}) {
    auto s = spec_for(55.0, 9000.0, 0.2);
    s.test_phase = ph;
    CHECK(phase_distance(phasor(signal::synthesize(s), 55.0).phase, ph) < 1e-9);
  }
}

TEST_CASE("truncated windows leak interference in decreasing amounts") {
  const std::array<std::size_t, 3> windows{2000, 4900, 9800};
  const auto sweep = suppression_sweep(49.0, 9800.0, windows);
  REQUIRE(sweep.size() == 3);
  CHECK(sweep[0].worst_bias > sweep[1].worst_bias);
  CHECK(sweep[1].worst_bias > sweep[2].worst_bias);
  CHECK(sweep[2].worst_bias <= 0.01);
}

TEST_CASE("suppression_sweep matches a brute-force leakage oracle") {
  const std::array<std::size_t, 2> windows{2000, 4900};
  const auto sweep = suppression_sweep(49.0, 9800.0, windows);
  for (std::size_t w = 0; w < windows.size(); ++w) {
    double worst = 0.0;
    for (int k = 0; k < 64; ++k) {
      auto a = oracle::tone(5.0, 49.0, 0.0, 9800.0, windows[w]);
      const auto b = oracle::tone(0.5, 50.0, kTwoPi * k / 64.0, 9800.0, windows[w]);
      for (std::size_t n = 0; n < a.size(); ++n) a[n] += b[n];
      worst = std::max(worst, std::abs(oracle::naive_bin(a, 49.0, 9800.0).amplitude - 5.0));
    }
    CHECK(sweep[w].worst_bias == doctest::Approx(worst).epsilon(1e-8));
  }
}

TEST_CASE("suppression_sweep: coherent window has no bias") {
  const std::array<std::size_t, 1> windows{1800};
  CHECK(suppression_sweep(45.0, 9000.0, windows)[0].worst_bias < 1e-9);
  const std::array<std::size_t, 2> unsorted{4900, 2000};
  CHECK_THROWS_AS(suppression_sweep(49.0, 9800.0, unsorted), ctcal::Error);
}

TEST_CASE("heterodyne rejection beats the band-pass baseline by 100x") {
  const auto bp = bandpass_baseline(49.0, 50.0, 10.0);
  CHECK(bp.gain_at_interference == doctest::Approx(0.1).epsilon(1e-12));
  // Resonator response recomputed from its definition.
  const double detune = 50.0 / 49.0 - 49.0 / 50.0;
  CHECK(1.0 / std::sqrt(1.0 + bp.quality_factor * bp.quality_factor * detune * detune) == doctest::Approx(0.1));
  const double residual = 0.5 * bp.gain_at_interference;
  const std::array<std::size_t, 1> windows{9800};
  const double bias = suppression_sweep(49.0, 9800.0, windows)[0].worst_bias;
  CHECK(residual >= 100.0 * bias);
  CHECK_THROWS_AS(bandpass_baseline(50.0, 50.0), ctcal::Error);
}

TEST_CASE("sweep CSV header") {
  const std::vector<SweepPoint> pts{{2000, 0.5}, {9800, 0.0}};
  const auto csv = sweep_to_csv(pts);
  CHECK(csv.rfind("window_samples,worst_bias\n2000,0.5\n9800,0\n", 0) == 0);
}

TEST_CASE("estimate_pair examples") {
  auto s = spec_for(45.0, 9000.0, 0.2);
  s.interference_amplitude = 0.5;
  const auto ref = signal::synthesize(s);
  const auto zero = estimate_pair(ref, ref, 45.0);
  CHECK(zero.ratio_error_pct == 0.0);
  CHECK(zero.phase_error_min == 0.0);

  for (double phase : {0.0, 1.0, 2.5, -2.0}) {
    auto t = s;
    t.interference_phase = phase;
    const auto r = signal::synthesize(t);
    const auto d = signal::dut_channel(r, {-0.2, 10.0}, t);
    const auto e = estimate_pair(r, d, 45.0);
    CHECK(std::abs(e.ratio_error_pct + 0.2) < 0.001);
    CHECK(std::abs(e.phase_error_min - 10.0) < 0.1);
    CHECK(std::abs(e.ratio_error_pct + 0.2) < 0.005);
    CHECK(std::abs(e.phase_error_min - 10.0) < 0.5);
  }

  const auto silent = signal::synthesize(spec_for(45.0, 9000.0, 0.2, 0.0));
  try {
    estimate_pair(silent, silent, 45.0);
    FAIL("expected degenerate reference");
  } catch (const ctcal::Error& e) {
    CHECK(e.code() == ctcal::ErrorCode::DegenerateReference);
  }
  const auto longer = signal::synthesize(spec_for(45.0, 9000.0, 0.4));
  CHECK_THROWS_AS(estimate_pair(ref, longer, 45.0), ctcal::Error);
}

TEST_CASE("run_measurement examples") {
  MeasurementPlan legacy{{49.0, 51.0}, 10200.0, 1, 50.0};
  // 10200 Hz gives whole windows at both 49 and 51 Hz.
  const WaveformSpec base = spec_for(0.0, 0.0, 0.0);
  const std::array<model::ErrorPair, 1> none{};
  const auto slow = run_measurement(legacy, base, none);
  CHECK(slow.total_duration == doctest::Approx(2.0).epsilon(1e-12));

  MeasurementPlan fast{{45.0, 55.0}, 9000.0, 1, 50.0};
  const auto quick = run_measurement(fast, base, none);
  CHECK(quick.total_duration == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(std::abs(quick.translated.ratio_error_pct) < 1e-9);
  CHECK(std::abs(quick.translated.phase_error_min) < 1e-9);
  CHECK(quick.window_samples == std::vector<std::size_t>{1800, 1800});
  CHECK(slow.total_duration / quick.total_duration == doctest::Approx(5.0));
}

TEST_CASE("run_measurement recovers per-frequency injected errors and translates them") {
  MeasurementPlan plan{{45.0, 55.0}, 9000.0, 2, 50.0};
  auto base = spec_for(0.0, 0.0, 0.0);
  base.interference_amplitude = 0.5;
  base.interference_phase = 0.9;
  const std::array<model::ErrorPair, 2> injected{{{-0.15, 5.4}, {-0.13, 4.4}}};
  const auto r = run_measurement(plan, base, injected);
  CHECK(r.per_frequency[0].ratio_error_pct == doctest::Approx(-0.15).epsilon(1e-6));
  CHECK(r.per_frequency[1].phase_error_min == doctest::Approx(4.4).epsilon(1e-6));
  CHECK(r.translated.ratio_error_pct == doctest::Approx(-0.14).epsilon(1e-6));
  CHECK(r.translated.phase_error_min == doctest::Approx(4.9).epsilon(1e-6));
  CHECK(r.total_duration == doctest::Approx(0.8));

  MeasurementPlan on_grid{{50.0}, 9000.0, 1, 50.0};
  CHECK_THROWS_AS(run_measurement(on_grid, base, injected), ctcal::Error);
  const std::array<model::ErrorPair, 3> wrong{};
  CHECK_THROWS_AS(run_measurement(plan, base, wrong), ctcal::Error);
}

TEST_CASE("property: exact rejection up to 10x interference") {
  for (double ratio : {0.1, 1.0, 10.0}) {
    for (int k = 0; k < 16; ++k) {
      auto s = spec_for(45.0, 9000.0, 0.2, 1.0);
      s.test_phase = 0.37;
      s.interference_amplitude = ratio;
      s.interference_phase = kTwoPi * k / 16.0;
      const auto p = phasor(signal::synthesize(s), 45.0);
      CHECK(std::abs(p.amplitude - 1.0) < 1e-9);
      CHECK(phase_distance(p.phase, 0.37) < 1e-9);
    }
  }
}

TEST_CASE("property: shift invariance") {
  auto s = spec_for(55.0, 9000.0, 0.2, 2.0);
  s.test_phase = -0.4;
  s.interference_amplitude = 1.0;
  const auto b = signal::synthesize(s);
  const auto p0 = phasor(b, 55.0);
  for (std::size_t shift : {1u, 17u, 500u, 1799u}) {
    std::vector<double> rotated(b.size());
    for (std::size_t n = 0; n < b.size(); ++n) rotated[n] = b.samples()[(n + shift) % b.size()];
    const auto p = phasor(SampleBuffer(rotated, 9000.0, "rot"), 55.0);
    const double expected = wrap_phase(p0.phase + kTwoPi * 55.0 * static_cast<double>(shift) / 9000.0);
    CHECK(std::abs(p.amplitude - p0.amplitude) < 1e-9 * p0.amplitude);
    CHECK(phase_distance(p.phase, expected) < 1e-9);
  }
}

TEST_CASE("property: linearity in amplitude") {
  auto s = spec_for(45.0, 9000.0, 0.2, 1.3);
  s.interference_amplitude = 0.7;
  s.noise_rms = 0.1;
  s.seed = 4;
  const auto b = signal::synthesize(s);
  const double a0 = phasor(b, 45.0).amplitude;
  for (double alpha : {0.0, 0.5, 2.0, 1000.0}) {
    std::vector<double> scaled(b.samples().begin(), b.samples().end());
    for (double& v : scaled) v *= alpha;
    CHECK(phasor(SampleBuffer(scaled, 9000.0, "x"), 45.0).amplitude == doctest::Approx(alpha * a0).epsilon(1e-12));
  }
}

TEST_CASE("property: noise scaling follows 1/sqrt(N)") {
  std::vector<double> sd;
  for (int mult : {1, 4, 16}) {
    std::vector<double> amps;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
      auto s = spec_for(45.0, 9000.0, 0.2 * mult);
      s.noise_rms = 0.01;
      s.interference_amplitude = 0.5;
      s.seed = seed;
      amps.push_back(phasor(signal::synthesize(s), 45.0).amplitude);
    }
    sd.push_back(oracle::stddev(amps));
  }
  // sigma_amp = noise_rms / sqrt(N) for an RMS-scaled bin.
  CHECK(sd[0] == doctest::Approx(0.01 / std::sqrt(1800.0)).epsilon(0.2));
  CHECK(sd[0] / sd[1] == doctest::Approx(2.0).epsilon(0.2));
  CHECK(sd[0] / sd[2] == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("property: estimated error is unbiased over 200 seeds") {
  MeasurementPlan plan{{45.0}, 9000.0, 1, 50.0};
  const std::array<model::ErrorPair, 1> injected{{{-0.2, 10.0}}};
  std::vector<double> ratio, phase;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    auto base = spec_for(0.0, 0.0, 0.0);
    base.interference_amplitude = 0.5;
    base.noise_rms = 0.01;
    base.seed = 1000 + 2 * seed;
    const auto r = run_measurement(plan, base, injected);
    ratio.push_back(r.per_frequency[0].ratio_error_pct);
    phase.push_back(r.per_frequency[0].phase_error_min);
  }
  const double se_r = oracle::stddev(ratio) / std::sqrt(200.0);
  const double se_p = oracle::stddev(phase) / std::sqrt(200.0);
  CHECK(std::abs(oracle::mean(ratio) + 0.2) < 3.0 * se_r);
  CHECK(std::abs(oracle::mean(phase) - 10.0) < 3.0 * se_p);
}
