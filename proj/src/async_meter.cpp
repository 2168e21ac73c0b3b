#include "async_meter.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>

namespace ctcal::meter {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::complex<double> project(std::span<const double> samples, double f_test, double sample_rate) {
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t n = 0; n < samples.size(); ++n) {
    const double cycles = f_test * static_cast<double>(n) / sample_rate;
    const double angle = kTwoPi * (cycles - std::floor(cycles));
    acc += samples[n] * std::complex<double>(std::cos(angle), -std::sin(angle));
  }
  // Peak-to-RMS and the one-sided spectrum factor of 2 combine to sqrt(2).
  return acc * (std::numbers::sqrt2 / static_cast<double>(samples.size()));
}

}  // namespace

double wrap_phase(double radians) {
  double r = std::remainder(radians, kTwoPi);
  if (r <= -std::numbers::pi) r += kTwoPi;
  return r;
}

void MeasurementPlan::validate() const {
  if (frequencies.empty()) throw Error(ErrorCode::InvalidArgument, "measurement plan has no frequencies");
  if (windows_per_frequency == 0) throw Error(ErrorCode::InvalidArgument, "windows_per_frequency must be >= 1");
  for (double f : frequencies) {
    if (f == interference_frequency) {
      throw Error(ErrorCode::InvalidArgument, "test frequency coincides with the interference frequency");
    }
    window_samples(f, interference_frequency, sample_rate);
  }
}

double MeasurementPlan::total_duration() const {
  double total = 0.0;
  for (double f : frequencies) {
    total += static_cast<double>(windows_per_frequency) * signal::beat_window(f, interference_frequency);
  }
  return total;
}

std::size_t window_samples(double f_test, double f_interference, double sample_rate) {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw Error(ErrorCode::InvalidArgument, "sample rate must be > 0");
  }
  const double exact = sample_rate * signal::beat_window(f_test, f_interference);
  const double rounded = std::round(exact);
  if (std::abs(exact - rounded) > 1e-6 * std::max(1.0, rounded)) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "sample rate %.6g Hz gives %.6f samples per beat window; choose a rate giving a whole count",
                  sample_rate, exact);
    throw Error(ErrorCode::InvalidArgument, msg);
  }
  return static_cast<std::size_t>(rounded);
}

Phasor phasor(const signal::SampleBuffer& buffer, double f_test) {
  if (buffer.size() < 16) throw Error(ErrorCode::InvalidArgument, "phasor needs at least 16 samples");
  if (!(f_test > 0.0)) throw Error(ErrorCode::InvalidArgument, "test frequency must be > 0");
  if (f_test > buffer.sample_rate() / 2.0) throw Error(ErrorCode::InvalidArgument, "test frequency above Nyquist");
  const std::complex<double> x = project(buffer.samples(), f_test, buffer.sample_rate());
  // sin(wt + phi) projects onto exp(j(phi - pi/2)).
  return {std::abs(x), wrap_phase(std::arg(x) + std::numbers::pi / 2.0), f_test, buffer.size()};
}

model::ErrorPair estimate_pair(const signal::SampleBuffer& reference, const signal::SampleBuffer& dut, double f_test) {
  if (reference.sample_rate() != dut.sample_rate() || reference.size() != dut.size()) {
    throw Error(ErrorCode::InvalidArgument, "reference and DUT buffers differ in rate or length");
  }
  const Phasor r = phasor(reference, f_test);
  if (r.amplitude < 1e-9) throw Error(ErrorCode::DegenerateReference, "reference amplitude below 1e-9 A");
  const Phasor d = phasor(dut, f_test);
  return {100.0 * (d.amplitude / r.amplitude - 1.0), wrap_phase(d.phase - r.phase) * model::kArcMinutesPerRadian};
}

MeasurementResult run_measurement(const MeasurementPlan& plan, const signal::WaveformSpec& base,
                                  std::span<const model::ErrorPair> injected) {
  plan.validate();
  if (injected.size() != 1 && injected.size() != plan.frequencies.size()) {
    throw Error(ErrorCode::InvalidArgument, "injected errors must be one value or one per frequency");
  }
  MeasurementResult result;
  for (std::size_t k = 0; k < plan.frequencies.size(); ++k) {
    const double f = plan.frequencies[k];
    signal::WaveformSpec spec = base;
    spec.test_frequency = f;
    spec.interference_frequency = plan.interference_frequency;
    spec.sample_rate = plan.sample_rate;
    spec.duration = static_cast<double>(plan.windows_per_frequency) * signal::beat_window(f, plan.interference_frequency);
    spec.seed = base.seed + 2 * k;

    const auto reference = signal::synthesize(spec);
    const auto dut = signal::dut_channel(reference, injected.size() == 1 ? injected[0] : injected[k], spec);
    result.frequencies.push_back(f);
    result.window_samples.push_back(reference.size());
    result.per_frequency.push_back(estimate_pair(reference, dut, f));
  }
  result.translated = model::translate_to_rated(result.per_frequency);
  result.total_duration = plan.total_duration();
  return result;
}

std::vector<SweepPoint> suppression_sweep(double f_test, double sample_rate, std::span<const std::size_t> window_counts,
                                          const SweepSettings& settings) {
  if (!std::is_sorted(window_counts.begin(), window_counts.end())) {
    throw Error(ErrorCode::InvalidArgument, "window counts must be ascending");
  }
  if (settings.phase_grid == 0) throw Error(ErrorCode::InvalidArgument, "phase grid must be non-empty");
  std::vector<SweepPoint> out;
  if (window_counts.empty()) return out;

  signal::WaveformSpec spec;
  spec.test_frequency = f_test;
  spec.test_amplitude = settings.test_amplitude;
  spec.interference_frequency = settings.interference_frequency;
  spec.interference_amplitude = settings.interference_fraction * settings.test_amplitude;
  spec.sample_rate = sample_rate;
  spec.duration = static_cast<double>(window_counts.back()) / sample_rate;

  std::vector<double> worst(window_counts.size(), 0.0);
  for (std::size_t k = 0; k < settings.phase_grid; ++k) {
    spec.interference_phase = kTwoPi * static_cast<double>(k) / static_cast<double>(settings.phase_grid);
    const auto full = signal::synthesize(spec);
    for (std::size_t w = 0; w < window_counts.size(); ++w) {
      const Phasor p = phasor(full.head(window_counts[w]), f_test);
      worst[w] = std::max(worst[w], std::abs(p.amplitude - settings.test_amplitude));
    }
  }
  for (std::size_t w = 0; w < window_counts.size(); ++w) out.push_back({window_counts[w], worst[w]});
  return out;
}

BandpassBaseline bandpass_baseline(double f_test, double f_interference, double rejection_factor) {
  if (!(f_test > 0.0) || !(f_interference > 0.0) || f_test == f_interference || !(rejection_factor > 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "band-pass baseline needs distinct positive frequencies and factor > 1");
  }
  // |H(f)| = 1 / sqrt(1 + Q^2 (f/f0 - f0/f)^2)
  const double detune = std::abs(f_interference / f_test - f_test / f_interference);
  const double q = std::sqrt(rejection_factor * rejection_factor - 1.0) / detune;
  const double gain = 1.0 / std::sqrt(1.0 + q * q * detune * detune);
  return {q, gain};
}

std::string sweep_to_csv(std::span<const SweepPoint> points) {
  std::string out = "window_samples,worst_bias\n";
  char row[64];
  for (const auto& p : points) {
    std::snprintf(row, sizeof row, "%zu,%.17g\n", p.window_samples, p.worst_bias);
    out += row;
  }
  return out;
}

}  // namespace ctcal::meter
