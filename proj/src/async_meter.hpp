#pragma once

#include "ct_model.hpp"
#include "signal_lab.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ctcal::meter {

struct Phasor {
  double amplitude = 0.0;  // A RMS
  double phase = 0.0;      // sine phase, (-pi, pi]
  double frequency = 0.0;
  std::size_t window_samples = 0;
};

struct MeasurementPlan {
  std::vector<double> frequencies;  // test frequencies, e.g. {45, 55}
  double sample_rate = 9000.0;
  std::size_t windows_per_frequency = 1;
  double interference_frequency = 50.0;

  void validate() const;
  double total_duration() const;
};

struct MeasurementResult {
  std::vector<double> frequencies;
  std::vector<std::size_t> window_samples;
  std::vector<model::ErrorPair> per_frequency;
  model::ErrorPair translated;
  double total_duration = 0.0;

  bool operator==(const MeasurementResult&) const = default;
};

struct SweepPoint {
  std::size_t window_samples = 0;
  double worst_bias = 0.0;  // A
};

struct SweepSettings {
  double test_amplitude = 5.0;
  double interference_fraction = 0.1;
  double interference_frequency = 50.0;
  std::size_t phase_grid = 64;
};

/// Single-pole resonator tuned to the test frequency whose quality factor
/// gives a fixed rejection of the interference tone.
struct BandpassBaseline {
  double quality_factor = 0.0;
  double gain_at_interference = 0.0;
};

double wrap_phase(double radians);

/// Samples in one beat window; fails if the rate does not give a whole count.
std::size_t window_samples(double f_test, double f_interference, double sample_rate);

/// Rectangular-window single-bin DFT at `f_test` over the whole buffer.
Phasor phasor(const signal::SampleBuffer& buffer, double f_test);

/// Ratio and phase error of `dut` relative to `reference` at `f_test`.
model::ErrorPair estimate_pair(const signal::SampleBuffer& reference, const signal::SampleBuffer& dut, double f_test);

/// Synthesizes and measures one buffer pair per plan frequency. `injected`
/// holds either one error for all frequencies or one per frequency. The
/// reference for frequency k uses seed `base.seed + 2k`.
MeasurementResult run_measurement(const MeasurementPlan& plan, const signal::WaveformSpec& base,
                                  std::span<const model::ErrorPair> injected);

/// Worst amplitude bias over an interference phase grid for each window length.
std::vector<SweepPoint> suppression_sweep(double f_test, double sample_rate, std::span<const std::size_t> window_counts,
                                          const SweepSettings& settings = {});

BandpassBaseline bandpass_baseline(double f_test, double f_interference, double rejection_factor = 10.0);

std::string sweep_to_csv(std::span<const SweepPoint> points);

}  // namespace ctcal::meter
