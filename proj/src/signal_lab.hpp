#pragma once

#include "ct_model.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ctcal::signal {

/// Recorded in every buffer origin so a change of noise algorithm is visible.
inline constexpr std::string_view kNoiseGeneratorId = "mt19937_64+box-muller/v1";

/// Test tone plus one interference tone plus white Gaussian noise.
/// Amplitudes are RMS amperes, phases are sine phases in radians.
struct WaveformSpec {
  double test_frequency = 45.0;
  double test_amplitude = 0.0;
  double test_phase = 0.0;
  double interference_frequency = 50.0;
  double interference_amplitude = 0.0;
  double interference_phase = 0.0;
  double noise_rms = 0.0;
  double sample_rate = 9000.0;
  double duration = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t sample_count() const;
  /// Hex SHA-256 of a canonical text form of every field.
  std::string digest() const;

  bool operator==(const WaveformSpec&) const = default;
};

/// Immutable, uniformly sampled waveform.
class SampleBuffer {
 public:
  SampleBuffer(std::vector<double> samples, double sample_rate, std::string origin);

  std::span<const double> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  double sample_rate() const { return sample_rate_; }
  const std::string& origin() const { return origin_; }
  double rms() const;

  /// First `count` samples, same rate and origin.
  SampleBuffer head(std::size_t count) const;

  bool operator==(const SampleBuffer&) const = default;

 private:
  std::vector<double> samples_;
  double sample_rate_;
  std::string origin_;
};

std::string origin_for(const WaveformSpec& spec);

SampleBuffer synthesize(const WaveformSpec& spec);

/// Device-under-test channel for `reference`: the test tone is scaled by
/// (1 + ratio/100) and advanced by the phase error; the interference is
/// unchanged and the noise is an independent realization (seed + 1).
SampleBuffer dut_channel(const SampleBuffer& reference, const model::ErrorPair& true_error, const WaveformSpec& spec);

/// Shortest duration holding whole cycles of both tones (0.1 Hz granularity).
double beat_window(double f_test, double f_interference);

// CSV is `time_s,amps`; binary is a 16-byte little-endian header (f64 sample
// rate, u64 length) followed by little-endian f64 samples.
std::string to_csv(const SampleBuffer& buffer);
SampleBuffer from_csv(std::string_view text, std::string origin = "csv");
std::vector<std::uint8_t> to_binary(const SampleBuffer& buffer);
SampleBuffer from_binary(std::span<const std::uint8_t> bytes, std::string origin = "binary");

void write_csv(const SampleBuffer& buffer, const std::filesystem::path& path);
SampleBuffer read_csv(const std::filesystem::path& path);
void write_binary(const SampleBuffer& buffer, const std::filesystem::path& path);
SampleBuffer read_binary(const std::filesystem::path& path);

}  // namespace ctcal::signal
