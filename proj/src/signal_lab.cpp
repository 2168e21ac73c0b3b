#include "signal_lab.hpp"

#include "digest.hpp"
#include "error.hpp"
#include "file_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <random>

namespace ctcal::signal {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Box-Muller over mt19937_64 with explicit 53-bit mantissa extraction, so the
// sequence does not depend on the standard library's distribution classes.
class GaussianNoise {
 public:
  explicit GaussianNoise(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;        // [0, 1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return r * std::cos(kTwoPi * u2);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// sqrt(2) * rms * sin(2 pi f n / fs + phase), with the cycle count reduced
// modulo 1 before scaling so long buffers keep full precision.
double tone(double rms, double frequency, double phase, double sample_rate, std::size_t n) {
  if (rms == 0.0) return 0.0;
  const double cycles = frequency * static_cast<double>(n) / sample_rate;
  const double frac = cycles - std::floor(cycles);
  return std::numbers::sqrt2 * rms * std::sin(kTwoPi * frac + phase);
}

std::vector<double> render(const WaveformSpec& spec, double tone_scale, double tone_shift, std::uint64_t noise_seed) {
  const std::size_t count = spec.sample_count();
  std::vector<double> out(count);
  GaussianNoise noise(noise_seed);
  for (std::size_t n = 0; n < count; ++n) {
    double v = tone(spec.test_amplitude * tone_scale, spec.test_frequency, spec.test_phase + tone_shift,
                    spec.sample_rate, n) +
               tone(spec.interference_amplitude, spec.interference_frequency, spec.interference_phase,
                    spec.sample_rate, n);
    if (spec.noise_rms > 0.0) v += spec.noise_rms * noise.next();
    out[n] = v;
  }
  return out;
}

std::int64_t tenths(double hz) {
  const double scaled = hz * 10.0;
  const double rounded = std::round(scaled);
  if (std::abs(scaled - rounded) > 1e-6) {
    throw Error(ErrorCode::InvalidArgument,
                "frequency " + g17(hz) + " Hz has no common period at 0.1 Hz granularity");
  }
  return static_cast<std::int64_t>(rounded);
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[offset + i]) << (8 * i);
  return v;
}

}  // namespace

void WaveformSpec::validate() const {
  const double values[] = {test_frequency, test_amplitude, test_phase, interference_frequency, interference_amplitude,
                           interference_phase, noise_rms, sample_rate, duration};
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "waveform spec fields must be finite");
  }
  if (!(test_frequency > 0.0) || !(interference_frequency > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tone frequencies must be > 0");
  }
  if (test_amplitude < 0.0 || interference_amplitude < 0.0 || noise_rms < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "amplitudes and noise must be >= 0");
  }
  if (!(sample_rate > 4.0 * std::max(test_frequency, interference_frequency))) {
    throw Error(ErrorCode::InvalidArgument, "sample rate must exceed 4x the highest tone frequency");
  }
  if (!(duration > 0.0) || duration * sample_rate + 1e-9 < 16.0) {
    throw Error(ErrorCode::InvalidArgument, "waveform must hold at least 16 samples");
  }
}

std::size_t WaveformSpec::sample_count() const {
  validate();
  return static_cast<std::size_t>(std::llround(duration * sample_rate));
}

std::string WaveformSpec::digest() const {
  std::string canon = "waveform/v1";
  for (double v : {test_frequency, test_amplitude, test_phase, interference_frequency, interference_amplitude,
                   interference_phase, noise_rms, sample_rate, duration}) {
    canon += ';' + g17(v);
  }
  canon += ';' + std::to_string(seed);
  return to_hex(sha256(canon));
}

SampleBuffer::SampleBuffer(std::vector<double> samples, double sample_rate, std::string origin)
    : samples_(std::move(samples)), sample_rate_(sample_rate), origin_(std::move(origin)) {
  if (samples_.empty()) throw Error(ErrorCode::InvalidArgument, "sample buffer must hold at least one sample");
  if (!(std::isfinite(sample_rate_) && sample_rate_ > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "sample rate must be > 0");
  }
  if (!std::all_of(samples_.begin(), samples_.end(), [](double v) { return std::isfinite(v); })) {
    throw Error(ErrorCode::InvalidArgument, "samples must be finite");
  }
}

double SampleBuffer::rms() const {
  double acc = 0.0;
  for (double v : samples_) acc += v * v;
  return std::sqrt(acc / static_cast<double>(samples_.size()));
}

SampleBuffer SampleBuffer::head(std::size_t count) const {
  if (count == 0 || count > samples_.size()) throw Error(ErrorCode::OutOfRange, "head length out of range");
  return SampleBuffer({samples_.begin(), samples_.begin() + static_cast<std::ptrdiff_t>(count)}, sample_rate_,
                      origin_);
}

std::string origin_for(const WaveformSpec& spec) {
  return "spec=" + spec.digest() + ";seed=" + std::to_string(spec.seed) + ";gen=" + std::string(kNoiseGeneratorId);
}

SampleBuffer synthesize(const WaveformSpec& spec) {
  spec.validate();
  return SampleBuffer(render(spec, 1.0, 0.0, spec.seed), spec.sample_rate, origin_for(spec));
}

SampleBuffer dut_channel(const SampleBuffer& reference, const model::ErrorPair& true_error, const WaveformSpec& spec) {
  spec.validate();
  if (reference.origin() != origin_for(spec) || reference.size() != spec.sample_count() ||
      reference.sample_rate() != spec.sample_rate) {
    throw Error(ErrorCode::InvalidArgument, "reference buffer was not produced from this waveform spec");
  }
  if (!std::isfinite(true_error.ratio_error_pct) || !std::isfinite(true_error.phase_error_min)) {
    throw Error(ErrorCode::InvalidArgument, "injected error must be finite");
  }
  const double scale = 1.0 + true_error.ratio_error_pct / 100.0;
  const double shift = true_error.phase_error_min / model::kArcMinutesPerRadian;
  return SampleBuffer(render(spec, scale, shift, spec.seed + 1), spec.sample_rate, origin_for(spec) + ";dut");
}

double beat_window(double f_test, double f_interference) {
  if (!(f_test > 0.0) || !(f_interference > 0.0) || !std::isfinite(f_test) || !std::isfinite(f_interference)) {
    throw Error(ErrorCode::InvalidArgument, "beat window needs positive frequencies");
  }
  const std::int64_t g = std::gcd(tenths(f_test), tenths(f_interference));
  if (g == 0) throw Error(ErrorCode::InvalidArgument, "frequencies below 0.1 Hz granularity");
  return 10.0 / static_cast<double>(g);
}

std::string to_csv(const SampleBuffer& buffer) {
  std::string out = "time_s,amps\n";
  out.reserve(out.size() + buffer.size() * 40);
  const auto s = buffer.samples();
  for (std::size_t n = 0; n < s.size(); ++n) {
    out += g17(static_cast<double>(n) / buffer.sample_rate());
    out += ',';
    out += g17(s[n]);
    out += '\n';
  }
  return out;
}

SampleBuffer from_csv(std::string_view text, std::string origin) {
  auto next_line = [&text]() -> std::string_view {
    const auto end = text.find('\n');
    std::string_view line = text.substr(0, end);
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  };
  if (next_line() != "time_s,amps") throw Error(ErrorCode::Parse, "CSV header must be 'time_s,amps'");

  std::vector<double> times;
  std::vector<double> amps;
  while (!text.empty()) {
    const std::string_view line = next_line();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) throw Error(ErrorCode::Parse, "CSV row without comma");
    double t = 0.0;
    double a = 0.0;
    const auto r1 = std::from_chars(line.data(), line.data() + comma, t);
    const auto r2 = std::from_chars(line.data() + comma + 1, line.data() + line.size(), a);
    if (r1.ec != std::errc{} || r1.ptr != line.data() + comma || r2.ec != std::errc{} ||
        r2.ptr != line.data() + line.size()) {
      throw Error(ErrorCode::Parse, "malformed CSV row: " + std::string(line));
    }
    times.push_back(t);
    amps.push_back(a);
  }
  if (amps.size() < 2) throw Error(ErrorCode::Parse, "CSV needs at least two rows to infer the sample rate");
  // Times are n / fs printed at full precision; snap the inferred rate to 1 uHz.
  const double raw = static_cast<double>(amps.size() - 1) / (times.back() - times.front());
  const double rate = std::round(raw * 1e6) / 1e6;
  return SampleBuffer(std::move(amps), rate, std::move(origin));
}

std::vector<std::uint8_t> to_binary(const SampleBuffer& buffer) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + 8 * buffer.size());
  put_u64(out, std::bit_cast<std::uint64_t>(buffer.sample_rate()));
  put_u64(out, buffer.size());
  for (double v : buffer.samples()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

SampleBuffer from_binary(std::span<const std::uint8_t> bytes, std::string origin) {
  if (bytes.size() < 16) throw Error(ErrorCode::Parse, "binary buffer shorter than its 16-byte header");
  const double rate = std::bit_cast<double>(get_u64(bytes, 0));
  const std::uint64_t count = get_u64(bytes, 8);
  if (count > (bytes.size() - 16) / 8 || bytes.size() != 16 + 8 * count) {
    throw Error(ErrorCode::Parse, "binary buffer length does not match its header");
  }
  std::vector<double> samples(count);
  for (std::uint64_t i = 0; i < count; ++i) samples[i] = std::bit_cast<double>(get_u64(bytes, 16 + 8 * i));
  return SampleBuffer(std::move(samples), rate, std::move(origin));
}

void write_csv(const SampleBuffer& buffer, const std::filesystem::path& path) { write_text(path, to_csv(buffer)); }

SampleBuffer read_csv(const std::filesystem::path& path) { return from_csv(read_text(path), "csv:" + path.string()); }

void write_binary(const SampleBuffer& buffer, const std::filesystem::path& path) {
  write_bytes(path, to_binary(buffer));
}

SampleBuffer read_binary(const std::filesystem::path& path) {
  return from_binary(read_bytes(path), "binary:" + path.string());
}

}  // namespace ctcal::signal
