#include "ctcal/ctcal.h"

#include "async_meter.hpp"
#include "campaign.hpp"
#include "compliance.hpp"
#include "ct_model.hpp"
#include "error.hpp"
#include "file_io.hpp"
#include "json_io.hpp"
#include "record_store.hpp"
#include "signal_lab.hpp"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <optional>
#include <string>
#include <vector>

using nlohmann::json;

struct ctcal_transformer {
  ctcal::model::Transformer ct;
};

struct ctcal_buffer {
  ctcal::signal::SampleBuffer buffer;
};

struct ctcal_measurement {
  ctcal::meter::MeasurementResult result;
};

struct ctcal_report {
  ctcal::campaign::CampaignReport report;
};

struct ctcal_store {
  ctcal::campaign::RecordStore store;
};

namespace {

thread_local std::string g_last_error;

ctcal_status status_for(ctcal::ErrorCode code) {
  using ctcal::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return CTCAL_E_INVALID_ARGUMENT;
    case ErrorCode::OutOfRange: return CTCAL_E_OUT_OF_RANGE;
    case ErrorCode::Io: return CTCAL_E_IO;
    case ErrorCode::Parse: return CTCAL_E_PARSE;
    case ErrorCode::DegenerateReference: return CTCAL_E_DEGENERATE_REFERENCE;
    case ErrorCode::ProcedureViolation: return CTCAL_E_PROCEDURE_VIOLATION;
    case ErrorCode::Integrity: return CTCAL_E_INTEGRITY;
    case ErrorCode::UnknownClass: return CTCAL_E_UNKNOWN_CLASS;
  }
  return CTCAL_E_INTERNAL;
}

template <typename F>
ctcal_status guarded(F&& body) noexcept {
  try {
    body();
    return CTCAL_OK;
  } catch (const ctcal::Error& e) {
    g_last_error = e.what();
    return status_for(e.code());
  } catch (const json::exception& e) {
    g_last_error = e.what();
    return CTCAL_E_PARSE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CTCAL_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return CTCAL_E_INTERNAL;
  }
}

template <typename T>
void require(const T* p, const char* what) {
  if (p == nullptr) throw ctcal::Error(ctcal::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ctcal_error_pair to_c(const ctcal::model::ErrorPair& e) { return {e.ratio_error_pct, e.phase_error_min}; }
ctcal::model::ErrorPair from_c(const ctcal_error_pair& e) { return {e.ratio_error_pct, e.phase_error_min}; }

ctcal::signal::WaveformSpec from_c(const ctcal_waveform_spec& s) {
  ctcal::signal::WaveformSpec w;
  w.test_frequency = s.test_frequency;
  w.test_amplitude = s.test_amplitude;
  w.test_phase = s.test_phase;
  w.interference_frequency = s.interference_frequency;
  w.interference_amplitude = s.interference_amplitude;
  w.interference_phase = s.interference_phase;
  w.noise_rms = s.noise_rms;
  w.sample_rate = s.sample_rate;
  w.duration = s.duration;
  w.seed = s.seed;
  return w;
}

ctcal_waveform_spec to_c(const ctcal::signal::WaveformSpec& w) {
  return {w.test_frequency,         w.test_amplitude,     w.test_phase,  w.interference_frequency,
          w.interference_amplitude, w.interference_phase, w.noise_rms,  w.sample_rate,
          w.duration,               w.seed};
}

}  // namespace

extern "C" {

const char* ctcal_version(void) { return CTCAL_VERSION_STRING; }

const char* ctcal_last_error(void) { return g_last_error.c_str(); }

const char* ctcal_status_name(ctcal_status status) {
  switch (status) {
    case CTCAL_OK: return "ok";
    case CTCAL_E_INVALID_ARGUMENT: return "invalid argument";
    case CTCAL_E_OUT_OF_RANGE: return "out of range";
    case CTCAL_E_IO: return "i/o error";
    case CTCAL_E_PARSE: return "parse error";
    case CTCAL_E_DEGENERATE_REFERENCE: return "degenerate reference";
    case CTCAL_E_PROCEDURE_VIOLATION: return "procedure violation";
    case CTCAL_E_INTEGRITY: return "integrity failure";
    case CTCAL_E_UNKNOWN_CLASS: return "unknown accuracy class";
    case CTCAL_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void ctcal_string_free(char* s) { std::free(s); }

// ---- model ------------------------------------------------------------------

ctcal_status ctcal_transformer_load(const char* nameplate_path, const char* circuit_path, ctcal_transformer** out) {
  return guarded([&] {
    require(nameplate_path, "nameplate_path");
    require(circuit_path, "circuit_path");
    require(out, "out");
    auto t = std::make_unique<ctcal_transformer>();
    t->ct.nameplate = ctcal::load_nameplate(nameplate_path);
    t->ct.circuit = ctcal::load_circuit(circuit_path);
    *out = t.release();
  });
}

ctcal_status ctcal_transformer_from_json(const char* nameplate_json, const char* circuit_json,
                                         ctcal_transformer** out) {
  return guarded([&] {
    require(nameplate_json, "nameplate_json");
    require(circuit_json, "circuit_json");
    require(out, "out");
    auto t = std::make_unique<ctcal_transformer>();
    t->ct.nameplate =
        ctcal::json_as<ctcal::model::Nameplate>(ctcal::parse_json(nameplate_json, "nameplate"), "nameplate");
    t->ct.circuit =
        ctcal::json_as<ctcal::model::EquivalentCircuit>(ctcal::parse_json(circuit_json, "circuit"), "circuit");
    t->ct.validate();
    *out = t.release();
  });
}

void ctcal_transformer_free(ctcal_transformer* ct) { delete ct; }

ctcal_status ctcal_secondary_emf(const ctcal_transformer* ct, double secondary_current, double* out_volts) {
  return guarded([&] {
    require(ct, "ct");
    require(out_volts, "out_volts");
    *out_volts = ctcal::model::secondary_emf(ct->ct.circuit, secondary_current);
  });
}

ctcal_status ctcal_excitation(const ctcal_transformer* ct, double operating_point, double frequency,
                                    ctcal_excitation_state* out) {
  return guarded([&] {
    require(ct, "ct");
    require(out, "out");
    const auto s = ctcal::model::excitation_state(ct->ct, operating_point, frequency);
    *out = {s.emf, s.excitation_current_magnitude, s.excitation_impedance_magnitude, s.in_phase_fraction,
            s.quadrature_fraction};
  });
}

ctcal_status ctcal_composite_error(const ctcal_transformer* ct, double operating_point, double frequency,
                                   double* out_pct) {
  return guarded([&] {
    require(ct, "ct");
    require(out_pct, "out_pct");
    *out_pct = ctcal::model::composite_error(ct->ct, operating_point, frequency);
  });
}

ctcal_status ctcal_complex_error(const ctcal_transformer* ct, double operating_point, double frequency,
                                 ctcal_error_pair* out) {
  return guarded([&] {
    require(ct, "ct");
    require(out, "out");
    *out = to_c(ctcal::model::complex_error(ct->ct, operating_point, frequency));
  });
}

ctcal_status ctcal_additional_error(const ctcal_transformer* ct, double operating_point, double test_frequency,
                                    double rated_frequency, ctcal_error_pair* out) {
  return guarded([&] {
    require(ct, "ct");
    require(out, "out");
    *out = to_c(ctcal::model::additional_error(ct->ct, operating_point, test_frequency, rated_frequency));
  });
}

ctcal_error_pair ctcal_translate_to_rated(ctcal_error_pair low, ctcal_error_pair high) {
  return to_c(ctcal::model::translate_to_rated(from_c(low), from_c(high)));
}

// ---- signals ----------------------------------------------------------------

void ctcal_waveform_spec_init(ctcal_waveform_spec* out) {
  if (out != nullptr) *out = to_c(ctcal::signal::WaveformSpec{});
}

ctcal_status ctcal_waveform_spec_load(const char* path, ctcal_waveform_spec* out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = to_c(ctcal::load_waveform_spec(path));
  });
}

ctcal_status ctcal_synthesize(const ctcal_waveform_spec* spec, ctcal_buffer** out) {
  return guarded([&] {
    require(spec, "spec");
    require(out, "out");
    *out = new ctcal_buffer{ctcal::signal::synthesize(from_c(*spec))};
  });
}

ctcal_status ctcal_dut_channel(const ctcal_buffer* reference, ctcal_error_pair true_error,
                               const ctcal_waveform_spec* spec, ctcal_buffer** out) {
  return guarded([&] {
    require(reference, "reference");
    require(spec, "spec");
    require(out, "out");
    *out = new ctcal_buffer{ctcal::signal::dut_channel(reference->buffer, from_c(true_error), from_c(*spec))};
  });
}

ctcal_status ctcal_beat_window(double f_test, double f_interference, double* out_seconds) {
  return guarded([&] {
    require(out_seconds, "out_seconds");
    *out_seconds = ctcal::signal::beat_window(f_test, f_interference);
  });
}

size_t ctcal_buffer_length(const ctcal_buffer* buffer) { return buffer ? buffer->buffer.size() : 0; }
double ctcal_buffer_sample_rate(const ctcal_buffer* buffer) { return buffer ? buffer->buffer.sample_rate() : 0.0; }
const double* ctcal_buffer_samples(const ctcal_buffer* buffer) {
  return buffer ? buffer->buffer.samples().data() : nullptr;
}
const char* ctcal_buffer_origin(const ctcal_buffer* buffer) { return buffer ? buffer->buffer.origin().c_str() : ""; }

ctcal_status ctcal_buffer_write_csv(const ctcal_buffer* buffer, const char* path) {
  return guarded([&] {
    require(buffer, "buffer");
    require(path, "path");
    ctcal::signal::write_csv(buffer->buffer, path);
  });
}

ctcal_status ctcal_buffer_write_binary(const ctcal_buffer* buffer, const char* path) {
  return guarded([&] {
    require(buffer, "buffer");
    require(path, "path");
    ctcal::signal::write_binary(buffer->buffer, path);
  });
}

ctcal_status ctcal_buffer_read_csv(const char* path, ctcal_buffer** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ctcal_buffer{ctcal::signal::read_csv(path)};
  });
}

ctcal_status ctcal_buffer_read_binary(const char* path, ctcal_buffer** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ctcal_buffer{ctcal::signal::read_binary(path)};
  });
}

void ctcal_buffer_free(ctcal_buffer* buffer) { delete buffer; }

// ---- meter ------------------------------------------------------------------

ctcal_status ctcal_window_samples(double f_test, double f_interference, double sample_rate, uint64_t* out_count) {
  return guarded([&] {
    require(out_count, "out_count");
    *out_count = ctcal::meter::window_samples(f_test, f_interference, sample_rate);
  });
}

ctcal_status ctcal_phasor_estimate(const ctcal_buffer* buffer, double f_test, ctcal_phasor* out) {
  return guarded([&] {
    require(buffer, "buffer");
    require(out, "out");
    const auto p = ctcal::meter::phasor(buffer->buffer, f_test);
    *out = {p.amplitude, p.phase, p.frequency, p.window_samples};
  });
}

ctcal_status ctcal_estimate_pair(const ctcal_buffer* reference, const ctcal_buffer* dut, double f_test,
                                 ctcal_error_pair* out) {
  return guarded([&] {
    require(reference, "reference");
    require(dut, "dut");
    require(out, "out");
    *out = to_c(ctcal::meter::estimate_pair(reference->buffer, dut->buffer, f_test));
  });
}

ctcal_status ctcal_run_measurement(const ctcal_plan* plan, const ctcal_waveform_spec* base,
                                   const ctcal_error_pair* injected, size_t injected_count, ctcal_measurement** out) {
  return guarded([&] {
    require(plan, "plan");
    require(base, "base");
    require(injected, "injected");
    require(out, "out");
    if (plan->frequency_count > 0) require(plan->frequencies, "plan->frequencies");
    ctcal::meter::MeasurementPlan p;
    p.frequencies.assign(plan->frequencies, plan->frequencies + plan->frequency_count);
    p.sample_rate = plan->sample_rate;
    p.windows_per_frequency = plan->windows_per_frequency;
    p.interference_frequency = plan->interference_frequency;
    std::vector<ctcal::model::ErrorPair> errs;
    for (size_t i = 0; i < injected_count; ++i) errs.push_back(from_c(injected[i]));
    *out = new ctcal_measurement{ctcal::meter::run_measurement(p, from_c(*base), errs)};
  });
}

size_t ctcal_measurement_count(const ctcal_measurement* m) { return m ? m->result.frequencies.size() : 0; }

ctcal_status ctcal_measurement_at(const ctcal_measurement* m, size_t index, double* out_frequency,
                                  ctcal_error_pair* out_error) {
  return guarded([&] {
    require(m, "measurement");
    if (index >= m->result.frequencies.size()) {
      throw ctcal::Error(ctcal::ErrorCode::OutOfRange, "measurement index out of range");
    }
    if (out_frequency) *out_frequency = m->result.frequencies[index];
    if (out_error) *out_error = to_c(m->result.per_frequency[index]);
  });
}

ctcal_error_pair ctcal_measurement_translated(const ctcal_measurement* m) {
  return m ? to_c(m->result.translated) : ctcal_error_pair{0.0, 0.0};
}

double ctcal_measurement_total_duration(const ctcal_measurement* m) { return m ? m->result.total_duration : 0.0; }

ctcal_status ctcal_measurement_to_json(const ctcal_measurement* m, char** out_json) {
  return guarded([&] {
    require(m, "measurement");
    require(out_json, "out_json");
    *out_json = dup_string(json(m->result).dump(2));
  });
}

void ctcal_measurement_free(ctcal_measurement* m) { delete m; }

ctcal_status ctcal_suppression_sweep(double f_test, double sample_rate, const uint64_t* window_counts, size_t count,
                                     double* out_worst_bias) {
  return guarded([&] {
    if (count == 0) return;
    require(window_counts, "window_counts");
    require(out_worst_bias, "out_worst_bias");
    std::vector<std::size_t> windows(window_counts, window_counts + count);
    const auto points = ctcal::meter::suppression_sweep(f_test, sample_rate, windows);
    for (size_t i = 0; i < count; ++i) out_worst_bias[i] = points[i].worst_bias;
  });
}

// ---- compliance ---------------------------------------------------------------

ctcal_status ctcal_check_preconditions(const ctcal_environment* env, int* out_passed, char** out_json) {
  return guarded([&] {
    require(env, "env");
    ctcal::compliance::EnvironmentReport e{env->relative_humidity_pct, env->standard_class_levels_above_dut,
                                           env->standard_burden_deviation_pct,
                                           env->measuring_device_error_fraction_of_dut_limit,
                                           env->field_interference_error_ratio};
    const auto verdicts = ctcal::compliance::check_preconditions(e);
    if (out_passed) *out_passed = ctcal::compliance::all_passed(verdicts) ? 1 : 0;
    if (out_json) *out_json = dup_string(json(verdicts).dump());
  });
}

ctcal_status ctcal_check_insulation(const ctcal_insulation* reading, int* out_passed, char** out_json) {
  return guarded([&] {
    require(reading, "reading");
    ctcal::compliance::InsulationReading r;
    r.primary_to_secondary_megohm = reading->primary_to_secondary_megohm;
    r.secondary_to_ground_megohm = reading->secondary_to_ground_megohm;
    if (reading->has_low_voltage) r.low_voltage_megohm = reading->low_voltage_megohm;
    r.megohmmeter_speed_rpm = reading->megohmmeter_speed_rpm;
    const auto v = ctcal::compliance::check_insulation(r);
    if (out_passed) *out_passed = v.passed ? 1 : 0;
    if (out_json) *out_json = dup_string(json{{"checks", v.checks}, {"warnings", v.warnings}}.dump());
  });
}

ctcal_status ctcal_withstand_profile(double factory_test_voltage, double* out, size_t capacity, size_t* out_points) {
  return guarded([&] {
    const auto profile = ctcal::compliance::withstand_profile(factory_test_voltage);
    if (out_points) *out_points = profile.size();
    if (capacity > 0) require(out, "out");
    for (size_t i = 0; i < profile.size() && i < capacity; ++i) {
      out[2 * i] = profile[i].time_s;
      out[2 * i + 1] = profile[i].volts;
    }
  });
}

ctcal_status ctcal_polarity_check(const double* current_fractions, const int* deflection_signs, size_t count,
                                  ctcal_polarity* out) {
  return guarded([&] {
    require(out, "out");
    if (count > 0) {
      require(current_fractions, "current_fractions");
      require(deflection_signs, "deflection_signs");
    }
    std::vector<ctcal::compliance::PolarityStep> steps;
    for (size_t i = 0; i < count; ++i) steps.push_back({current_fractions[i], deflection_signs[i]});
    switch (ctcal::compliance::polarity_check(steps)) {
      case ctcal::compliance::Polarity::Subtractive: *out = CTCAL_POLARITY_SUBTRACTIVE; break;
      case ctcal::compliance::Polarity::Additive: *out = CTCAL_POLARITY_ADDITIVE; break;
      case ctcal::compliance::Polarity::Indeterminate: *out = CTCAL_POLARITY_INDETERMINATE; break;
    }
  });
}

// ---- campaign ---------------------------------------------------------------

ctcal_status ctcal_campaign_run(const char* config_path, ctcal_store* store, ctcal_report** out) {
  return guarded([&] {
    require(config_path, "config_path");
    require(out, "out");
    const auto config = ctcal::campaign::load_config(config_path);
    ctcal::campaign::RecordStore scratch;
    auto& target = store ? store->store : scratch;
    *out = new ctcal_report{ctcal::campaign::run_campaign(config, target)};
  });
}

ctcal_status ctcal_report_load(const char* path, ctcal_report** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ctcal_report{ctcal::campaign::report_from_json(ctcal::load_json(path))};
  });
}

ctcal_status ctcal_report_render(const ctcal_report* report, ctcal_report_format format, char** out) {
  return guarded([&] {
    require(report, "report");
    require(out, "out");
    const auto f = format == CTCAL_FORMAT_TEXT ? ctcal::campaign::ReportFormat::Text : ctcal::campaign::ReportFormat::Json;
    *out = dup_string(ctcal::campaign::render_report(report->report, f));
  });
}

int ctcal_report_passed(const ctcal_report* report) { return report && report->report.overall_passed ? 1 : 0; }
int ctcal_report_halted(const ctcal_report* report) { return report && report->report.halted ? 1 : 0; }
void ctcal_report_free(ctcal_report* report) { delete report; }

ctcal_status ctcal_preset_run(const char* preset_path, uint64_t seed, int has_seed, int* out_passed, char** out_json) {
  return guarded([&] {
    require(preset_path, "preset_path");
    const auto out = ctcal::campaign::run_preset(ctcal::load_json(preset_path),
                                                 has_seed ? std::optional<std::uint64_t>(seed) : std::nullopt);
    if (out_passed) *out_passed = out.passed ? 1 : 0;
    if (out_json) {
      *out_json = dup_string(json{{"kind", out.kind}, {"passed", out.passed}, {"summary", out.summary},
                                  {"csv_files", out.csv_files}}
                                 .dump());
    }
  });
}

ctcal_status ctcal_store_create(const char* path, ctcal_store** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ctcal_store{ctcal::campaign::RecordStore::create(path)};
  });
}

ctcal_status ctcal_store_open(const char* path, ctcal_store** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ctcal_store{ctcal::campaign::RecordStore::open(path)};
  });
}

ctcal_store* ctcal_store_new_memory(void) { return new (std::nothrow) ctcal_store{}; }

ctcal_status ctcal_store_append(ctcal_store* store, uint64_t record_id, int64_t timestamp, int item,
                                const char* payload) {
  return guarded([&] {
    require(store, "store");
    if (item < 1 || item > 6) throw ctcal::Error(ctcal::ErrorCode::InvalidArgument, "test item code must be 1..6");
    ctcal::campaign::TestRecord r;
    r.record_id = record_id;
    r.timestamp = timestamp;
    r.item = static_cast<ctcal::campaign::TestItem>(item);
    r.payload = payload ? payload : "";
    store->store.append(std::move(r));
  });
}

uint64_t ctcal_store_last_id(const ctcal_store* store) { return store ? store->store.last_id() : 0; }

ctcal_status ctcal_store_head_hex(const ctcal_store* store, char** out_hex) {
  return guarded([&] {
    require(store, "store");
    require(out_hex, "out_hex");
    *out_hex = dup_string(ctcal::to_hex(store->store.head_digest()));
  });
}

void ctcal_store_free(ctcal_store* store) { delete store; }

ctcal_status ctcal_store_verify_file(const char* path, size_t* out_records) {
  return guarded([&] {
    require(path, "path");
    const auto check = ctcal::campaign::verify_chain(ctcal::read_bytes(path));
    if (!check.valid) throw ctcal::Error(ctcal::ErrorCode::Integrity, check.error);
    if (out_records) *out_records = check.records;
  });
}

}  // extern "C"
