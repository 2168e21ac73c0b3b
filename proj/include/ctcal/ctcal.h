#ifndef CTCAL_CTCAL_H
#define CTCAL_CTCAL_H

/*
 * ctcal: current-transformer error calibration by the asynchronous-frequency
 * (heterodyne) method.
 *
 * C interface over the C++ core. Objects are opaque handles created by a
 * *_load / *_create / *_new call and released with the matching *_free.
 * Every fallible call returns a ctcal_status; on failure the message for the
 * calling thread is available from ctcal_last_error() until the next failing
 * call on that thread. Strings returned through `char**` are heap-allocated
 * and must be released with ctcal_string_free().
 *
 * Units: amperes (RMS), volts, ohms, hertz, seconds. Ratio errors are in
 * percent, phase displacements in arc-minutes.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CTCAL_BUILDING_LIBRARY)
#    define CTCAL_API __declspec(dllexport)
#  else
#    define CTCAL_API __declspec(dllimport)
#  endif
#else
#  define CTCAL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ctcal_status {
  CTCAL_OK = 0,
  CTCAL_E_INVALID_ARGUMENT = 1,
  CTCAL_E_OUT_OF_RANGE = 2,
  CTCAL_E_IO = 3,
  CTCAL_E_PARSE = 4,
  CTCAL_E_DEGENERATE_REFERENCE = 5,
  CTCAL_E_PROCEDURE_VIOLATION = 6,
  CTCAL_E_INTEGRITY = 7,
  CTCAL_E_UNKNOWN_CLASS = 8,
  CTCAL_E_INTERNAL = 99
} ctcal_status;

CTCAL_API const char* ctcal_version(void);
CTCAL_API const char* ctcal_last_error(void);
CTCAL_API const char* ctcal_status_name(ctcal_status status);
CTCAL_API void ctcal_string_free(char* s);

/* ---- CT equivalent-circuit model ------------------------------------- */

typedef struct ctcal_transformer ctcal_transformer;

typedef struct ctcal_error_pair {
  double ratio_error_pct;
  double phase_error_min;
} ctcal_error_pair;

typedef struct ctcal_excitation_state {
  double emf;
  double excitation_current;
  double excitation_impedance;
  double in_phase_fraction;
  double quadrature_fraction;
} ctcal_excitation_state;

/* Nameplate and circuit documents in the JSON schemas of nameplate.json and
 * circuit.json. */
CTCAL_API ctcal_status ctcal_transformer_load(const char* nameplate_path, const char* circuit_path,
                                              ctcal_transformer** out);
CTCAL_API ctcal_status ctcal_transformer_from_json(const char* nameplate_json, const char* circuit_json,
                                                   ctcal_transformer** out);
CTCAL_API void ctcal_transformer_free(ctcal_transformer* ct);

CTCAL_API ctcal_status ctcal_secondary_emf(const ctcal_transformer* ct, double secondary_current, double* out_volts);
CTCAL_API ctcal_status ctcal_excitation(const ctcal_transformer* ct, double operating_point, double frequency,
                                              ctcal_excitation_state* out);
CTCAL_API ctcal_status ctcal_composite_error(const ctcal_transformer* ct, double operating_point, double frequency,
                                             double* out_pct);
CTCAL_API ctcal_status ctcal_complex_error(const ctcal_transformer* ct, double operating_point, double frequency,
                                           ctcal_error_pair* out);
CTCAL_API ctcal_status ctcal_additional_error(const ctcal_transformer* ct, double operating_point,
                                              double test_frequency, double rated_frequency, ctcal_error_pair* out);
CTCAL_API ctcal_error_pair ctcal_translate_to_rated(ctcal_error_pair low, ctcal_error_pair high);

/* ---- waveform synthesis ------------------------------------------------ */

typedef struct ctcal_waveform_spec {
  double test_frequency;
  double test_amplitude; /* RMS */
  double test_phase;     /* radians, sine phase */
  double interference_frequency;
  double interference_amplitude; /* RMS */
  double interference_phase;
  double noise_rms;
  double sample_rate;
  double duration;
  uint64_t seed;
} ctcal_waveform_spec;

typedef struct ctcal_buffer ctcal_buffer;

/* Fills `out` with defaults: 45 Hz test, 50 Hz interference, 9000 Hz, 0.2 s. */
CTCAL_API void ctcal_waveform_spec_init(ctcal_waveform_spec* out);
CTCAL_API ctcal_status ctcal_waveform_spec_load(const char* path, ctcal_waveform_spec* out);
CTCAL_API ctcal_status ctcal_synthesize(const ctcal_waveform_spec* spec, ctcal_buffer** out);
CTCAL_API ctcal_status ctcal_dut_channel(const ctcal_buffer* reference, ctcal_error_pair true_error,
                                         const ctcal_waveform_spec* spec, ctcal_buffer** out);
CTCAL_API ctcal_status ctcal_beat_window(double f_test, double f_interference, double* out_seconds);

CTCAL_API size_t ctcal_buffer_length(const ctcal_buffer* buffer);
CTCAL_API double ctcal_buffer_sample_rate(const ctcal_buffer* buffer);
CTCAL_API const double* ctcal_buffer_samples(const ctcal_buffer* buffer);
CTCAL_API const char* ctcal_buffer_origin(const ctcal_buffer* buffer);
CTCAL_API ctcal_status ctcal_buffer_write_csv(const ctcal_buffer* buffer, const char* path);
CTCAL_API ctcal_status ctcal_buffer_write_binary(const ctcal_buffer* buffer, const char* path);
CTCAL_API ctcal_status ctcal_buffer_read_csv(const char* path, ctcal_buffer** out);
CTCAL_API ctcal_status ctcal_buffer_read_binary(const char* path, ctcal_buffer** out);
CTCAL_API void ctcal_buffer_free(ctcal_buffer* buffer);

/* ---- heterodyne meter -------------------------------------------------- */

typedef struct ctcal_phasor {
  double amplitude; /* RMS */
  double phase;     /* radians in (-pi, pi] */
  double frequency;
  uint64_t window_samples;
} ctcal_phasor;

typedef struct ctcal_plan {
  const double* frequencies;
  size_t frequency_count;
  double sample_rate;
  uint64_t windows_per_frequency;
  double interference_frequency;
} ctcal_plan;

typedef struct ctcal_measurement ctcal_measurement;

CTCAL_API ctcal_status ctcal_window_samples(double f_test, double f_interference, double sample_rate,
                                            uint64_t* out_count);
CTCAL_API ctcal_status ctcal_phasor_estimate(const ctcal_buffer* buffer, double f_test, ctcal_phasor* out);
CTCAL_API ctcal_status ctcal_estimate_pair(const ctcal_buffer* reference, const ctcal_buffer* dut, double f_test,
                                           ctcal_error_pair* out);

/* `injected` holds 1 or plan->frequency_count error pairs. */
CTCAL_API ctcal_status ctcal_run_measurement(const ctcal_plan* plan, const ctcal_waveform_spec* base,
                                             const ctcal_error_pair* injected, size_t injected_count,
                                             ctcal_measurement** out);
CTCAL_API size_t ctcal_measurement_count(const ctcal_measurement* m);
CTCAL_API ctcal_status ctcal_measurement_at(const ctcal_measurement* m, size_t index, double* out_frequency,
                                            ctcal_error_pair* out_error);
CTCAL_API ctcal_error_pair ctcal_measurement_translated(const ctcal_measurement* m);
CTCAL_API double ctcal_measurement_total_duration(const ctcal_measurement* m);
CTCAL_API ctcal_status ctcal_measurement_to_json(const ctcal_measurement* m, char** out_json);
CTCAL_API void ctcal_measurement_free(ctcal_measurement* m);

/* Worst amplitude bias (A) over a 64-point interference phase grid at 10 %
 * interference on a 5 A tone, one value per window length. */
CTCAL_API ctcal_status ctcal_suppression_sweep(double f_test, double sample_rate, const uint64_t* window_counts,
                                               size_t count, double* out_worst_bias);

/* ---- compliance -------------------------------------------------------- */

typedef struct ctcal_environment {
  double relative_humidity_pct;
  int standard_class_levels_above_dut;
  double standard_burden_deviation_pct;
  double measuring_device_error_fraction_of_dut_limit;
  double field_interference_error_ratio;
} ctcal_environment;

typedef struct ctcal_insulation {
  double primary_to_secondary_megohm;
  double secondary_to_ground_megohm;
  double low_voltage_megohm; /* used only when has_low_voltage != 0 */
  int has_low_voltage;
  double megohmmeter_speed_rpm;
} ctcal_insulation;

typedef enum ctcal_polarity {
  CTCAL_POLARITY_SUBTRACTIVE = 0,
  CTCAL_POLARITY_ADDITIVE = 1,
  CTCAL_POLARITY_INDETERMINATE = 2
} ctcal_polarity;

/* Verdict lists are returned as JSON arrays of {rule_id, rule, passed, detail};
 * `*out_passed` is the conjunction. */
CTCAL_API ctcal_status ctcal_check_preconditions(const ctcal_environment* env, int* out_passed, char** out_json);
CTCAL_API ctcal_status ctcal_check_insulation(const ctcal_insulation* reading, int* out_passed, char** out_json);
/* Writes up to `capacity` (time_s, volts) pairs interleaved into `out`;
 * `*out_points` receives the full point count. */
CTCAL_API ctcal_status ctcal_withstand_profile(double factory_test_voltage, double* out, size_t capacity,
                                               size_t* out_points);
CTCAL_API ctcal_status ctcal_polarity_check(const double* current_fractions, const int* deflection_signs, size_t count,
                                            ctcal_polarity* out);

/* ---- campaigns, reports, records ----------------------------------------- */

typedef struct ctcal_report ctcal_report;
typedef struct ctcal_store ctcal_store;

typedef enum ctcal_report_format { CTCAL_FORMAT_JSON = 0, CTCAL_FORMAT_TEXT = 1 } ctcal_report_format;

/* Runs a campaign config. When `store` is non-null its records are appended
 * there; otherwise an in-memory store is used. */
CTCAL_API ctcal_status ctcal_campaign_run(const char* config_path, ctcal_store* store, ctcal_report** out);
CTCAL_API ctcal_status ctcal_report_load(const char* path, ctcal_report** out);
CTCAL_API ctcal_status ctcal_report_render(const ctcal_report* report, ctcal_report_format format, char** out);
CTCAL_API int ctcal_report_passed(const ctcal_report* report);
CTCAL_API int ctcal_report_halted(const ctcal_report* report);
CTCAL_API void ctcal_report_free(ctcal_report* report);

/* Runs a table1/table2 preset document. `seed` overrides the preset seed when
 * `has_seed` != 0. Output is a JSON object {passed, summary, csv_files}. */
CTCAL_API ctcal_status ctcal_preset_run(const char* preset_path, uint64_t seed, int has_seed, int* out_passed,
                                        char** out_json);

CTCAL_API ctcal_status ctcal_store_create(const char* path, ctcal_store** out);
CTCAL_API ctcal_status ctcal_store_open(const char* path, ctcal_store** out);
CTCAL_API ctcal_store* ctcal_store_new_memory(void);
/* `record_id` must be the successor of the last id. `item` is 1..6
 * (precondition, insulation, withstand, polarity, error-point, measurement). */
CTCAL_API ctcal_status ctcal_store_append(ctcal_store* store, uint64_t record_id, int64_t timestamp, int item,
                                          const char* payload);
CTCAL_API uint64_t ctcal_store_last_id(const ctcal_store* store);
CTCAL_API ctcal_status ctcal_store_head_hex(const ctcal_store* store, char** out_hex);
CTCAL_API void ctcal_store_free(ctcal_store* store);
/* Returns CTCAL_OK when every record links correctly; the record count goes to
 * `*out_records` when non-null. */
CTCAL_API ctcal_status ctcal_store_verify_file(const char* path, size_t* out_records);

#ifdef __cplusplus
}
#endif

#endif /* CTCAL_CTCAL_H */
