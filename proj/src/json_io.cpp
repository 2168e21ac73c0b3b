#include "json_io.hpp"

#include "file_io.hpp"

#include <numbers>

using nlohmann::json;

namespace ctcal::model {

void to_json(json& j, const Nameplate& v) {
  j = json{{"rated_primary_current", v.rated_primary_current},
           {"rated_secondary_current", v.rated_secondary_current},
           {"rated_burden_va", v.rated_burden_va},
           {"accuracy_class", v.accuracy_class},
           {"rated_frequency", v.rated_frequency}};
}

void from_json(const json& j, Nameplate& v) {
  j.at("rated_primary_current").get_to(v.rated_primary_current);
  j.at("rated_secondary_current").get_to(v.rated_secondary_current);
  j.at("rated_burden_va").get_to(v.rated_burden_va);
  j.at("accuracy_class").get_to(v.accuracy_class);
  v.rated_frequency = j.value("rated_frequency", 50.0);
}

void to_json(json& j, const ExcitationPoint& v) {
  j = json{{"operating_point", v.operating_point},
           {"emf", v.emf},
           {"composite_error", v.composite_error},
           {"in_phase_fraction", v.in_phase_fraction}};
}

void from_json(const json& j, ExcitationPoint& v) {
  j.at("operating_point").get_to(v.operating_point);
  j.at("emf").get_to(v.emf);
  j.at("composite_error").get_to(v.composite_error);
  v.in_phase_fraction = j.value("in_phase_fraction", std::numbers::sqrt2 / 2.0);
}

void to_json(json& j, const EquivalentCircuit& v) {
  j = json{{"secondary_resistance", v.secondary_resistance},
           {"secondary_leakage_reactance", v.secondary_leakage_reactance},
           {"burden_resistance", v.burden_resistance},
           {"burden_reactance", v.burden_reactance},
           {"excitation_points", v.excitation_points}};
}

void from_json(const json& j, EquivalentCircuit& v) {
  j.at("secondary_resistance").get_to(v.secondary_resistance);
  v.secondary_leakage_reactance = j.value("secondary_leakage_reactance", 0.0);
  j.at("burden_resistance").get_to(v.burden_resistance);
  v.burden_reactance = j.value("burden_reactance", 0.0);
  v.excitation_points = j.value("excitation_points", std::vector<ExcitationPoint>{});
}

void to_json(json& j, const ErrorPair& v) {
  j = json{{"ratio_error_pct", v.ratio_error_pct}, {"phase_error_min", v.phase_error_min}};
}

void from_json(const json& j, ErrorPair& v) {
  j.at("ratio_error_pct").get_to(v.ratio_error_pct);
  j.at("phase_error_min").get_to(v.phase_error_min);
}

}  // namespace ctcal::model

namespace ctcal::signal {

void to_json(json& j, const WaveformSpec& v) {
  j = json{{"test_frequency", v.test_frequency},
           {"test_amplitude", v.test_amplitude},
           {"test_phase", v.test_phase},
           {"interference_frequency", v.interference_frequency},
           {"interference_amplitude", v.interference_amplitude},
           {"interference_phase", v.interference_phase},
           {"noise_rms", v.noise_rms},
           {"sample_rate", v.sample_rate},
           {"duration", v.duration},
           {"seed", v.seed}};
}

void from_json(const json& j, WaveformSpec& v) {
  const WaveformSpec d;
  v.test_frequency = j.value("test_frequency", d.test_frequency);
  v.test_amplitude = j.value("test_amplitude", d.test_amplitude);
  v.test_phase = j.value("test_phase", d.test_phase);
  v.interference_frequency = j.value("interference_frequency", d.interference_frequency);
  v.interference_amplitude = j.value("interference_amplitude", d.interference_amplitude);
  v.interference_phase = j.value("interference_phase", d.interference_phase);
  v.noise_rms = j.value("noise_rms", d.noise_rms);
  v.sample_rate = j.value("sample_rate", d.sample_rate);
  // "beat" asks for exactly one beat window against the interference tone.
  if (j.contains("duration") && j.at("duration").is_string()) {
    if (j.at("duration").get<std::string>() != "beat") {
      throw Error(ErrorCode::Parse, "duration must be a number of seconds or \"beat\"");
    }
    v.duration = beat_window(v.test_frequency, v.interference_frequency);
  } else {
    v.duration = j.value("duration", d.duration);
  }
  v.seed = j.value("seed", d.seed);
}

}  // namespace ctcal::signal

namespace ctcal::meter {

void to_json(json& j, const MeasurementPlan& v) {
  j = json{{"frequencies", v.frequencies},
           {"sample_rate", v.sample_rate},
           {"windows_per_frequency", v.windows_per_frequency},
           {"interference_frequency", v.interference_frequency},
           {"total_duration", v.total_duration()}};
}

void from_json(const json& j, MeasurementPlan& v) {
  j.at("frequencies").get_to(v.frequencies);
  j.at("sample_rate").get_to(v.sample_rate);
  v.windows_per_frequency = j.value("windows_per_frequency", std::size_t{1});
  v.interference_frequency = j.value("interference_frequency", 50.0);
}

void to_json(json& j, const MeasurementResult& v) {
  j = json{{"frequencies", v.frequencies},
           {"window_samples", v.window_samples},
           {"per_frequency", v.per_frequency},
           {"translated", v.translated},
           {"total_duration", v.total_duration}};
}

void from_json(const json& j, MeasurementResult& v) {
  j.at("frequencies").get_to(v.frequencies);
  j.at("window_samples").get_to(v.window_samples);
  j.at("per_frequency").get_to(v.per_frequency);
  j.at("translated").get_to(v.translated);
  j.at("total_duration").get_to(v.total_duration);
}

void to_json(json& j, const SweepPoint& v) {
  j = json{{"window_samples", v.window_samples}, {"worst_bias", v.worst_bias}};
}

}  // namespace ctcal::meter

namespace ctcal::compliance {

void to_json(json& j, const Verdict& v) {
  j = json{{"rule_id", v.rule_id}, {"rule", v.rule}, {"passed", v.passed}, {"detail", v.detail}};
}

void from_json(const json& j, Verdict& v) {
  j.at("rule_id").get_to(v.rule_id);
  j.at("rule").get_to(v.rule);
  j.at("passed").get_to(v.passed);
  j.at("detail").get_to(v.detail);
}

void to_json(json& j, const EnvironmentReport& v) {
  j = json{{"relative_humidity_pct", v.relative_humidity_pct},
           {"standard_class_levels_above_dut", v.standard_class_levels_above_dut},
           {"standard_burden_deviation_pct", v.standard_burden_deviation_pct},
           {"measuring_device_error_fraction_of_dut_limit", v.measuring_device_error_fraction_of_dut_limit},
           {"field_interference_error_ratio", v.field_interference_error_ratio}};
}

void from_json(const json& j, EnvironmentReport& v) {
  j.at("relative_humidity_pct").get_to(v.relative_humidity_pct);
  j.at("standard_class_levels_above_dut").get_to(v.standard_class_levels_above_dut);
  j.at("standard_burden_deviation_pct").get_to(v.standard_burden_deviation_pct);
  j.at("measuring_device_error_fraction_of_dut_limit").get_to(v.measuring_device_error_fraction_of_dut_limit);
  j.at("field_interference_error_ratio").get_to(v.field_interference_error_ratio);
}

void to_json(json& j, const InsulationReading& v) {
  j = json{{"primary_to_secondary_megohm", v.primary_to_secondary_megohm},
           {"secondary_to_ground_megohm", v.secondary_to_ground_megohm},
           {"megohmmeter_speed_rpm", v.megohmmeter_speed_rpm}};
  if (v.low_voltage_megohm) j["low_voltage_megohm"] = *v.low_voltage_megohm;
}

void from_json(const json& j, InsulationReading& v) {
  j.at("primary_to_secondary_megohm").get_to(v.primary_to_secondary_megohm);
  j.at("secondary_to_ground_megohm").get_to(v.secondary_to_ground_megohm);
  v.megohmmeter_speed_rpm = j.value("megohmmeter_speed_rpm", 120.0);
  if (j.contains("low_voltage_megohm") && !j.at("low_voltage_megohm").is_null()) {
    v.low_voltage_megohm = j.at("low_voltage_megohm").get<double>();
  } else {
    v.low_voltage_megohm.reset();
  }
}

void to_json(json& j, const PolarityStep& v) {
  j = json{{"primary_current_fraction", v.primary_current_fraction}, {"deflection_sign", v.deflection_sign}};
}

void from_json(const json& j, PolarityStep& v) {
  j.at("primary_current_fraction").get_to(v.primary_current_fraction);
  j.at("deflection_sign").get_to(v.deflection_sign);
}

void to_json(json& j, const SchedulePoint& v) {
  j = json{{"operating_point", v.operating_point}, {"burden_fraction", v.burden_fraction}};
}

void from_json(const json& j, SchedulePoint& v) {
  j.at("operating_point").get_to(v.operating_point);
  j.at("burden_fraction").get_to(v.burden_fraction);
}

void to_json(json& j, const RampPoint& v) { j = json::array({v.time_s, v.volts}); }

void to_json(json& j, const ClassLimitTable& v) {
  json classes = json::object();
  for (const auto& [name, limits] : v.classes) {
    json rows = json::array();
    for (const auto& l : limits) {
      rows.push_back({{"operating_point", l.operating_point},
                      {"ratio_limit_pct", l.ratio_limit_pct},
                      {"phase_limit_min", l.phase_limit_min}});
    }
    classes[name] = rows;
  }
  j = json{{"source", v.source}, {"classes", classes}};
}

void from_json(const json& j, ClassLimitTable& v) {
  v.source = j.value("source", std::string{});
  v.classes.clear();
  for (const auto& [name, rows] : j.at("classes").items()) {
    auto& limits = v.classes[name];
    for (const auto& r : rows) {
      limits.push_back({r.at("operating_point").get<double>(), r.at("ratio_limit_pct").get<double>(),
                        r.at("phase_limit_min").get<double>()});
    }
  }
}

}  // namespace ctcal::compliance

namespace ctcal {

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, what + ": " + e.what());
  }
}

json load_json(const std::filesystem::path& path) { return parse_json(read_text(path), path.string()); }

model::Nameplate load_nameplate(const std::filesystem::path& path) {
  auto v = json_as<model::Nameplate>(load_json(path), path.string());
  v.validate();
  return v;
}

model::EquivalentCircuit load_circuit(const std::filesystem::path& path) {
  auto v = json_as<model::EquivalentCircuit>(load_json(path), path.string());
  v.validate();
  return v;
}

signal::WaveformSpec load_waveform_spec(const std::filesystem::path& path) {
  auto v = json_as<signal::WaveformSpec>(load_json(path), path.string());
  v.validate();
  return v;
}

compliance::ClassLimitTable load_class_limits(const std::filesystem::path& path) {
  auto v = json_as<compliance::ClassLimitTable>(load_json(path), path.string());
  v.validate();
  return v;
}

}  // namespace ctcal
