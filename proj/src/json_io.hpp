#pragma once

// JSON forms of the domain types. Field names match the struct members; all
// quantities are SI (A, V, ohm, Hz, s) except where a name says otherwise
// (_pct, _min for arc-minutes, _megohm, _rpm).

#include "async_meter.hpp"
#include "compliance.hpp"
#include "error.hpp"
#include "ct_model.hpp"
#include "signal_lab.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace ctcal::model {
void to_json(nlohmann::json& j, const Nameplate& v);
void from_json(const nlohmann::json& j, Nameplate& v);
void to_json(nlohmann::json& j, const ExcitationPoint& v);
void from_json(const nlohmann::json& j, ExcitationPoint& v);
void to_json(nlohmann::json& j, const EquivalentCircuit& v);
void from_json(const nlohmann::json& j, EquivalentCircuit& v);
void to_json(nlohmann::json& j, const ErrorPair& v);
void from_json(const nlohmann::json& j, ErrorPair& v);
}  // namespace ctcal::model

namespace ctcal::signal {
void to_json(nlohmann::json& j, const WaveformSpec& v);
void from_json(const nlohmann::json& j, WaveformSpec& v);
}  // namespace ctcal::signal

namespace ctcal::meter {
void to_json(nlohmann::json& j, const MeasurementPlan& v);
void from_json(const nlohmann::json& j, MeasurementPlan& v);
void to_json(nlohmann::json& j, const MeasurementResult& v);
void from_json(const nlohmann::json& j, MeasurementResult& v);
void to_json(nlohmann::json& j, const SweepPoint& v);
}  // namespace ctcal::meter

namespace ctcal::compliance {
void to_json(nlohmann::json& j, const Verdict& v);
void from_json(const nlohmann::json& j, Verdict& v);
void to_json(nlohmann::json& j, const EnvironmentReport& v);
void from_json(const nlohmann::json& j, EnvironmentReport& v);
void to_json(nlohmann::json& j, const InsulationReading& v);
void from_json(const nlohmann::json& j, InsulationReading& v);
void to_json(nlohmann::json& j, const PolarityStep& v);
void from_json(const nlohmann::json& j, PolarityStep& v);
void to_json(nlohmann::json& j, const SchedulePoint& v);
void from_json(const nlohmann::json& j, SchedulePoint& v);
void to_json(nlohmann::json& j, const RampPoint& v);
void to_json(nlohmann::json& j, const ClassLimitTable& v);
void from_json(const nlohmann::json& j, ClassLimitTable& v);
}  // namespace ctcal::compliance

namespace ctcal {

nlohmann::json parse_json(const std::string& text, const std::string& what);
nlohmann::json load_json(const std::filesystem::path& path);

/// Converts with schema errors mapped onto ErrorCode::Parse.
template <typename T>
T json_as(const nlohmann::json& j, const std::string& what) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, what + ": " + e.what());
  }
}

model::Nameplate load_nameplate(const std::filesystem::path& path);
model::EquivalentCircuit load_circuit(const std::filesystem::path& path);
signal::WaveformSpec load_waveform_spec(const std::filesystem::path& path);
compliance::ClassLimitTable load_class_limits(const std::filesystem::path& path);

}  // namespace ctcal
