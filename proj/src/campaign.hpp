#pragma once

#include "async_meter.hpp"
#include "compliance.hpp"
#include "ct_model.hpp"
#include "record_store.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ctcal::campaign {

std::string tool_version();

/// How each scheduled error point is simulated.
struct SignalSettings {
  double interference_fraction = 0.1;  // of the test amplitude
  double noise_fraction = 0.0;         // noise RMS as a fraction of the test amplitude
  std::uint64_t seed = 1;
};

struct WithstandInput {
  double factory_test_voltage = 0.0;
  bool breakdown_observed = false;
};

struct CampaignConfig {
  model::Transformer transformer;
  compliance::ClassLimitTable class_limits;
  compliance::EnvironmentReport environment;
  compliance::InsulationReading insulation;
  WithstandInput withstand;
  std::vector<compliance::PolarityStep> polarity;
  std::vector<compliance::SchedulePoint> extra_points;
  meter::MeasurementPlan plan;
  SignalSettings signal;
  // Name -> hex SHA-256 of the config and every file it pulled in.
  std::map<std::string, std::string> input_digests;
};

/// Loads a campaign config. `nameplate`, `circuit` and `class_limits` may be
/// inline objects or paths relative to the config file.
CampaignConfig load_config(const std::filesystem::path& path);
CampaignConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);

struct ItemResult {
  std::string item;
  bool passed = false;
  std::vector<compliance::Verdict> verdicts;
  std::vector<std::string> notes;

  bool operator==(const ItemResult&) const = default;
};

struct PointMeasurement {
  compliance::SchedulePoint point;
  std::vector<model::ErrorPair> injected;  // model error at each test frequency
  model::ErrorPair rated_model;           // model error at rated frequency
  meter::MeasurementResult measurement;

  bool operator==(const PointMeasurement&) const = default;
};

struct CampaignReport {
  std::string tool_version;
  std::int64_t generated_at = 0;  // UTC seconds
  model::Nameplate nameplate;
  std::vector<compliance::Verdict> environment;
  std::vector<ItemResult> items;
  std::vector<PointMeasurement> measurements;
  bool halted = false;
  bool overall_passed = false;
  std::uint64_t record_count = 0;
  std::map<std::string, std::string> input_digests;

  bool operator==(const CampaignReport&) const = default;
};

using Clock = std::function<std::int64_t()>;
std::int64_t utc_now();

/// Runs precondition -> insulation -> withstand -> polarity -> error points,
/// appending one record per step to `store`. Module errors fail the item and
/// the campaign continues; failed preconditions halt it.
CampaignReport run_campaign(const CampaignConfig& config, RecordStore& store, const Clock& clock = utc_now);

nlohmann::json report_to_json(const CampaignReport& report);
CampaignReport report_from_json(const nlohmann::json& j);

enum class ReportFormat { Json, Text };
std::string render_report(const CampaignReport& report, ReportFormat format);

// ---- benchmark sweep presets --------------------------------------------

struct PresetOutput {
  std::string kind;
  bool passed = false;
  nlohmann::json summary;
  std::map<std::string, std::string> csv_files;  // file name -> contents
};

/// `table1`: worst-case bias sweeps that must decrease strictly with window
/// length. `table2`: repeated seeded tone-amplitude estimates whose spread
/// must stay within a bound.
PresetOutput run_preset(const nlohmann::json& preset, std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace ctcal::campaign
