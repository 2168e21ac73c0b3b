#pragma once

#include "ct_model.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ctcal::compliance {

/// Outcome of one rule. `rule` is the human-readable threshold that was applied.
struct Verdict {
  std::string rule_id;
  std::string rule;
  bool passed = false;
  std::string detail;

  bool operator==(const Verdict&) const = default;
};

bool all_passed(const std::vector<Verdict>& verdicts);

// ---- preparation ---------------------------------------------------------

struct EnvironmentReport {
  double relative_humidity_pct = 0.0;
  int standard_class_levels_above_dut = 0;
  double standard_burden_deviation_pct = 0.0;
  double measuring_device_error_fraction_of_dut_limit = 0.0;
  double field_interference_error_ratio = 0.0;

  bool operator==(const EnvironmentReport&) const = default;
};

inline constexpr double kMaxRelativeHumidityPct = 95.0;
inline constexpr int kMinStandardClassMargin = 2;
inline constexpr double kMaxStandardBurdenDeviationPct = 10.0;
inline constexpr double kMaxDeviceErrorFraction = 0.10;
inline constexpr double kMaxFieldInterferenceRatio = 1.2;

/// One verdict per preparation rule; all limits are inclusive ("not exceed").
std::vector<Verdict> check_preconditions(const EnvironmentReport& env);

// ---- insulation ----------------------------------------------------------

struct InsulationReading {
  double primary_to_secondary_megohm = 0.0;
  double secondary_to_ground_megohm = 0.0;
  std::optional<double> low_voltage_megohm;
  double megohmmeter_speed_rpm = 120.0;

  bool operator==(const InsulationReading&) const = default;
};

inline constexpr double kMinPrimaryToSecondaryMegohm = 1000.0;
inline constexpr double kMinSecondaryToGroundMegohm = 500.0;
inline constexpr double kMinLowVoltageMegohm = 5.0;
inline constexpr double kMegohmmeterNominalRpm = 120.0;
inline constexpr double kMegohmmeterRpmTolerance = 0.2;

struct InsulationVerdict {
  bool passed = false;
  std::vector<Verdict> checks;
  // Procedure deviations that do not affect `passed`.
  std::vector<std::string> warnings;
};

/// Resistances must be strictly greater than their limits.
InsulationVerdict check_insulation(const InsulationReading& reading);

// ---- power-frequency withstand -------------------------------------------

inline constexpr double kOnSiteWithstandFraction = 0.85;
inline constexpr double kWithstandMaxStepFraction = 0.05;

struct RampPoint {
  double time_s = 0.0;
  double volts = 0.0;

  bool operator==(const RampPoint&) const = default;
};

struct WithstandSettings {
  double step_fraction = 0.04;  // of target per step; must be <= 0.05
  double step_seconds = 1.0;
  double hold_seconds = 60.0;
};

/// Ramp from zero to 85 % of the factory test voltage, hold, ramp back to zero.
std::vector<RampPoint> withstand_profile(double factory_test_voltage, const WithstandSettings& settings = {});

/// Checks an applied schedule: peak at most 85 % of the factory voltage, both
/// ends within 1 % of that target, rise then fall with steps of at most 5 %.
Verdict check_withstand_profile(const std::vector<RampPoint>& profile, double factory_test_voltage);

// ---- winding polarity ----------------------------------------------------

inline constexpr double kPolarityMaxCurrentFraction = 0.05;

struct PolarityStep {
  double primary_current_fraction = 0.0;
  int deflection_sign = 0;  // +1, -1, or 0 for no deflection

  bool operator==(const PolarityStep&) const = default;
};

enum class Polarity { Subtractive, Additive, Indeterminate };

const char* to_string(Polarity p);

/// Throws ProcedureViolation when any step exceeds 5 % of rated current.
Polarity polarity_check(const std::vector<PolarityStep>& steps);

// ---- error measurement ---------------------------------------------------

struct SchedulePoint {
  double operating_point = 0.0;
  double burden_fraction = 0.0;

  auto operator<=>(const SchedulePoint&) const = default;
};

/// Default grid of 1/5/20/100/120 % current at full and quarter burden,
/// merged with `extra` points, sorted and de-duplicated.
std::vector<SchedulePoint> error_point_schedule(const model::Nameplate& nameplate,
                                                const std::vector<SchedulePoint>& extra = {});

struct ClassLimit {
  double operating_point = 0.0;
  double ratio_limit_pct = 0.0;
  double phase_limit_min = 0.0;

  bool operator==(const ClassLimit&) const = default;
};

struct ClassLimitTable {
  std::map<std::string, std::vector<ClassLimit>> classes;
  std::string source;

  void validate() const;
  /// Limit at the nearest tabulated operating point at or below `operating_point`.
  const ClassLimit& limit_for(const std::string& accuracy_class, double operating_point) const;

  bool operator==(const ClassLimitTable&) const = default;
};

struct PointResult {
  double operating_point = 0.0;
  double burden_fraction = 1.0;
  model::ErrorPair error;
};

struct ErrorPointsVerdict {
  bool passed = false;
  std::vector<Verdict> points;
};

ErrorPointsVerdict check_error_points(const std::vector<PointResult>& results, const ClassLimitTable& table,
                                      const std::string& accuracy_class);

}  // namespace ctcal::compliance
