#include "compliance.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace ctcal::compliance {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string pct(double op) { return num(op * 100.0) + "%"; }

Verdict make(std::string id, std::string rule, bool passed, std::string detail) {
  return {std::move(id), std::move(rule), passed, std::move(detail)};
}

}  // namespace

bool all_passed(const std::vector<Verdict>& verdicts) {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

std::vector<Verdict> check_preconditions(const EnvironmentReport& env) {
  std::vector<Verdict> out;
  out.push_back(make("PREP-HUMIDITY", "relative humidity must not exceed 95%",
                     env.relative_humidity_pct <= kMaxRelativeHumidityPct,
                     "measured " + num(env.relative_humidity_pct) + "%"));
  out.push_back(make("PREP-CLASS-MARGIN", "standard must be at least 2 accuracy classes above the DUT",
                     env.standard_class_levels_above_dut >= kMinStandardClassMargin,
                     "margin " + std::to_string(env.standard_class_levels_above_dut) + " classes"));
  out.push_back(make("PREP-BURDEN-DEVIATION", "standard burden must not deviate more than 10% from its certificate",
                     env.standard_burden_deviation_pct <= kMaxStandardBurdenDeviationPct,
                     "deviation " + num(env.standard_burden_deviation_pct) + "%"));
  out.push_back(make("PREP-DEVICE-ERROR", "measuring device error must not exceed 10% of the DUT error",
                     env.measuring_device_error_fraction_of_dut_limit <= kMaxDeviceErrorFraction,
                     "fraction " + num(env.measuring_device_error_fraction_of_dut_limit)));
  out.push_back(make("PREP-FIELD-INTERFERENCE",
                     "field-induced error of the standard must not exceed 1.2 times the DUT error",
                     env.field_interference_error_ratio <= kMaxFieldInterferenceRatio,
                     "ratio " + num(env.field_interference_error_ratio)));
  return out;
}

InsulationVerdict check_insulation(const InsulationReading& reading) {
  InsulationVerdict v;
  v.checks.push_back(make("INS-PRIMARY-SECONDARY", "primary to secondary must be greater than 1000 MOhm",
                          reading.primary_to_secondary_megohm > kMinPrimaryToSecondaryMegohm,
                          "measured " + num(reading.primary_to_secondary_megohm) + " MOhm"));
  v.checks.push_back(make("INS-SECONDARY-GROUND", "secondary to ground must be greater than 500 MOhm",
                          reading.secondary_to_ground_megohm > kMinSecondaryToGroundMegohm,
                          "measured " + num(reading.secondary_to_ground_megohm) + " MOhm"));
  if (reading.low_voltage_megohm) {
    v.checks.push_back(make("INS-LOW-VOLTAGE", "low-voltage winding must be greater than 5 MOhm",
                            *reading.low_voltage_megohm > kMinLowVoltageMegohm,
                            "measured " + num(*reading.low_voltage_megohm) + " MOhm"));
  }
  const double lo = kMegohmmeterNominalRpm * (1.0 - kMegohmmeterRpmTolerance);
  const double hi = kMegohmmeterNominalRpm * (1.0 + kMegohmmeterRpmTolerance);
  if (!(reading.megohmmeter_speed_rpm >= lo && reading.megohmmeter_speed_rpm <= hi)) {
    v.warnings.push_back("megohmmeter cranked at " + num(reading.megohmmeter_speed_rpm) + " rpm, nominal 120 rpm (" +
                         num(lo) + "-" + num(hi) + ")");
  }
  v.passed = all_passed(v.checks);
  return v;
}

std::vector<RampPoint> withstand_profile(double factory_test_voltage, const WithstandSettings& settings) {
  if (!(std::isfinite(factory_test_voltage) && factory_test_voltage > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "factory test voltage must be > 0");
  }
  if (!(settings.step_fraction > 0.0 && settings.step_fraction <= kWithstandMaxStepFraction) || !(settings.step_seconds > 0.0) ||
      !(settings.hold_seconds >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "withstand ramp steps must be (0, 5%] of target with positive timing");
  }
  const double target = kOnSiteWithstandFraction * factory_test_voltage;
  const auto steps = static_cast<std::size_t>(std::ceil(1.0 / settings.step_fraction - 1e-12));
  // Shaved so rounding never pushes a step past the limit.
  const double step = settings.step_fraction * (1.0 - 1e-9);
  // Counted down from the target so the top step lands exactly on it.
  auto level = [&](std::size_t k) { return target * std::max(0.0, 1.0 - static_cast<double>(steps - k) * step); };

  std::vector<RampPoint> out;
  double t = 0.0;
  for (std::size_t k = 0; k <= steps; ++k) {
    out.push_back({t, level(k)});
    t += settings.step_seconds;
  }
  t += settings.hold_seconds - settings.step_seconds;
  out.push_back({t, target});
  for (std::size_t k = steps; k-- > 0;) {
    t += settings.step_seconds;
    out.push_back({t, level(k)});
  }
  return out;
}

Verdict check_withstand_profile(const std::vector<RampPoint>& profile, double factory_test_voltage) {
  const char* rule = "test voltage at most 85% of the factory test voltage, from and back to near zero in steps of at most 5%";
  const double target = kOnSiteWithstandFraction * factory_test_voltage;
  auto fail = [&](const std::string& why) { return make("WST-PROFILE", rule, false, why); };
  if (!(std::isfinite(factory_test_voltage) && factory_test_voltage > 0.0)) return fail("factory test voltage must be > 0");
  if (profile.size() < 2) return fail("schedule has fewer than two points");

  std::size_t peak_at = 0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (profile[i].volts > profile[peak_at].volts) peak_at = i;
  }
  const double peak = profile[peak_at].volts;
  if (peak > target) return fail("peak " + num(peak) + " V exceeds " + num(target) + " V");
  if (profile.front().volts > 0.01 * target || profile.back().volts > 0.01 * target) {
    return fail("schedule does not start and end within 1% of the target");
  }
  for (std::size_t i = 1; i < profile.size(); ++i) {
    const double dv = profile[i].volts - profile[i - 1].volts;
    if (!(profile[i].time_s > profile[i - 1].time_s)) return fail("schedule times are not increasing");
    if (std::abs(dv) > kWithstandMaxStepFraction * target) {
      return fail("step of " + num(dv) + " V at t=" + num(profile[i].time_s) + " s exceeds 5% of the target");
    }
    if ((i <= peak_at && dv < 0.0) || (i > peak_at && dv > 0.0)) return fail("schedule is not a single rise and fall");
  }
  return make("WST-PROFILE", rule, true, "peak " + num(peak) + " V over " + std::to_string(profile.size()) + " points");
}

const char* to_string(Polarity p) {
  switch (p) {
    case Polarity::Subtractive: return "subtractive";
    case Polarity::Additive: return "additive";
    case Polarity::Indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

Polarity polarity_check(const std::vector<PolarityStep>& steps) {
  double prev = -1.0;
  for (const auto& s : steps) {
    if (!(s.primary_current_fraction >= 0.0) || s.primary_current_fraction < prev) {
      throw Error(ErrorCode::InvalidArgument, "polarity steps must have ascending non-negative currents");
    }
    if (s.primary_current_fraction > kPolarityMaxCurrentFraction) {
      throw Error(ErrorCode::ProcedureViolation, "polarity test current " + pct(s.primary_current_fraction) +
                                                     " exceeds 5% of rated current");
    }
    prev = s.primary_current_fraction;
  }
  if (steps.empty()) return Polarity::Indeterminate;
  const bool all_pos = std::all_of(steps.begin(), steps.end(), [](const PolarityStep& s) { return s.deflection_sign > 0; });
  const bool all_neg = std::all_of(steps.begin(), steps.end(), [](const PolarityStep& s) { return s.deflection_sign < 0; });
  if (all_pos) return Polarity::Subtractive;
  if (all_neg) return Polarity::Additive;
  return Polarity::Indeterminate;
}

std::vector<SchedulePoint> error_point_schedule(const model::Nameplate& nameplate,
                                                const std::vector<SchedulePoint>& extra) {
  nameplate.validate();
  std::vector<SchedulePoint> out;
  for (double op : {0.01, 0.05, 0.20, 1.00, 1.20}) {
    for (double burden : {1.0, 0.25}) out.push_back({op, burden});
  }
  for (const auto& p : extra) {
    if (!(p.operating_point > 0.0) || !(p.burden_fraction >= 0.0) || !std::isfinite(p.operating_point) ||
        !std::isfinite(p.burden_fraction)) {
      throw Error(ErrorCode::InvalidArgument, "extra schedule points need op > 0 and burden >= 0");
    }
    out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void ClassLimitTable::validate() const {
  for (const auto& [name, limits] : classes) {
    if (limits.empty()) throw Error(ErrorCode::InvalidArgument, "class " + name + " has no limits");
    double prev = 0.0;
    for (std::size_t i = 0; i < limits.size(); ++i) {
      const auto& l = limits[i];
      if (!(l.operating_point > 0.0) || (i > 0 && !(l.operating_point > prev))) {
        throw Error(ErrorCode::InvalidArgument, "class " + name + " operating points must be ascending");
      }
      if (!(l.ratio_limit_pct > 0.0) || !(l.phase_limit_min > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "class " + name + " limits must be > 0");
      }
      prev = l.operating_point;
    }
  }
}

const ClassLimit& ClassLimitTable::limit_for(const std::string& accuracy_class, double operating_point) const {
  const auto it = classes.find(accuracy_class);
  if (it == classes.end()) throw Error(ErrorCode::UnknownClass, "accuracy class '" + accuracy_class + "' not in table");
  const auto& limits = it->second;
  // Tolerate representation noise such as 0.2 vs 0.20000000000000001.
  const auto upper = std::upper_bound(limits.begin(), limits.end(), operating_point * (1.0 + 1e-12),
                                      [](double x, const ClassLimit& l) { return x < l.operating_point; });
  if (upper == limits.begin()) {
    throw Error(ErrorCode::OutOfRange, "operating point " + pct(operating_point) + " below the lowest tabulated point of class " +
                                           accuracy_class);
  }
  return *std::prev(upper);
}

ErrorPointsVerdict check_error_points(const std::vector<PointResult>& results, const ClassLimitTable& table,
                                      const std::string& accuracy_class) {
  ErrorPointsVerdict out;
  for (const auto& r : results) {
    const ClassLimit& lim = table.limit_for(accuracy_class, r.operating_point);
    const bool ok = std::abs(r.error.ratio_error_pct) <= lim.ratio_limit_pct &&
                    std::abs(r.error.phase_error_min) <= lim.phase_limit_min;
    out.points.push_back(make("ERR-" + pct(r.operating_point) + "-B" + pct(r.burden_fraction),
                              "class " + accuracy_class + " at " + pct(r.operating_point) + ": |ratio| <= " +
                                  num(lim.ratio_limit_pct) + "%, |phase| <= " + num(lim.phase_limit_min) + " min",
                              ok,
                              "ratio " + num(r.error.ratio_error_pct) + "%, phase " + num(r.error.phase_error_min) +
                                  " min at " + pct(r.burden_fraction) + " burden"));
  }
  out.passed = all_passed(out.points);
  return out;
}

}  // namespace ctcal::compliance
