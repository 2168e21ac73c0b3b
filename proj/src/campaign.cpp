#include "campaign.hpp"

#include "digest.hpp"
#include "error.hpp"
#include "file_io.hpp"
#include "json_io.hpp"
#include "signal_lab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

using nlohmann::json;

namespace ctcal::campaign {

namespace {

constexpr const char* kReportSchema = "ctcal.campaign-report/v1";

// Uniform phase in [0, 2pi) derived from a seed, independent of the noise stream.
double seeded_phase(std::uint64_t seed) {
  std::mt19937_64 engine(seed ^ 0x9e3779b97f4a7c15ULL);
  return 2.0 * std::numbers::pi * static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Object inline, or a path relative to `base_dir`. Records the digest of
// whatever was read under `name`.
json resolve(const json& j, const char* name, const std::filesystem::path& base_dir,
             std::map<std::string, std::string>& digests) {
  if (!j.contains(name)) throw Error(ErrorCode::Parse, std::string("campaign config lacks '") + name + "'");
  const json& v = j.at(name);
  if (v.is_string()) {
    const auto path = base_dir / v.get<std::string>();
    const std::string text = read_text(path);
    digests[name] = to_hex(sha256(text));
    return parse_json(text, path.string());
  }
  digests[name] = to_hex(sha256(v.dump()));
  return v;
}

compliance::Verdict failed(std::string id, std::string rule, const std::exception& e) {
  return {std::move(id), std::move(rule), false, e.what()};
}

}  // namespace

std::string tool_version() { return std::string("ctcal ") + CTCAL_VERSION_STRING; }

std::int64_t utc_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

CampaignConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  CampaignConfig c;
  try {
    c.transformer.nameplate = json_as<model::Nameplate>(resolve(j, "nameplate", base_dir, c.input_digests), "nameplate");
    c.transformer.circuit =
        json_as<model::EquivalentCircuit>(resolve(j, "circuit", base_dir, c.input_digests), "circuit");
    c.class_limits =
        json_as<compliance::ClassLimitTable>(resolve(j, "class_limits", base_dir, c.input_digests), "class_limits");
    c.environment = json_as<compliance::EnvironmentReport>(j.at("environment"), "environment");
    c.insulation = json_as<compliance::InsulationReading>(j.at("insulation"), "insulation");
    const json& w = j.at("withstand");
    c.withstand.factory_test_voltage = w.at("factory_test_voltage").get<double>();
    c.withstand.breakdown_observed = w.value("breakdown_observed", false);
    c.polarity = json_as<std::vector<compliance::PolarityStep>>(j.at("polarity"), "polarity");
    c.extra_points = json_as<std::vector<compliance::SchedulePoint>>(
        j.value("extra_points", json::array()), "extra_points");
    c.plan = json_as<meter::MeasurementPlan>(j.at("plan"), "plan");
    const json s = j.value("signal", json::object());
    c.signal.interference_fraction = s.value("interference_fraction", c.signal.interference_fraction);
    c.signal.noise_fraction = s.value("noise_fraction", c.signal.noise_fraction);
    c.signal.seed = s.value("seed", c.signal.seed);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("campaign config: ") + e.what());
  }
  c.transformer.validate();
  c.class_limits.validate();
  c.plan.validate();
  if (!(c.signal.interference_fraction >= 0.0) || !(c.signal.noise_fraction >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "signal fractions must be >= 0");
  }
  return c;
}

CampaignConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  CampaignConfig c = parse_config(parse_json(text, path.string()), path.parent_path());
  c.input_digests["config"] = to_hex(sha256(text));
  return c;
}

CampaignReport run_campaign(const CampaignConfig& config, RecordStore& store, const Clock& clock) {
  CampaignReport rep;
  rep.tool_version = tool_version();
  rep.generated_at = clock();
  rep.nameplate = config.transformer.nameplate;
  rep.input_digests = config.input_digests;

  auto record = [&](TestItem item, const json& payload) {
    TestRecord r;
    r.record_id = store.last_id() + 1;
    r.timestamp = clock();
    r.item = item;
    r.payload = payload.dump();
    store.append(std::move(r));
  };
  auto finish_item = [&](ItemResult it, TestItem kind, json payload) {
    payload["item"] = it.item;
    payload["passed"] = it.passed;
    payload["verdicts"] = it.verdicts;
    if (!it.notes.empty()) payload["notes"] = it.notes;
    record(kind, payload);
    rep.items.push_back(std::move(it));
  };

  // Preparation gate.
  rep.environment = compliance::check_preconditions(config.environment);
  {
    ItemResult it{"precondition", compliance::all_passed(rep.environment), rep.environment, {}};
    const bool ok = it.passed;
    finish_item(std::move(it), TestItem::Precondition, {{"environment", config.environment}});
    if (!ok) {
      rep.halted = true;
      rep.overall_passed = false;
      rep.record_count = store.records().size();
      return rep;
    }
  }

  {
    const auto ins = compliance::check_insulation(config.insulation);
    finish_item({"insulation", ins.passed, ins.checks, ins.warnings}, TestItem::Insulation,
                {{"reading", config.insulation}});
  }

  {
    ItemResult it{"withstand", false, {}, {}};
    json payload;
    try {
      const auto profile = compliance::withstand_profile(config.withstand.factory_test_voltage);
      it.verdicts.push_back(compliance::check_withstand_profile(profile, config.withstand.factory_test_voltage));
      payload["profile"] = profile;
    } catch (const Error& e) {
      it.verdicts.push_back(failed("WST-PROFILE", "factory test voltage must be positive", e));
    }
    it.verdicts.push_back({"WST-NO-BREAKDOWN", "no odor, noise or breakdown during the withstand test",
                           !config.withstand.breakdown_observed,
                           config.withstand.breakdown_observed ? "breakdown observed" : "none observed"});
    it.passed = compliance::all_passed(it.verdicts);
    payload["factory_test_voltage"] = config.withstand.factory_test_voltage;
    finish_item(std::move(it), TestItem::Withstand, payload);
  }

  {
    ItemResult it{"polarity", false, {}, {}};
    const char* rule = "winding polarity confirmed subtractive with test current within 5% of rated";
    try {
      const auto p = compliance::polarity_check(config.polarity);
      it.verdicts.push_back({"POL-MARKING", rule, p == compliance::Polarity::Subtractive,
                             std::string("polarity ") + compliance::to_string(p)});
    } catch (const Error& e) {
      it.verdicts.push_back(failed("POL-MARKING", rule, e));
    }
    it.passed = compliance::all_passed(it.verdicts);
    finish_item(std::move(it), TestItem::Polarity, {{"steps", config.polarity}});
  }

  // Error points: simulate each scheduled point through the heterodyne meter.
  ItemResult points_item{"error-points", false, {}, {}};
  const auto schedule = compliance::error_point_schedule(config.transformer.nameplate, config.extra_points);
  const auto& np = config.transformer.nameplate;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const auto& sp = schedule[k];
    compliance::PointResult pr{sp.operating_point, sp.burden_fraction, {}};
    compliance::Verdict verdict;
    try {
      const model::Transformer ct{np, config.transformer.circuit.with_burden_fraction(sp.burden_fraction)};
      PointMeasurement pm;
      pm.point = sp;
      for (double f : config.plan.frequencies) pm.injected.push_back(model::complex_error(ct, sp.operating_point, f));
      pm.rated_model = model::complex_error(ct, sp.operating_point, np.rated_frequency);

      signal::WaveformSpec base;
      base.test_amplitude = sp.operating_point * np.rated_secondary_current;
      base.interference_amplitude = config.signal.interference_fraction * base.test_amplitude;
      base.interference_phase = seeded_phase(config.signal.seed + k);
      base.noise_rms = config.signal.noise_fraction * base.test_amplitude;
      base.seed = config.signal.seed + 16 * k;
      pm.measurement = meter::run_measurement(config.plan, base, pm.injected);
      pr.error = pm.measurement.translated;

      record(TestItem::Measurement, {{"point", sp},
                                     {"injected", pm.injected},
                                     {"rated_model", pm.rated_model},
                                     {"measurement", pm.measurement}});
      rep.measurements.push_back(pm);
      verdict = compliance::check_error_points({pr}, config.class_limits, np.accuracy_class).points.front();
    } catch (const Error& e) {
      verdict = failed("ERR-" + num(sp.operating_point * 100.0) + "%-B" + num(sp.burden_fraction * 100.0) + "%",
                       "error point must be measurable and within class " + np.accuracy_class + " limits", e);
    }
    record(TestItem::ErrorPoint, {{"point", sp}, {"translated", pr.error}, {"verdict", verdict}});
    points_item.verdicts.push_back(std::move(verdict));
  }
  points_item.passed = compliance::all_passed(points_item.verdicts);
  rep.items.push_back(std::move(points_item));

  rep.overall_passed = std::all_of(rep.items.begin(), rep.items.end(), [](const ItemResult& i) { return i.passed; });
  rep.record_count = store.records().size();
  return rep;
}

// ---- report serialization ---------------------------------------------------

json report_to_json(const CampaignReport& r) {
  json items = json::array();
  for (const auto& it : r.items) {
    items.push_back({{"item", it.item}, {"passed", it.passed}, {"verdicts", it.verdicts}, {"notes", it.notes}});
  }
  json ms = json::array();
  for (const auto& m : r.measurements) {
    ms.push_back({{"point", m.point},
                  {"injected", m.injected},
                  {"rated_model", m.rated_model},
                  {"measurement", m.measurement}});
  }
  return json{{"schema", kReportSchema},
              {"tool_version", r.tool_version},
              {"generated_at", r.generated_at},
              {"nameplate", r.nameplate},
              {"environment", r.environment},
              {"items", items},
              {"measurements", ms},
              {"halted", r.halted},
              {"overall_passed", r.overall_passed},
              {"record_count", r.record_count},
              {"input_digests", r.input_digests}};
}

CampaignReport report_from_json(const json& j) {
  try {
    if (j.at("schema").get<std::string>() != kReportSchema) {
      throw Error(ErrorCode::Parse, "unsupported report schema " + j.at("schema").get<std::string>());
    }
    CampaignReport r;
    j.at("tool_version").get_to(r.tool_version);
    j.at("generated_at").get_to(r.generated_at);
    j.at("nameplate").get_to(r.nameplate);
    j.at("environment").get_to(r.environment);
    for (const auto& it : j.at("items")) {
      r.items.push_back({it.at("item").get<std::string>(), it.at("passed").get<bool>(),
                         it.at("verdicts").get<std::vector<compliance::Verdict>>(),
                         it.at("notes").get<std::vector<std::string>>()});
    }
    for (const auto& m : j.at("measurements")) {
      PointMeasurement pm;
      m.at("point").get_to(pm.point);
      m.at("injected").get_to(pm.injected);
      m.at("rated_model").get_to(pm.rated_model);
      m.at("measurement").get_to(pm.measurement);
      r.measurements.push_back(std::move(pm));
    }
    j.at("halted").get_to(r.halted);
    j.at("overall_passed").get_to(r.overall_passed);
    j.at("record_count").get_to(r.record_count);
    j.at("input_digests").get_to(r.input_digests);
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("campaign report: ") + e.what());
  }
}

std::string render_report(const CampaignReport& r, ReportFormat format) {
  if (format == ReportFormat::Json) return report_to_json(r).dump(2) + "\n";

  std::string out;
  auto line = [&out](const std::string& s) {
    out += s;
    out += '\n';
  };
  const auto& np = r.nameplate;
  line("CT on-site error calibration report");
  line("tool: " + r.tool_version);
  line("nameplate: " + num(np.rated_primary_current) + "/" + num(np.rated_secondary_current) + " A, " +
       num(np.rated_burden_va) + " VA, class " + np.accuracy_class + ", " + num(np.rated_frequency) + " Hz");
  for (const auto& it : r.items) {
    line("");
    line("[" + it.item + "] " + (it.passed ? "PASS" : "FAIL"));
    for (const auto& v : it.verdicts) {
      line(std::string("  ") + (v.passed ? "PASS" : "FAIL") + "  " + v.rule_id + "  rule: " + v.rule + "  (" +
           v.detail + ")");
    }
    for (const auto& n : it.notes) line("  WARN  " + n);
  }
  if (!r.measurements.empty()) {
    line("");
    line("measurements (ratio %, phase min):");
    for (const auto& m : r.measurements) {
      std::string s = "  " + num(m.point.operating_point * 100.0) + "% current, " +
                      num(m.point.burden_fraction * 100.0) + "% burden:";
      for (std::size_t i = 0; i < m.measurement.frequencies.size(); ++i) {
        const auto& e = m.measurement.per_frequency[i];
        s += "  " + num(m.measurement.frequencies[i]) + " Hz (" + num(e.ratio_error_pct) + ", " +
             num(e.phase_error_min) + ")";
      }
      s += "  -> rated (" + num(m.measurement.translated.ratio_error_pct) + ", " +
           num(m.measurement.translated.phase_error_min) + ")";
      line(s);
    }
  }
  line("");
  if (r.halted) line("campaign halted after failed preconditions");
  line("records: " + std::to_string(r.record_count));
  line(std::string("overall: ") + (r.overall_passed ? "PASS" : "FAIL"));
  return out;
}

// ---- presets ------------------------------------------------------------------

namespace {

PresetOutput run_table1(const json& p) {
  PresetOutput out;
  out.kind = "table1";
  meter::SweepSettings settings;
  settings.test_amplitude = p.value("test_amplitude", settings.test_amplitude);
  settings.interference_fraction = p.value("interference_fraction", settings.interference_fraction);
  settings.interference_frequency = p.value("interference_frequency", settings.interference_frequency);
  settings.phase_grid = p.value("phase_grid", settings.phase_grid);
  const double max_final_bias = p.at("max_final_bias").get<double>();
  const double bandpass_rejection = p.value("bandpass_rejection", 10.0);
  const double min_advantage = p.value("min_advantage_over_bandpass", 100.0);

  bool all_ok = true;
  json series = json::array();
  for (const auto& s : p.at("series")) {
    const double f = s.at("frequency").get<double>();
    const double fs = s.at("sample_rate").get<double>();
    const auto windows = s.at("windows").get<std::vector<std::size_t>>();
    const auto points = meter::suppression_sweep(f, fs, windows, settings);

    bool decreasing = true;
    for (std::size_t i = 1; i < points.size(); ++i) decreasing &= points[i].worst_bias < points[i - 1].worst_bias;
    const double final_bias = points.empty() ? 0.0 : points.back().worst_bias;
    const bool final_ok = final_bias <= max_final_bias;

    const auto bp = meter::bandpass_baseline(f, settings.interference_frequency, bandpass_rejection);
    const double interference = settings.interference_fraction * settings.test_amplitude;
    const double bp_residual = interference * bp.gain_at_interference;
    const double advantage = bp_residual / std::max(final_bias, std::numeric_limits<double>::min());
    const bool advantage_ok = advantage >= min_advantage;

    all_ok = all_ok && decreasing && final_ok && advantage_ok;
    json pts = json::array();
    for (const auto& pt : points) {
      pts.push_back({{"window_samples", pt.window_samples},
                     {"worst_bias", pt.worst_bias},
                     {"worst_estimate", settings.test_amplitude + pt.worst_bias}});
    }
    series.push_back({{"frequency", f},
                      {"sample_rate", fs},
                      {"points", pts},
                      {"strictly_decreasing", decreasing},
                      {"final_bias_within_limit", final_ok},
                      {"bandpass_quality_factor", bp.quality_factor},
                      {"bandpass_residual", bp_residual},
                      {"advantage_over_bandpass", advantage},
                      {"advantage_ok", advantage_ok}});
    out.csv_files["table1_" + num(f) + "hz.csv"] = meter::sweep_to_csv(points);
  }
  out.passed = all_ok;
  out.summary = {{"kind", "table1"},
                 {"passed", all_ok},
                 {"max_final_bias", max_final_bias},
                 {"interference_fraction", settings.interference_fraction},
                 {"phase_grid", settings.phase_grid},
                 {"series", series}};
  return out;
}

PresetOutput run_table2(const json& p, std::optional<std::uint64_t> seed_override) {
  PresetOutput out;
  out.kind = "table2";
  const auto runs = p.at("runs").get<std::size_t>();
  const auto freqs = p.at("frequencies").get<std::vector<double>>();
  const double fs = p.at("sample_rate").get<double>();
  const double amplitude = p.at("test_amplitude").get<double>();
  const double interference_fraction = p.value("interference_fraction", 0.1);
  const double fi = p.value("interference_frequency", 50.0);
  const double noise = p.at("noise_rms").get<double>();
  const std::uint64_t seed = seed_override.value_or(p.value("seed", std::uint64_t{1}));
  const double max_dev = p.at("max_deviation").get<double>();

  std::string csv = "run,frequency,amplitude,deviation\n";
  json rows = json::array();
  double worst = 0.0;
  char buf[128];
  for (std::size_t r = 0; r < runs; ++r) {
    json row = {{"run", r + 1}};
    for (std::size_t k = 0; k < freqs.size(); ++k) {
      signal::WaveformSpec spec;
      spec.test_frequency = freqs[k];
      spec.test_amplitude = amplitude;
      spec.interference_frequency = fi;
      spec.interference_amplitude = interference_fraction * amplitude;
      spec.noise_rms = noise;
      spec.sample_rate = fs;
      spec.duration = signal::beat_window(freqs[k], fi);
      spec.seed = seed + 2 * (r * freqs.size() + k);
      spec.interference_phase = seeded_phase(spec.seed);
      const double a = meter::phasor(signal::synthesize(spec), freqs[k]).amplitude;
      worst = std::max(worst, std::abs(a - amplitude));
      row[num(freqs[k]) + "Hz"] = a;
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", r + 1, freqs[k], a, a - amplitude);
      csv += buf;
    }
    rows.push_back(row);
  }
  out.passed = worst <= max_dev;
  out.summary = {{"kind", "table2"}, {"passed", out.passed}, {"seed", seed},         {"noise_rms", noise},
                 {"runs", rows},     {"max_deviation", worst}, {"limit", max_dev}};
  out.csv_files["table2.csv"] = csv;
  return out;
}

}  // namespace

PresetOutput run_preset(const json& preset, std::optional<std::uint64_t> seed_override) {
  try {
    const std::string kind = preset.at("kind").get<std::string>();
    if (kind == "table1") return run_table1(preset);
    if (kind == "table2") return run_table2(preset, seed_override);
    throw Error(ErrorCode::InvalidArgument, "unknown preset kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("preset: ") + e.what());
  }
}

}  // namespace ctcal::campaign
