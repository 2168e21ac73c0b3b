#include "campaign.hpp"
#include "digest.hpp"
#include "error.hpp"
#include "file_io.hpp"
#include "json_io.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace ctcal;
using namespace ctcal::campaign;
using nlohmann::json;

namespace {

const std::filesystem::path kData = CTCAL_TEST_DATA_DIR;

std::int64_t fixed_clock() { return 1700000000; }

CampaignConfig reference_config() { return load_config(kData / "campaign_reference.json"); }

json reference_config_json() { return load_json(kData / "campaign_reference.json"); }

const ItemResult* item(const CampaignReport& r, const std::string& name) {
  for (const auto& it : r.items) {
    if (it.item == name) return &it;
  }
  return nullptr;
}

std::string line_with(const std::string& text, const std::string& needle) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find(needle) != std::string::npos) return line;
  }
  return {};
}

}  // namespace

TEST_CASE("reference config loads with input digests") {
  const auto c = reference_config();
  CHECK(c.transformer.nameplate.accuracy_class == "0.2S");
  CHECK(c.plan.frequencies == std::vector<double>{45.0, 55.0});
  for (const char* key : {"config", "nameplate", "circuit", "class_limits"}) {
    CAPTURE(key);
    REQUIRE(c.input_digests.count(key) == 1);
    CHECK(c.input_digests.at(key).size() == 64);
  }
  CHECK(c.input_digests.at("circuit") == to_hex(sha256(read_text(kData / "reference_circuit.json"))));
}

TEST_CASE("config accepts inline documents") {
  json j = reference_config_json();
  j["nameplate"] = load_json(kData / "reference_nameplate.json");
  const auto c = parse_config(j, kData);
  CHECK(c.transformer.nameplate.rated_burden_va == 10.0);
  json missing = reference_config_json();
  missing.erase("plan");
  CHECK_THROWS_AS(parse_config(missing, kData), Error);
  json bad_path = reference_config_json();
  bad_path["circuit"] = "no_such_circuit.json";
  CHECK_THROWS_AS(parse_config(bad_path, kData), Error);
}

TEST_CASE("reference campaign passes") {
  RecordStore store;
  const auto r = run_campaign(reference_config(), store, fixed_clock);
  CHECK(r.overall_passed);
  CHECK_FALSE(r.halted);
  CHECK(r.items.size() == 5);
  CHECK(r.measurements.size() == 10);
  CHECK(r.record_count == store.records().size());
  CHECK(r.generated_at == 1700000000);
  CHECK(r.tool_version == tool_version());

  const auto full = std::find_if(r.measurements.begin(), r.measurements.end(), [](const PointMeasurement& m) {
    return m.point.operating_point == 1.0 && m.point.burden_fraction == 1.0;
  });
  REQUIRE(full != r.measurements.end());
  CHECK(std::abs(full->measurement.translated.ratio_error_pct) <= 0.2);
  CHECK(std::abs(full->measurement.translated.phase_error_min) <= 10.0);
  CHECK(full->measurement.translated.ratio_error_pct == doctest::Approx(full->rated_model.ratio_error_pct).epsilon(0.02));
}

TEST_CASE("records follow the campaign steps in order") {
  RecordStore store;
  run_campaign(reference_config(), store, fixed_clock);
  const auto& recs = store.records();
  REQUIRE(recs.size() == 4 + 2 * 10);
  CHECK(recs[0].item == TestItem::Precondition);
  CHECK(recs[1].item == TestItem::Insulation);
  CHECK(recs[2].item == TestItem::Withstand);
  CHECK(recs[3].item == TestItem::Polarity);
  CHECK(recs[4].item == TestItem::Measurement);
  CHECK(recs[5].item == TestItem::ErrorPoint);
  for (std::size_t i = 0; i < recs.size(); ++i) CHECK(recs[i].record_id == i + 1);
  CHECK(verify_chain(store.serialize()).valid);
  CHECK(json::accept(recs[4].payload));
}

TEST_CASE("humid campaign halts after preconditions") {
  RecordStore store;
  const auto r = run_campaign(load_config(kData / "campaign_humid.json"), store, fixed_clock);
  CHECK(r.halted);
  CHECK_FALSE(r.overall_passed);
  CHECK(r.items.size() == 1);
  CHECK(store.records().size() == 1);
  const auto text = render_report(r, ReportFormat::Text);
  CHECK(line_with(text, "PREP-HUMIDITY").find("FAIL") != std::string::npos);
  CHECK(text.find("overall: FAIL") != std::string::npos);
}

TEST_CASE("module errors fail their item and the campaign continues") {
  json j = reference_config_json();
  j["polarity"] = json::array({{{"primary_current_fraction", 0.02}, {"deflection_sign", 1}},
                               {{"primary_current_fraction", 0.08}, {"deflection_sign", 1}}});
  RecordStore store;
  const auto r = run_campaign(parse_config(j, kData), store, fixed_clock);
  REQUIRE(item(r, "polarity") != nullptr);
  CHECK_FALSE(item(r, "polarity")->passed);
  CHECK(item(r, "error-points") != nullptr);
  CHECK(r.measurements.size() == 10);
  CHECK_FALSE(r.overall_passed);
}

TEST_CASE("an operating point outside the characteristic fails that point only") {
  json j = reference_config_json();
  j["extra_points"] = json::array({{{"operating_point", 1.5}, {"burden_fraction", 1.0}}});
  RecordStore store;
  const auto r = run_campaign(parse_config(j, kData), store, fixed_clock);
  const auto* ep = item(r, "error-points");
  REQUIRE(ep != nullptr);
  CHECK_FALSE(ep->passed);
  const auto failed = std::count_if(ep->verdicts.begin(), ep->verdicts.end(), [](const auto& v) { return !v.passed; });
  CHECK(failed == 1);
}

TEST_CASE("property: overall verdict is the conjunction of items") {
  for (int variant = 0; variant < 6; ++variant) {
    json j = reference_config_json();
    if (variant == 1) j["insulation"]["primary_to_secondary_megohm"] = 1000.0;
    if (variant == 2) j["withstand"]["breakdown_observed"] = true;
    if (variant == 3) j["polarity"][1]["deflection_sign"] = -1;
    if (variant == 4) j["signal"]["noise_fraction"] = 0.05;
    if (variant == 5) j["environment"]["standard_class_levels_above_dut"] = 1;
    RecordStore store;
    const auto r = run_campaign(parse_config(j, kData), store, fixed_clock);
    bool all = true;
    for (const auto& it : r.items) all = all && it.passed;
    CAPTURE(variant);
    CHECK(r.overall_passed == all);
    if (variant != 0 && variant != 4) CHECK_FALSE(r.overall_passed);
  }
}

TEST_CASE("end-to-end determinism except timestamps") {
  RecordStore s1, s2;
  auto r1 = run_campaign(reference_config(), s1, fixed_clock);
  auto r2 = run_campaign(reference_config(), s2, [] { return std::int64_t{1800000000}; });
  CHECK(r1.generated_at != r2.generated_at);
  r2.generated_at = r1.generated_at;
  CHECK(r1 == r2);
  REQUIRE(s1.records().size() == s2.records().size());
  for (std::size_t i = 0; i < s1.records().size(); ++i) CHECK(s1.records()[i].payload == s2.records()[i].payload);
}

TEST_CASE("report JSON round trip") {
  RecordStore store;
  const auto r = run_campaign(reference_config(), store, fixed_clock);
  const auto j = report_to_json(r);
  CHECK(j.at("schema") == "ctcal.campaign-report/v1");
  CHECK(report_from_json(json::parse(j.dump())) == r);
  CHECK(render_report(r, ReportFormat::Json) == render_report(report_from_json(j), ReportFormat::Json));
  json wrong = j;
  wrong["schema"] = "other/v9";
  CHECK_THROWS_AS(report_from_json(wrong), Error);
}

TEST_CASE("text report lists verdicts with their rules") {
  RecordStore store;
  const auto r = run_campaign(reference_config(), store, fixed_clock);
  const auto text = render_report(r, ReportFormat::Text);
  CHECK(text.find("overall: PASS") != std::string::npos);
  CHECK(line_with(text, "ERR-100%-B100%").find("0.2%") != std::string::npos);

  json j = reference_config_json();
  j["insulation"]["primary_to_secondary_megohm"] = 900.0;
  RecordStore s2;
  const auto bad = run_campaign(parse_config(j, kData), s2, fixed_clock);
  const auto bad_text = render_report(bad, ReportFormat::Text);
  const auto line = line_with(bad_text, "INS-PRIMARY-SECONDARY");
  CHECK(line.find("FAIL") != std::string::npos);
  CHECK(line.find("1000 MOhm") != std::string::npos);
  CHECK(bad_text.find("overall: FAIL") != std::string::npos);
}

TEST_CASE("table1 preset reproduces the monotone trend") {
  const auto out = run_preset(load_json(kData / "presets/table1.json"));
  CHECK(out.passed);
  CHECK(out.csv_files.count("table1_49hz.csv") == 1);
  CHECK(out.csv_files.count("table1_51hz.csv") == 1);
  CHECK(out.csv_files.at("table1_49hz.csv").rfind("window_samples,worst_bias\n2000,", 0) == 0);
  const auto& pts = out.summary.at("series").at(0).at("points");
  CHECK(pts.at(0).at("worst_bias").get<double>() > pts.at(1).at("worst_bias").get<double>());
  CHECK(pts.at(1).at("worst_bias").get<double>() > pts.at(2).at("worst_bias").get<double>());
}

TEST_CASE("table2 preset spread") {
  const auto preset = load_json(kData / "presets/table2.json");
  const auto out = run_preset(preset);
  CHECK(out.passed);
  CHECK(out.summary.at("max_deviation").get<double>() <= 0.001);
  CHECK(out.csv_files.at("table2.csv").rfind("run,frequency,amplitude,deviation\n", 0) == 0);

  json quiet = preset;
  quiet["noise_rms"] = 0.0;
  const auto q = run_preset(quiet);
  CHECK(q.summary.at("max_deviation").get<double>() < 1e-9);

  const auto a = run_preset(preset, 99);
  const auto b = run_preset(preset, 99);
  CHECK(a.csv_files == b.csv_files);
  CHECK(a.csv_files != out.csv_files);
}

TEST_CASE("unknown preset kind is rejected") {
  CHECK_THROWS_AS(run_preset(json{{"kind", "table9"}}), Error);
  CHECK_THROWS_AS(run_preset(json{{"kind", "table2"}}), Error);
}
