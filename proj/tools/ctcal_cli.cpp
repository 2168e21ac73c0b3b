// ctcal: command-line front end over the C API.
//
//   ctcal simulate --spec spec.json --out prefix
//   ctcal sweep --preset table1|table2 --out dir
//   ctcal measure --config campaign.json [--store records.ctrec] --out report.json
//   ctcal report --input report.json --format json|text
//   ctcal verify --store records.ctrec
//
// Exit codes: 0 pass, 1 verdict fail, 2 usage/config error, 3 internal error.

#include <ctcal/ctcal.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

struct Failure {
  int exit_code;
  std::string message;
};

int exit_code_for(ctcal_status s) {
  switch (s) {
    case CTCAL_OK: return kExitPass;
    case CTCAL_E_INTEGRITY: return kExitFail;
    case CTCAL_E_INTERNAL: return kExitInternal;
    default: return kExitUsage;
  }
}

void check(ctcal_status s, const std::string& context) {
  if (s != CTCAL_OK) {
    throw Failure{exit_code_for(s), context + ": " + ctcal_status_name(s) + ": " + ctcal_last_error()};
  }
}

struct StringDeleter {
  void operator()(char* p) const { ctcal_string_free(p); }
};
using CString = std::unique_ptr<char, StringDeleter>;

template <typename T, void (*Free)(T*)>
struct HandleDeleter {
  void operator()(T* p) const { Free(p); }
};
using Buffer = std::unique_ptr<ctcal_buffer, HandleDeleter<ctcal_buffer, ctcal_buffer_free>>;
using Report = std::unique_ptr<ctcal_report, HandleDeleter<ctcal_report, ctcal_report_free>>;
using Store = std::unique_ptr<ctcal_store, HandleDeleter<ctcal_store, ctcal_store_free>>;

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Failure{kExitUsage, "cannot write " + path.string()};
}

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string data_dir = CTCAL_DATA_DIR;
};

// Accepts a file path or the name of a shipped preset.
fs::path resolve_preset(const Globals& g, const std::string& name) {
  if (fs::is_regular_file(name)) return name;
  const fs::path p = fs::path(g.data_dir) / "presets" / (name + ".json");
  if (!fs::is_regular_file(p)) throw Failure{kExitUsage, "no preset '" + name + "' (looked in " + p.string() + ")"};
  return p;
}

// ---- simulate -----------------------------------------------------------------

struct SimulateArgs {
  std::string spec;
  double dut_ratio_pct = 0.0;
  double dut_phase_min = 0.0;
  bool with_dut = false;
};

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
  if (g.out.empty()) throw Failure{kExitUsage, "simulate needs --out <prefix>"};
  const fs::path spec_path = resolve_preset(g, a.spec);
  ctcal_waveform_spec spec;
  check(ctcal_waveform_spec_load(spec_path.c_str(), &spec), "loading spec " + a.spec);
  if (g.seed) spec.seed = *g.seed;

  ctcal_buffer* raw = nullptr;
  check(ctcal_synthesize(&spec, &raw), "synthesize");
  Buffer ref(raw);

  const fs::path prefix(g.out);
  if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
  const std::string base = prefix.string();
  json files = {{"csv", base + ".csv"}, {"binary", base + ".bin"}};
  check(ctcal_buffer_write_csv(ref.get(), (base + ".csv").c_str()), "writing csv");
  check(ctcal_buffer_write_binary(ref.get(), (base + ".bin").c_str()), "writing binary");

  json manifest = {{"origin", ctcal_buffer_origin(ref.get())},
                   {"samples", ctcal_buffer_length(ref.get())},
                   {"sample_rate", ctcal_buffer_sample_rate(ref.get())},
                   {"duration", static_cast<double>(ctcal_buffer_length(ref.get())) / spec.sample_rate},
                   {"seed", spec.seed},
                   {"tool", std::string("ctcal ") + ctcal_version()}};

  if (a.with_dut) {
    Buffer dut;
    check(ctcal_dut_channel(ref.get(), {a.dut_ratio_pct, a.dut_phase_min}, &spec, &raw), "dut channel");
    dut.reset(raw);
    check(ctcal_buffer_write_csv(dut.get(), (base + ".dut.csv").c_str()), "writing dut csv");
    check(ctcal_buffer_write_binary(dut.get(), (base + ".dut.bin").c_str()), "writing dut binary");
    files["dut_csv"] = base + ".dut.csv";
    files["dut_binary"] = base + ".dut.bin";
    manifest["dut"] = {{"origin", ctcal_buffer_origin(dut.get())},
                       {"ratio_error_pct", a.dut_ratio_pct},
                       {"phase_error_min", a.dut_phase_min}};
  }
  manifest["files"] = files;
  write_file(base + ".manifest.json", manifest.dump(2) + "\n");
  std::cout << manifest.dump(2) << "\n";
  return kExitPass;
}

// ---- sweep --------------------------------------------------------------------

int cmd_sweep(const Globals& g, const std::string& preset) {
  const fs::path path = resolve_preset(g, preset);
  int passed = 0;
  char* raw = nullptr;
  check(ctcal_preset_run(path.c_str(), g.seed.value_or(0), g.seed ? 1 : 0, &passed, &raw), "preset " + preset);
  const CString text(raw);
  const json result = json::parse(text.get());
  const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
  for (const auto& [name, contents] : result.at("csv_files").items()) {
    write_file(dir / name, contents.get<std::string>());
  }
  write_file(dir / (result.at("summary").value("kind", preset) + "_summary.json"), result.at("summary").dump(2) + "\n");
  std::cout << result.at("summary").dump(2) << "\n" << (passed ? "verdict: PASS" : "verdict: FAIL") << "\n";
  return passed ? kExitPass : kExitFail;
}

// ---- measure / report ---------------------------------------------------------

ctcal_report_format parse_format(const std::string& f) {
  return f == "text" ? CTCAL_FORMAT_TEXT : CTCAL_FORMAT_JSON;
}

int emit_report(const ctcal_report* report, const std::string& format, const std::string& out_path) {
  char* raw = nullptr;
  if (!out_path.empty()) {
    check(ctcal_report_render(report, CTCAL_FORMAT_JSON, &raw), "render report");
    const CString json_text(raw);
    write_file(out_path, std::string(json_text.get()) + "\n");
  }
  check(ctcal_report_render(report, parse_format(format), &raw), "render report");
  const CString text(raw);
  std::cout << text.get();
  if (text.get()[0] != '\0' && std::string(text.get()).back() != '\n') std::cout << "\n";
  return ctcal_report_passed(report) ? kExitPass : kExitFail;
}

int cmd_measure(const Globals& g, const std::string& config, const std::string& store_path,
                const std::string& format) {
  Store store;
  if (!store_path.empty()) {
    ctcal_store* raw = nullptr;
    if (fs::exists(store_path)) {
      check(ctcal_store_open(store_path.c_str(), &raw), "opening store " + store_path);
    } else {
      check(ctcal_store_create(store_path.c_str(), &raw), "creating store " + store_path);
    }
    store.reset(raw);
  }
  ctcal_report* raw = nullptr;
  check(ctcal_campaign_run(config.c_str(), store.get(), &raw), "campaign " + config);
  const Report report(raw);
  return emit_report(report.get(), format, g.out);
}

int cmd_report(const Globals& g, const std::string& input, const std::string& format) {
  ctcal_report* raw = nullptr;
  check(ctcal_report_load(input.c_str(), &raw), "loading report " + input);
  const Report report(raw);
  return emit_report(report.get(), format, g.out);
}

int cmd_verify(const std::string& store_path) {
  size_t records = 0;
  check(ctcal_store_verify_file(store_path.c_str(), &records), "verifying " + store_path);
  std::cout << store_path << ": " << records << " records, chain intact\n";
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Current-transformer calibration by the asynchronous-frequency method"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("ctcal ") + ctcal_version());

  Globals g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Override the RNG seed of the spec or preset");
  app.add_option("--out", g.out, "Output path (file, prefix or directory depending on the command)");
  app.add_option("--data-dir", g.data_dir, "Directory holding the shipped presets")->capture_default_str();
  app.fallthrough();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Synthesize a waveform spec into CSV and binary buffers");
  simulate->add_option("--spec", sim.spec, "Waveform spec JSON or shipped preset name")->required();
  auto* dr = simulate->add_option("--dut-ratio", sim.dut_ratio_pct, "Also write a DUT channel with this ratio error (%)");
  auto* dp = simulate->add_option("--dut-phase", sim.dut_phase_min, "DUT phase error (arc-minutes)");

  std::string preset;
  auto* sweep = app.add_subcommand("sweep", "Run a benchmark sweep preset and write its CSV");
  sweep->add_option("--preset", preset, "table1, table2 or a preset JSON path")->required();

  std::string config, store_path, format = "text";
  auto* measure = app.add_subcommand("measure", "Run a campaign config and write its report");
  measure->add_option("--config", config, "Campaign config JSON")->required()->check(CLI::ExistingFile);
  measure->add_option("--store", store_path, "Record store file (created if missing)");
  measure->add_option("--format", format, "Console format")->check(CLI::IsMember({"json", "text"}));

  std::string input;
  auto* report = app.add_subcommand("report", "Render a saved report");
  report->add_option("--input", input, "Report JSON")->required()->check(CLI::ExistingFile);
  report->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "text"}));

  std::string verify_path;
  auto* verify = app.add_subcommand("verify", "Check the hash chain of a record store");
  verify->add_option("--store", verify_path, "Record store file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitUsage;
  }
  if (seed_opt->count() > 0) g.seed = seed;
  sim.with_dut = dr->count() > 0 || dp->count() > 0;

  try {
    if (simulate->parsed()) return cmd_simulate(g, sim);
    if (sweep->parsed()) return cmd_sweep(g, preset);
    if (measure->parsed()) return cmd_measure(g, config, store_path, format);
    if (report->parsed()) return cmd_report(g, input, format);
    if (verify->parsed()) return cmd_verify(verify_path);
  } catch (const Failure& f) {
    std::cerr << "ctcal: " << f.message << "\n";
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "ctcal: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
