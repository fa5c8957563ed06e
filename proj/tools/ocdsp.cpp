// Command-line front end: simulate, sweep, validate-floors, dump.
//
// Exit codes: 0 success, 1 runtime/config error, 2 usage error,
// 3 validate-floors ran but at least one check failed.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "ocdsp/config.hpp"
#include "ocdsp/errors.hpp"
#include "ocdsp/harness.hpp"

namespace {

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitValidationFailed = 3;

void emit_error(const std::string& kind, const std::string& message, const std::string& section = {},
                const std::string& key = {}) {
  nlohmann::ordered_json j;
  j["error"] = {{"kind", kind}, {"message", message}};
  if (!section.empty() || !key.empty()) {
    j["error"]["section"] = section;
    j["error"]["key"] = key;
  }
  std::cerr << j.dump() << '\n';
}

// Writes to `path`, or stdout when empty.
void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ocdsp::UsageError("cannot open output file '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coherent optical receiver DSP workbench"};
  app.require_subcommand(1);
  int threads = ocdsp::default_thread_count();
  app.add_option("--threads", threads, "worker threads for trials (default: $OCDSP_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  std::string config_path, out_path, param, values, what;
  bool timing = false;

  auto* simulate = app.add_subcommand("simulate", "run the configured chain and print a JSON report");
  simulate->add_option("config", config_path, "experiment config (INI)")->required();
  simulate->add_flag("--timing", timing, "include wall-clock times (breaks byte-identical output)");
  simulate->add_option("--out", out_path, "write the report here instead of stdout");

  auto* sweep = app.add_subcommand("sweep", "vary one config key and print a CSV row per (value, trial)");
  sweep->add_option("config", config_path, "experiment config (INI)")->required();
  sweep->add_option("--param", param, "section.key to vary, e.g. channel.tx_linewidth_khz")->required();
  sweep->add_option("--values", values, "comma list or start:stop:step")->required();
  sweep->add_flag("--timing", timing, "fill the wall_time_s column");
  sweep->add_option("--out", out_path, "write the CSV here instead of stdout");

  auto* validate = app.add_subcommand("validate-floors", "Monte Carlo check of the analytic CPE floors");
  validate->add_option("config", config_path, "experiment config (INI)")->required();
  validate->add_option("--out", out_path, "write the report here instead of stdout");

  auto* dump = app.add_subcommand("dump", "write one run artifact to a file");
  dump->add_option("config", config_path, "experiment config (INI)")->required();
  dump->add_option("--what", what, "taps | lms-trace | pol-taps | signal | phase-trace | floors")->required();
  dump->add_option("--out", out_path, "output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage", e.what());
    return kExitUsage;
  }

  try {
    const ocdsp::ExperimentConfig cfg = ocdsp::load_config(config_path);
    if (*simulate) {
      const auto report = ocdsp::run_simulation(cfg, threads);
      write_text(out_path, ocdsp::report_json(cfg, report, timing).dump(2) + "\n");
    } else if (*sweep) {
      const auto rows = ocdsp::run_sweep(cfg, param, ocdsp::parse_sweep_values(values), threads);
      std::ostringstream os;
      ocdsp::write_sweep_csv(os, rows, timing);
      write_text(out_path, os.str());
    } else if (*validate) {
      const auto checks = ocdsp::validate_floors(cfg, threads);
      const auto j = ocdsp::validation_json(checks);
      write_text(out_path, j.dump(2) + "\n");
      if (!j["all_pass"].get<bool>()) return kExitValidationFailed;
    } else if (*dump) {
      ocdsp::dump_artifact(cfg, what, out_path);
    }
  } catch (const ocdsp::ConfigError& e) {
    emit_error(e.kind(), e.what(), e.section(), e.key());
    return kExitError;
  } catch (const ocdsp::UsageError& e) {
    emit_error(e.kind(), e.what());
    return kExitUsage;
  } catch (const ocdsp::Error& e) {
    emit_error(e.kind(), e.what());
    return kExitError;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return kExitError;
  }
  return 0;
}
