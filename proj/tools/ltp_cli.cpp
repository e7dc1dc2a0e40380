// Command-line front end: loads scenario files, runs transports, checks,
// holonomy and frame constructions, and writes machine-readable reports.
//
// Exit codes: 0 success, 1 tolerance violation, 2 input/schema error,
// 3 numeric failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ltp/errors.hpp"
#include "ltp/scenario.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
  std::string scenario;
  std::string out_dir;
  std::string format = "text";
  std::optional<double> s, t, s0;
  std::optional<std::uint64_t> seed;
  bool oracle = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_scenario = true) {
  auto* opt = cmd->add_option("--scenario", args.scenario, "Scenario file (JSON)");
  if (needs_scenario) opt->required();
  cmd->add_option("--out", args.out_dir, "Output directory for reports");
  cmd->add_option("--format", args.format, "Report format")
      ->check(CLI::IsMember({"text", "tabular"}));
  cmd->add_option("--seed", args.seed, "Override the scenario seed");
}

int write_outcome(const std::string& name, const std::string& command,
                  const ltp::RunOutcome& outcome, const CommonArgs& args) {
  const std::string text = outcome.report.dump(2) + "\n";
  if (args.out_dir.empty()) {
    std::cout << text;
  } else {
    fs::create_directories(args.out_dir);
    const fs::path report_path =
        fs::path(args.out_dir) / (name + "." + command + ".report.json");
    std::ofstream out(report_path, std::ios::binary);
    if (!out) throw ltp::schema_error("out: cannot write '" + report_path.string() + "'");
    out << text;
    if (args.format == "tabular") {
      for (const auto& [label, csv] : outcome.tables) {
        const fs::path csv_path =
            fs::path(args.out_dir) / (name + "." + command + "." + label + ".csv");
        std::ofstream ct(csv_path, std::ios::binary);
        ct << csv;
      }
    }
    std::cout << name << "." << command << ": "
              << (outcome.exit_code == 0 ? "ok" : "tolerance violation") << ", report at "
              << report_path.string() << "\n";
  }
  return outcome.exit_code;
}

int run_one(const std::string& command, const CommonArgs& args) {
  const ltp::Scenario sc = ltp::load_scenario_file(args.scenario);
  ltp::RunOptions opts;
  opts.s = args.s;
  opts.t = args.t;
  opts.s0 = args.s0;
  opts.seed = args.seed;
  opts.oracle = args.oracle;
  const auto start = std::chrono::steady_clock::now();
  const ltp::RunOutcome outcome = ltp::run_command(sc, command, opts);
  const auto elapsed =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
  // Timing stays out of the report so reruns stay byte-identical.
  std::cerr << "wall_time_ms=" << elapsed.count() << "\n";
  return write_outcome(sc.name, command, outcome, args);
}

int run_batch(const std::string& dir, const CommonArgs& args) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ltp::schema_error("batch: no .json scenarios in '" + dir + "'");

  std::vector<std::string> lines(files.size());
  std::vector<int> codes(files.size(), 0);
  const int n = static_cast<int>(files.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      const ltp::Scenario sc = ltp::load_scenario_file(files[i].string());
      ltp::RunOptions opts;
      opts.seed = args.seed;
      const ltp::RunOutcome outcome = ltp::run_command(sc, sc.outputs.command, opts);
      if (!args.out_dir.empty()) {
        fs::create_directories(args.out_dir);
        const fs::path report_path =
            fs::path(args.out_dir) / (sc.name + "." + sc.outputs.command + ".report.json");
        std::ofstream out(report_path, std::ios::binary);
        out << outcome.report.dump(2) << "\n";
        if (args.format == "tabular")
          for (const auto& [label, csv] : outcome.tables) {
            std::ofstream ct(fs::path(args.out_dir) /
                             (sc.name + "." + sc.outputs.command + "." + label + ".csv"));
            ct << csv;
          }
      }
      codes[i] = outcome.exit_code;
      lines[i] = sc.name + "." + sc.outputs.command + ": " +
                 (outcome.exit_code == 0 ? "ok" : "tolerance violation");
    } catch (const ltp::schema_error& e) {
      codes[i] = 2;
      lines[i] = files[i].filename().string() + ": schema error: " + e.what();
    } catch (const ltp::numeric_error& e) {
      codes[i] = 3;
      lines[i] = files[i].filename().string() + ": numeric error: " + e.what();
    } catch (const std::exception& e) {
      codes[i] = 2;
      lines[i] = files[i].filename().string() + ": error: " + e.what();
    }
  }
  int worst = 0;
  for (int i = 0; i < n; ++i) {
    std::cout << lines[i] << "\n";
    worst = std::max(worst, codes[i]);
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear transports along paths: reconstruction, checks, frames, holonomy"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string batch_dir;

  auto* transport = app.add_subcommand("transport", "Transport matrix H(t,s) and vector images");
  add_common(transport, args);
  transport->add_option("--s", args.s, "Source parameter");
  transport->add_option("--t", args.t, "Target parameter");
  transport->add_flag("--oracle", args.oracle,
                      "Re-integrate at step/10 and report the discrepancy");

  auto* check = app.add_subcommand("check", "Axiom and derivation-property residuals");
  add_common(check, args);

  auto* holonomy = app.add_subcommand("holonomy", "Loop transport for christoffel scenarios");
  add_common(holonomy, args);

  auto* frame = app.add_subcommand("frame", "Special frame construction and verification");
  add_common(frame, args);
  frame->add_option("--s0", args.s0, "Anchor parameter");

  auto* derive = app.add_subcommand("derive", "Derivation of the scenario section");
  add_common(derive, args);
  derive->add_option("--s", args.s, "Evaluation parameter");

  auto* roundtrip = app.add_subcommand("roundtrip", "Coefficient reconstruction error");
  add_common(roundtrip, args);

  auto* batch = app.add_subcommand("batch", "Run every scenario in a directory");
  batch->add_option("--scenario", batch_dir, "Directory of scenario files")->required();
  batch->add_option("--out", args.out_dir, "Output directory for reports");
  batch->add_option("--format", args.format, "Report format")
      ->check(CLI::IsMember({"text", "tabular"}));
  batch->add_option("--seed", args.seed, "Override every scenario seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(transport)) return run_one("transport", args);
    if (app.got_subcommand(check)) return run_one("check", args);
    if (app.got_subcommand(holonomy)) return run_one("holonomy", args);
    if (app.got_subcommand(frame)) return run_one("frame", args);
    if (app.got_subcommand(derive)) return run_one("derive", args);
    if (app.got_subcommand(roundtrip)) return run_one("roundtrip", args);
    if (app.got_subcommand(batch)) return run_batch(batch_dir, args);
  } catch (const ltp::schema_error& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const ltp::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
