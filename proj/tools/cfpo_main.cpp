// Command-line front end: single runs, sweep grids, the theory check suite,
// and run-directory aggregation.
//
// Exit codes: 0 success (a recorded training collapse is still success),
// 1 theory check violation, 2 invalid config / empty input, 3 I/O failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfpo/report.hpp"
#include "cfpo/run_config.hpp"
#include "cfpo/run_io.hpp"
#include "cfpo/sweep.hpp"
#include "cfpo/theory.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

// Priority: --out flag, config output_dir, CFPO_OUT_DIR, ./runs.
fs::path resolve_out_dir(const std::string& flag_out, const std::string& config_out) {
  if (!flag_out.empty()) return flag_out;
  if (!config_out.empty()) return config_out;
  if (const char* env = std::getenv("CFPO_OUT_DIR")) return env;
  return "runs";
}

int cmd_run(const std::string& config_path, const std::string& out_flag,
            long seed_override, bool quiet) {
  cfpo::LoadedRun run;
  try {
    const cfpo::ConfigDoc doc = cfpo::ConfigDoc::parse_file(config_path);
    run = cfpo::load_run_config(doc);
  } catch (const cfpo::ConfigError& e) {
    std::fprintf(stderr, "error: %s: %s\n", config_path.c_str(), e.what());
    return kExitConfig;
  }
  if (seed_override >= 0) run.train.seed = static_cast<std::uint64_t>(seed_override);

  const fs::path dir = resolve_out_dir(out_flag, run.output_dir) / run.run_name;
  try {
    const cfpo::TrainResult result = cfpo::train(run.train);
    cfpo::write_run_artifacts(run.train, result, run.run_name, dir);
    if (!quiet) {
      std::printf("run %s: %d/%d steps, final reward %.6g%s\n", run.run_name.c_str(),
                  result.steps_completed, run.train.steps, result.final_reward,
                  result.collapsed ? (" (collapsed: " + result.collapse_reason + ")").c_str()
                                   : "");
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
  return kExitOk;
}

int cmd_sweep(const std::string& sweep_path, const std::string& out_flag, int jobs,
              bool quiet) {
  cfpo::SweepSpec spec;
  try {
    spec = cfpo::parse_sweep(sweep_path);
    cfpo::materialize_grid(spec);  // validates the grid size up front
  } catch (const cfpo::ConfigError& e) {
    std::fprintf(stderr, "error: %s: %s\n", sweep_path.c_str(), e.what());
    return kExitConfig;
  }

  const fs::path out_root =
      resolve_out_dir(out_flag, spec.base.get_string_or("output_dir", ""));
  try {
    const int n_jobs = jobs > 0 ? jobs : spec.parallelism;
    const cfpo::SweepOutcome outcome = cfpo::run_sweep(spec, out_root, n_jobs, quiet);
    if (outcome.failures > 0) {
      std::fprintf(stderr, "error: %d sweep point(s) failed\n", outcome.failures);
      return kExitIo;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
  return kExitOk;
}

int cmd_check(const std::string& out_path, long seed, bool sign_bug, bool quiet) {
  cfpo::CheckSuiteOptions opts;
  if (seed >= 0) opts.seed = static_cast<std::uint64_t>(seed);
  opts.inject_sign_bug = sign_bug;

  std::vector<cfpo::CheckReport> reports;
  try {
    reports = cfpo::run_all_checks(opts);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }

  long total_violations = 0;
  std::string first_failing;
  nlohmann::ordered_json j;
  j["seed"] = opts.seed;
  j["checks"] = nlohmann::ordered_json::array();
  for (const cfpo::CheckReport& r : reports) {
    nlohmann::ordered_json c;
    c["check_name"] = r.name;
    c["trials"] = r.trials;
    c["violations"] = r.violations;
    c["max_slack"] = r.max_slack;
    c["wall_time_ms"] = r.wall_time_ms;
    c["inconclusive"] = r.inconclusive;
    if (!r.note.empty()) c["note"] = r.note;
    j["checks"].push_back(c);
    total_violations += r.violations;
    if (r.violations > 0 && first_failing.empty()) first_failing = r.name;
    if (!quiet) {
      std::printf("%-28s trials %-8ld violations %-4ld %s\n", r.name.c_str(), r.trials,
                  r.violations, r.violations == 0 ? "ok" : "FAILED");
    }
  }
  j["total_violations"] = total_violations;
  j["ok"] = total_violations == 0;

  try {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << j.dump(2) << "\n";
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }

  if (total_violations > 0) {
    std::fprintf(stderr, "check failed: %s (%ld violation(s) total)\n",
                 first_failing.c_str(), total_violations);
    return kExitViolation;
  }
  return kExitOk;
}

int cmd_report(const std::string& runs_dir, bool quiet) {
  try {
    const int n = cfpo::write_report(runs_dir, quiet);
    if (!quiet) std::printf("aggregated %d run(s) under %s\n", n, runs_dir.c_str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Policy-optimization lab: clipped vs quadratic-penalty surrogates"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress progress output");

  std::string config_path, out_dir;
  long seed_override = -1;
  auto* run = app.add_subcommand("run", "execute one training run from a config file");
  run->fallthrough();
  run->add_option("-c,--config", config_path, "run config file")->required();
  run->add_option("-o,--out", out_dir, "output root directory");
  run->add_option("--seed", seed_override, "override the config seed");

  std::string sweep_path, sweep_out;
  int jobs = 0;
  auto* sweep = app.add_subcommand("sweep", "run a config grid");
  sweep->fallthrough();
  sweep->add_option("-c,--config", sweep_path, "sweep spec file")->required();
  sweep->add_option("-o,--out", sweep_out, "output root directory");
  sweep->add_option("-j,--parallel", jobs, "concurrent runs (default: spec parallelism)");

  std::string report_path = "report.json";
  long check_seed = -1;
  bool sign_bug = false;
  auto* check = app.add_subcommand("check", "run the numerical theory suite");
  check->fallthrough();
  check->add_option("-o,--out", report_path, "report JSON path");
  check->add_option("--seed", check_seed, "suite seed");
  check->add_flag("--inject-sign-bug", sign_bug, "self-test fixture: flip a penalty sign")
      ->group("");  // hidden

  std::string runs_dir;
  auto* report = app.add_subcommand("report", "aggregate completed run directories");
  report->fallthrough();
  report->add_option("runs_dir", runs_dir, "directory of run subdirectories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, seed_override, quiet);
    if (sweep->parsed()) return cmd_sweep(sweep_path, sweep_out, jobs, quiet);
    if (check->parsed()) return cmd_check(report_path, check_seed, sign_bug, quiet);
    if (report->parsed()) return cmd_report(runs_dir, quiet);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitIo;
  }
  return kExitConfig;
}
