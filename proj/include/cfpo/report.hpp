#ifndef CFPO_REPORT_HPP_
#define CFPO_REPORT_HPP_

#include <filesystem>
#include <string>
#include <vector>

namespace cfpo {

// Digest of one completed run directory.
struct RunSummary {
  std::string run_name;
  std::string objective;
  std::string advantage_estimator;
  std::string env;
  int iterations = 0;
  int minibatch_size = 0;
  int batch_ratio = 1;
  double beta = 0.0;
  long seed = 0;
  int steps_completed = 0;
  bool collapsed = false;
  double final_reward = 0.0;
  double max_reward = 0.0;
  double reward_drop = 0.0;
  double mean_clip_frac_high = 0.0;
  double max_clip_frac_high = 0.0;
  double final_entropy = 0.0;
  double length_growth = 0.0;
  double length_slope = 0.0;  // OLS slope of per-step mean length
};

// Sort-and-pick median; even counts average the two middle values.
double median(std::vector<double> values);

// Loads every runs_dir/*/summary.json (and its metrics.csv for the length
// slope), sorted by run name.
std::vector<RunSummary> collect_runs(const std::filesystem::path& runs_dir);

// Writes summary.csv (one row per run) and comparison.csv (medians over
// seeds, grouped by objective x iterations x batch ratio) into runs_dir.
// Returns the number of runs aggregated; throws on an empty directory.
int write_report(const std::filesystem::path& runs_dir, bool quiet);

}  // namespace cfpo

#endif  // CFPO_REPORT_HPP_
