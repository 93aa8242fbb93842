#include "cfpo/run_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace cfpo {

const char* const kMetricsCsvHeader =
    "step,substep,objective,iterations,minibatch_size,mean_reward,clip_frac_high,"
    "clip_frac_low,mean_entropy,kl_prev,kl_ref,mean_length,grad_norm";

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

std::string metrics_csv(const TrainConfig& cfg, const std::vector<MetricsRecord>& records) {
  std::string out = kMetricsCsvHeader;
  out += '\n';
  const std::string objective = to_string(cfg.objective.kind);
  for (const MetricsRecord& r : records) {
    out += std::to_string(r.step);
    out += ',';
    out += std::to_string(r.substep);
    out += ',';
    out += objective;
    out += ',';
    out += std::to_string(cfg.iterations);
    out += ',';
    out += std::to_string(cfg.minibatch_size);
    out += ',';
    out += fmt(r.mean_reward);
    out += ',';
    out += fmt(r.clip_frac_high);
    out += ',';
    out += fmt(r.clip_frac_low);
    out += ',';
    out += fmt(r.mean_entropy);
    out += ',';
    out += fmt(r.kl_prev);
    out += ',';
    out += fmt(r.kl_ref);
    out += ',';
    out += fmt(r.mean_length);
    out += ',';
    out += fmt(r.grad_norm);
    out += '\n';
  }
  return out;
}

std::string summary_json(const TrainConfig& cfg, const TrainResult& result,
                         const std::string& run_name) {
  double mean_high = 0.0, max_high = 0.0, mean_low = 0.0, mean_kl_prev = 0.0;
  double final_entropy = 0.0;
  double initial_length = 0.0, final_length = 0.0;
  if (!result.records.empty()) {
    for (const MetricsRecord& r : result.records) {
      mean_high += r.clip_frac_high;
      mean_low += r.clip_frac_low;
      mean_kl_prev += r.kl_prev;
      max_high = std::max(max_high, r.clip_frac_high);
    }
    const double n = static_cast<double>(result.records.size());
    mean_high /= n;
    mean_low /= n;
    mean_kl_prev /= n;
    final_entropy = result.records.back().mean_entropy;
    initial_length = result.records.front().mean_length;
    final_length = result.records.back().mean_length;
  }

  nlohmann::ordered_json j;
  j["run_name"] = run_name;
  j["objective"] = to_string(cfg.objective.kind);
  j["aggregation"] = to_string(cfg.objective.aggregation);
  j["advantage_estimator"] = to_string(cfg.advantage_estimator);
  j["env"] = to_string(cfg.env.kind);
  j["eps"] = cfg.objective.eps;
  j["beta"] = cfg.objective.beta;
  j["iterations"] = cfg.iterations;
  j["batch_size"] = cfg.batch_size;
  j["group_size"] = cfg.group_size;
  j["minibatch_size"] = cfg.minibatch_size;
  j["batch_ratio"] = cfg.batch_responses() / cfg.minibatch_size;
  j["learning_rate"] = cfg.learning_rate;
  j["seed"] = cfg.seed;
  j["steps_budget"] = cfg.steps;
  j["steps_completed"] = result.steps_completed;
  j["gradient_steps"] = result.records.size();
  j["collapsed"] = result.collapsed;
  j["collapse_reason"] = result.collapse_reason;
  j["collapse_step"] = result.collapse_step;
  j["final_reward"] = result.final_reward;
  j["max_reward"] = result.max_reward;
  j["reward_drop"] = result.max_reward - result.final_reward;
  j["final_entropy"] = final_entropy;
  j["mean_clip_frac_high"] = mean_high;
  j["max_clip_frac_high"] = max_high;
  j["mean_clip_frac_low"] = mean_low;
  j["mean_kl_prev"] = mean_kl_prev;
  j["initial_mean_length"] = initial_length;
  j["final_mean_length"] = final_length;
  j["length_growth"] = final_length - initial_length;
  return j.dump(2) + "\n";
}

void write_run_artifacts(const TrainConfig& cfg, const TrainResult& result,
                         const std::string& run_name, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  {
    std::ofstream out(dir / "metrics.csv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / "metrics.csv").string());
    out << metrics_csv(cfg, result.records);
  }
  save_checkpoint(result.params, dir / "checkpoint.csv");
  {
    // summary.json written last: its presence marks a completed run.
    std::ofstream out(dir / "summary.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / "summary.json").string());
    out << summary_json(cfg, result, run_name);
  }
}

}  // namespace cfpo
