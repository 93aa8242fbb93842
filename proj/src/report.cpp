#include "cfpo/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cfpo {

double median(std::vector<double> values) {
  if (values.empty()) throw std::domain_error("median of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

// Least-squares slope of per-step mean length, one sample per rollout step.
double length_slope_from_csv(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) return 0.0;
  std::string line;
  std::getline(in, line);  // header

  std::vector<double> xs, ys;
  int last_step = -1;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 13) continue;
    const int step = std::stoi(fields[0]);
    if (step == last_step) continue;  // one sample per step
    last_step = step;
    xs.push_back(static_cast<double>(step));
    ys.push_back(std::stod(fields[11]));
  }
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

std::vector<RunSummary> collect_runs(const std::filesystem::path& runs_dir) {
  std::vector<RunSummary> runs;
  if (!std::filesystem::is_directory(runs_dir)) return runs;

  std::vector<std::filesystem::path> dirs;
  for (const auto& entry : std::filesystem::directory_iterator(runs_dir)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "summary.json")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());

  for (const auto& dir : dirs) {
    std::ifstream in(dir / "summary.json");
    nlohmann::json j;
    in >> j;

    RunSummary s;
    s.run_name = j.value("run_name", dir.filename().string());
    s.objective = j.value("objective", "");
    s.advantage_estimator = j.value("advantage_estimator", "");
    s.env = j.value("env", "");
    s.iterations = j.value("iterations", 0);
    s.minibatch_size = j.value("minibatch_size", 0);
    s.batch_ratio = j.value("batch_ratio", 1);
    s.beta = j.value("beta", 0.0);
    s.seed = j.value("seed", 0L);
    s.steps_completed = j.value("steps_completed", 0);
    s.collapsed = j.value("collapsed", false);
    s.final_reward = j.value("final_reward", 0.0);
    s.max_reward = j.value("max_reward", 0.0);
    s.reward_drop = j.value("reward_drop", 0.0);
    s.mean_clip_frac_high = j.value("mean_clip_frac_high", 0.0);
    s.max_clip_frac_high = j.value("max_clip_frac_high", 0.0);
    s.final_entropy = j.value("final_entropy", 0.0);
    s.length_growth = j.value("length_growth", 0.0);
    s.length_slope = length_slope_from_csv(dir / "metrics.csv");
    runs.push_back(std::move(s));
  }
  return runs;
}

int write_report(const std::filesystem::path& runs_dir, bool quiet) {
  const std::vector<RunSummary> runs = collect_runs(runs_dir);
  if (runs.empty()) {
    throw std::runtime_error("no completed runs under " + runs_dir.string());
  }

  {
    std::ofstream out(runs_dir / "summary.csv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write summary.csv");
    out << "run_name,objective,advantage_estimator,env,iterations,minibatch_size,"
           "batch_ratio,beta,seed,steps_completed,collapsed,final_reward,max_reward,"
           "reward_drop,mean_clip_frac_high,max_clip_frac_high,final_entropy,"
           "length_growth,length_slope\n";
    for (const RunSummary& s : runs) {
      out << s.run_name << ',' << s.objective << ',' << s.advantage_estimator << ','
          << s.env << ',' << s.iterations << ',' << s.minibatch_size << ','
          << s.batch_ratio << ',' << fmt(s.beta) << ',' << s.seed << ','
          << s.steps_completed << ',' << (s.collapsed ? "true" : "false") << ','
          << fmt(s.final_reward) << ',' << fmt(s.max_reward) << ',' << fmt(s.reward_drop)
          << ',' << fmt(s.mean_clip_frac_high) << ',' << fmt(s.max_clip_frac_high) << ','
          << fmt(s.final_entropy) << ',' << fmt(s.length_growth) << ','
          << fmt(s.length_slope) << '\n';
    }
  }

  // Seed-median comparison per (objective, iterations, batch ratio) cell.
  std::map<std::tuple<std::string, int, int>, std::vector<const RunSummary*>> groups;
  for (const RunSummary& s : runs) {
    groups[{s.objective, s.iterations, s.batch_ratio}].push_back(&s);
  }

  std::string table;
  {
    std::ofstream out(runs_dir / "comparison.csv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write comparison.csv");
    const char* header =
        "objective,iterations,batch_ratio,runs,collapsed_runs,median_final_reward,"
        "median_reward_drop,median_mean_clip_frac_high,median_final_entropy,"
        "median_length_growth";
    out << header << '\n';
    table = std::string(header) + "\n";
    for (const auto& [key, members] : groups) {
      std::vector<double> reward, drop, clip, entropy, growth;
      int collapsed = 0;
      for (const RunSummary* s : members) {
        reward.push_back(s->final_reward);
        drop.push_back(s->reward_drop);
        clip.push_back(s->mean_clip_frac_high);
        entropy.push_back(s->final_entropy);
        growth.push_back(s->length_growth);
        collapsed += s->collapsed ? 1 : 0;
      }
      std::ostringstream row;
      row << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ','
          << members.size() << ',' << collapsed << ',' << fmt(median(reward)) << ','
          << fmt(median(drop)) << ',' << fmt(median(clip)) << ',' << fmt(median(entropy))
          << ',' << fmt(median(growth)) << '\n';
      out << row.str();
      table += row.str();
    }
  }

  if (!quiet) std::fputs(table.c_str(), stdout);
  return static_cast<int>(runs.size());
}

}  // namespace cfpo
