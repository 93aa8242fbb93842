#include "cfpo/sweep.hpp"

#include <atomic>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "cfpo/run_config.hpp"
#include "cfpo/run_io.hpp"

namespace cfpo {

SweepSpec parse_sweep(const std::filesystem::path& path) {
  const ConfigDoc doc = ConfigDoc::parse_file(path);
  SweepSpec spec;

  const std::string base_rel = doc.get_string("base");
  const std::filesystem::path base_path = path.parent_path() / base_rel;
  spec.base = ConfigDoc::parse_file(base_path);
  spec.parallelism = static_cast<int>(doc.get_int_or("parallelism", 1));
  spec.max_grid = static_cast<int>(doc.get_int_or("max_grid", 512));
  if (spec.parallelism < 1) throw ConfigError("field 'parallelism' must be >= 1");

  for (const auto& [key, value] : doc.entries()) {
    if (key.rfind("axes.", 0) != 0) continue;
    const std::string axis_path = key.substr(5);
    if (!value.is_array()) {
      throw ConfigError("axis '" + axis_path + "' must be an array of values");
    }
    spec.axes.emplace_back(axis_path, std::get<ConfigValue::Array>(value.v));
  }
  if (spec.axes.empty()) throw ConfigError("sweep needs at least one axis under [axes]");
  for (const auto& [axis, values] : spec.axes) {
    if (values.empty()) throw ConfigError("axis '" + axis + "' has no values");
  }
  return spec;
}

namespace {

std::string value_label(const ConfigValue& v) {
  std::string s = serialize_value(v);
  // File-system friendly: strip quotes, map anything exotic to '-'.
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_') {
      out += c;
    }
  }
  return out;
}

std::string axis_label(const std::string& path) {
  const std::size_t dot = path.rfind('.');
  return dot == std::string::npos ? path : path.substr(dot + 1);
}

}  // namespace

std::vector<GridPoint> materialize_grid(const SweepSpec& spec) {
  long total = 1;
  for (const auto& [axis, values] : spec.axes) {
    total *= static_cast<long>(values.size());
    if (total > spec.max_grid) {
      throw ConfigError("sweep grid exceeds max_grid = " + std::to_string(spec.max_grid));
    }
  }

  std::vector<GridPoint> points;
  points.reserve(static_cast<std::size_t>(total));
  for (long index = 0; index < total; ++index) {
    GridPoint point;
    point.index = static_cast<int>(index);

    // First axis slowest (row-major).
    long rem = index;
    std::vector<std::size_t> picks(spec.axes.size());
    for (std::size_t a = spec.axes.size(); a-- > 0;) {
      const auto& values = spec.axes[a].second;
      picks[a] = static_cast<std::size_t>(rem % static_cast<long>(values.size()));
      rem /= static_cast<long>(values.size());
    }

    char idx_buf[16];
    std::snprintf(idx_buf, sizeof(idx_buf), "p%03ld", index);
    point.run_name = idx_buf;
    for (std::size_t a = 0; a < spec.axes.size(); ++a) {
      const auto& [axis, values] = spec.axes[a];
      point.overrides.emplace_back(axis, values[picks[a]]);
      point.run_name += "_" + axis_label(axis) + "=" + value_label(values[picks[a]]);
    }
    points.push_back(std::move(point));
  }
  return points;
}

SweepOutcome run_sweep(const SweepSpec& spec, const std::filesystem::path& out_root,
                       int jobs, bool quiet) {
  const std::vector<GridPoint> points = materialize_grid(spec);
  std::filesystem::create_directories(out_root);

  SweepOutcome outcome;
  outcome.statuses.assign(points.size(), "pending");

  auto write_manifest = [&]() {
    nlohmann::ordered_json j;
    j["points"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
      nlohmann::ordered_json p;
      p["index"] = points[i].index;
      p["run_name"] = points[i].run_name;
      p["dir"] = points[i].run_name;
      nlohmann::ordered_json ov = nlohmann::ordered_json::object();
      for (const auto& [axis, value] : points[i].overrides) {
        ov[axis] = serialize_value(value);
      }
      p["overrides"] = ov;
      p["status"] = outcome.statuses[i];
      j["points"].push_back(p);
    }
    std::ofstream out(out_root / "manifest.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest.json");
    out << j.dump(2) << "\n";
  };

  std::atomic<std::size_t> next{0};
  std::atomic<int> failures{0};
  std::mutex log_mutex;

  auto worker = [&]() {
#ifdef _OPENMP
    // Sweep points already run concurrently; keep each run single-threaded.
    if (jobs > 1) omp_set_num_threads(1);
#endif
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      const GridPoint& point = points[i];
      const std::filesystem::path dir = out_root / point.run_name;

      if (std::filesystem::exists(dir / "summary.json")) {
        outcome.statuses[i] = "skipped_existing";
        continue;
      }
      try {
        ConfigDoc doc = spec.base;
        for (const auto& [axis, value] : point.overrides) doc.set(axis, value);
        doc.set("run_name", point.run_name);
        const LoadedRun run = load_run_config(doc);

        const TrainResult result = train(run.train);
        std::filesystem::create_directories(dir);
        {
          std::ofstream cfg_out(dir / "config.toml", std::ios::binary);
          cfg_out << run_config_to_doc(run).serialize();
        }
        write_run_artifacts(run.train, result, point.run_name, dir);
        outcome.statuses[i] = "completed";
        if (!quiet) {
          std::lock_guard<std::mutex> lock(log_mutex);
          std::printf("[sweep] %s: %s\n", point.run_name.c_str(),
                      result.collapsed ? "collapsed" : "done");
        }
      } catch (const std::exception& e) {
        outcome.statuses[i] = std::string("failed: ") + e.what();
        failures.fetch_add(1);
        if (!quiet) {
          std::lock_guard<std::mutex> lock(log_mutex);
          std::fprintf(stderr, "[sweep] %s failed: %s\n", point.run_name.c_str(), e.what());
        }
      }
    }
  };

  const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(points.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n_workers));
    for (int t = 0; t < n_workers; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }

  outcome.failures = failures.load();
  write_manifest();
  return outcome;
}

}  // namespace cfpo
