#ifndef CFPO_SWEEP_HPP_
#define CFPO_SWEEP_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "cfpo/config.hpp"

namespace cfpo {

struct SweepSpec {
  ConfigDoc base;  // the run config a grid point starts from
  std::vector<std::pair<std::string, ConfigValue::Array>> axes;  // in file order
  int parallelism = 1;
  int max_grid = 512;
};

// Reads a sweep file; `base` is a path resolved relative to the sweep file.
SweepSpec parse_sweep(const std::filesystem::path& path);

struct GridPoint {
  int index = 0;
  std::string run_name;
  std::vector<std::pair<std::string, ConfigValue>> overrides;  // axis path -> value
};

// Cartesian product of the axes, first axis slowest. Deterministic in the
// SweepSpec. Throws ConfigError when the grid exceeds max_grid.
std::vector<GridPoint> materialize_grid(const SweepSpec& spec);

struct SweepOutcome {
  std::vector<std::string> statuses;  // per point: completed|skipped_existing|failed
  int failures = 0;
};

// Runs every grid point into out_root/<run_name>, skipping directories that
// already hold a summary.json, up to `jobs` points at a time. Writes
// manifest.json into out_root.
SweepOutcome run_sweep(const SweepSpec& spec, const std::filesystem::path& out_root,
                       int jobs, bool quiet);

}  // namespace cfpo

#endif  // CFPO_SWEEP_HPP_
