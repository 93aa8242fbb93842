#ifndef CFPO_RUN_CONFIG_HPP_
#define CFPO_RUN_CONFIG_HPP_

#include <string>

#include "cfpo/config.hpp"
#include "cfpo/trainer.hpp"

namespace cfpo {

struct LoadedRun {
  TrainConfig train;
  std::string run_name;
  std::string output_dir;  // empty: resolved by the caller (flag / env var)
};

// Typed view of a run-config document. Throws ConfigError naming the field
// on anything missing or malformed; validates the assembled TrainConfig.
LoadedRun load_run_config(const ConfigDoc& doc);

// Inverse of load_run_config, used to materialize sweep grid points.
ConfigDoc run_config_to_doc(const LoadedRun& run);

}  // namespace cfpo

#endif  // CFPO_RUN_CONFIG_HPP_
