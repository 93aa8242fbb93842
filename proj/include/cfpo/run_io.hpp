#ifndef CFPO_RUN_IO_HPP_
#define CFPO_RUN_IO_HPP_

#include <filesystem>
#include <string>

#include "cfpo/trainer.hpp"

namespace cfpo {

// Fixed metrics.csv column order.
extern const char* const kMetricsCsvHeader;

std::string metrics_csv(const TrainConfig& cfg, const std::vector<MetricsRecord>& records);

// Scalar digest of a finished run; everything the report and the sweep
// aggregation need without re-reading metrics.csv.
std::string summary_json(const TrainConfig& cfg, const TrainResult& result,
                         const std::string& run_name);

// Writes metrics.csv, summary.json and checkpoint.csv into `dir` (created if
// needed).
void write_run_artifacts(const TrainConfig& cfg, const TrainResult& result,
                         const std::string& run_name, const std::filesystem::path& dir);

}  // namespace cfpo

#endif  // CFPO_RUN_IO_HPP_
