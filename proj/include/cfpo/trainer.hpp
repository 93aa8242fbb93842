#ifndef CFPO_TRAINER_HPP_
#define CFPO_TRAINER_HPP_

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cfpo/envs.hpp"
#include "cfpo/objectives.hpp"
#include "cfpo/policy.hpp"
#include "cfpo/rng.hpp"

namespace cfpo {

enum class AdvEstimator { kGroupRelative, kLeaveOneOut };

std::string to_string(AdvEstimator est);
AdvEstimator adv_estimator_from_string(const std::string& s);

struct TrainConfig {
  ObjectiveConfig objective;
  EnvSpec env;
  PolicySpec policy;
  int batch_size = 1;      // prompts per rollout
  int group_size = 2;      // responses per prompt (G / K)
  int iterations = 1;      // passes over each rollout batch (mu)
  int minibatch_size = 2;  // responses per gradient step; must divide batch responses
  double learning_rate = 0.1;
  int steps = 1;           // rollout rounds
  std::uint64_t seed = 0;
  AdvEstimator advantage_estimator = AdvEstimator::kGroupRelative;
  double temperature = 1.0;  // action selection only; logps stay untempered

  int batch_responses() const { return batch_size * group_size; }
  void validate() const;
};

// One rollout round: grouped responses with their generating-snapshot
// log-probabilities. old_logps are immutable for the whole epoch; ratios are
// always taken against them.
struct RolloutBatch {
  std::vector<int> prompts;                      // batch_size entries
  std::vector<std::vector<int>> responses;       // batch_size * G, group-major
  std::vector<std::vector<double>> old_logps;    // aligned with responses
  std::vector<std::vector<double>> ref_logps;    // under the reference policy
  std::vector<double> rewards;                   // per response
  std::vector<double> advantages;                // per response, estimator output

  int prompt_of(int response_index, int group_size) const {
    return prompts[response_index / group_size];
  }
};

double batch_mean_reward(const RolloutBatch& batch);
double batch_mean_length(const RolloutBatch& batch);

struct MetricsRecord {
  int step = 0;
  int substep = 0;
  double mean_reward = 0.0;
  double clip_frac_high = 0.0;
  double clip_frac_low = 0.0;
  double mean_entropy = 0.0;
  double kl_prev = 0.0;
  double kl_ref = 0.0;
  double mean_length = 0.0;
  double grad_norm = 0.0;
};

// Samples batch_size prompts x group_size responses from `params`, recording
// per-token snapshot and reference log-probabilities and per-response env
// rewards. Each (prompt slot, group member) draws from its own substream of
// `rng`, so the result is independent of thread schedule. The plain variant
// fans out over responses with OpenMP; _serial is the reference
// implementation and produces bit-identical batches.
RolloutBatch rollout(const PolicyParams& params, const PolicyParams& ref,
                     const TrainConfig& cfg, const RngStream& rng);
RolloutBatch rollout_serial(const PolicyParams& params, const PolicyParams& ref,
                            const TrainConfig& cfg, const RngStream& rng);

// Fills batch.advantages per prompt group.
void compute_advantages(RolloutBatch& batch, AdvEstimator estimator, int group_size);

struct GradResult {
  std::vector<double> grad;  // d(loss)/d(theta), loss = -objective
  double loss = 0.0;
  long tokens = 0;
  long clipped_high = 0;  // ratio > 1 + eps_high
  long clipped_low = 0;   // ratio < 1 - eps_low
  double grad_norm = 0.0;
};

// Loss and exact gradient over the selected responses. Ratios come from
// exp(logp_cur - old_logp); a log gap beyond 50 throws RatioOverflowError
// naming the offending (response, token). Per-response contributions are
// computed independently (OpenMP in the plain variant) and merged in
// response-major, token-minor order, so serial and parallel results are
// bit-identical.
GradResult surrogate_gradient(const PolicyParams& params, const RolloutBatch& batch,
                              std::span<const int> response_ids,
                              const ObjectiveConfig& cfg);
GradResult surrogate_gradient_serial(const PolicyParams& params, const RolloutBatch& batch,
                                     std::span<const int> response_ids,
                                     const ObjectiveConfig& cfg);

// Diagnostic record over the whole batch: clip fractions from ratios under
// `before` against the batch's old_logps, entropy under `after`, exact KL
// from `before` to `after` over visited states, reward/length from the batch.
MetricsRecord compute_metrics(const RolloutBatch& batch, const PolicyParams& before,
                              const PolicyParams& after, const ObjectiveConfig& cfg);

// mu passes over the batch in seeded-shuffle mini-batches of
// cfg.minibatch_size responses; one plain gradient-ascent step per
// mini-batch, ratios always against the rollout snapshot. Appends one
// MetricsRecord per gradient step to `records` (so records up to a ratio
// overflow survive the throw). Returns the number of gradient steps taken.
int update_epoch(PolicyParams& params, const RolloutBatch& batch, const TrainConfig& cfg,
                 const PolicyParams& ref, int step, const RngStream& shuffle_rng,
                 std::vector<MetricsRecord>& records);

struct TrainResult {
  PolicyParams params;
  std::vector<MetricsRecord> records;
  int steps_completed = 0;
  bool collapsed = false;
  std::string collapse_reason = "none";  // none | ratio_overflow | reward_collapse
  int collapse_step = -1;
  double final_reward = 0.0;
  double max_reward = 0.0;
};

// Tracks the reward-collapse rule: mean reward below 10% of its running max
// for 20 consecutive steps.
class CollapseMonitor {
 public:
  // Returns true when the rule fires at this observation.
  bool observe(double mean_reward);
  double running_max() const { return running_max_; }

 private:
  double running_max_ = -std::numeric_limits<double>::infinity();
  int below_count_ = 0;
};

// Full run: alternates rollout / advantage estimation / update epochs for
// cfg.steps rounds. Collapse (ratio overflow or the reward rule) stops the
// run and is recorded as an outcome, not an error.
TrainResult train(const TrainConfig& cfg);

}  // namespace cfpo

#endif  // CFPO_TRAINER_HPP_
