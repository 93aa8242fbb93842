#ifndef CFPO_TESTS_PRESETS_HPP_
#define CFPO_TESTS_PRESETS_HPP_

#include "cfpo/trainer.hpp"

namespace cfpo_tests {

// Small verifiable-reward setup used across trainer tests and the
// acceptance dynamics sweeps.
inline cfpo::TrainConfig verifiable_preset() {
  cfpo::TrainConfig cfg;
  cfg.objective.kind = cfpo::ObjectiveKind::kClip;
  cfg.objective.eps = 0.2;
  cfg.objective.eps_low = 0.2;
  cfg.objective.eps_high = 0.2;
  cfg.objective.beta = 0.0;

  cfg.policy.vocab_size = 8;
  cfg.policy.num_prompts = 4;
  cfg.policy.max_len = 12;
  cfg.policy.feature_mode = cfpo::FeatureMode::kPromptPrevPos;
  cfg.policy.num_pos_buckets = 3;

  cfg.env.kind = cfpo::EnvKind::kVerifiable;
  cfg.env.num_prompts = 4;
  cfg.env.vocab_size = 8;
  cfg.env.answer_map = {3, 5, 2, 7};

  cfg.batch_size = 8;
  cfg.group_size = 4;
  cfg.iterations = 1;
  cfg.minibatch_size = cfg.batch_responses() / 2;  // batch ratio 2: mini-batch lag
  cfg.learning_rate = 4.0;
  cfg.steps = 40;
  cfg.seed = 1;
  cfg.advantage_estimator = cfpo::AdvEstimator::kGroupRelative;
  return cfg;
}

// Length-correlated preference reward with leave-one-out advantages, the
// verbosity-exploitation setup.
inline cfpo::TrainConfig length_hack_preset() {
  cfpo::TrainConfig cfg;
  cfg.objective.kind = cfpo::ObjectiveKind::kClip;
  cfg.objective.eps = 0.2;
  cfg.objective.eps_low = 0.2;
  cfg.objective.eps_high = 0.2;
  cfg.objective.beta = 0.0;

  cfg.policy.vocab_size = 8;
  cfg.policy.num_prompts = 2;
  cfg.policy.max_len = 24;

  cfg.env.kind = cfpo::EnvKind::kLengthHackable;
  cfg.env.num_prompts = 2;
  cfg.env.vocab_size = 8;
  cfg.env.answer_map = {3, 5};
  cfg.env.quality_weight = 1.0;
  cfg.env.length_bonus = 0.05;
  cfg.env.length_cap = 20;

  cfg.batch_size = 16;
  cfg.group_size = 2;
  cfg.iterations = 4;
  cfg.minibatch_size = cfg.batch_responses();
  cfg.learning_rate = 2.0;
  cfg.steps = 40;
  cfg.seed = 1;
  cfg.advantage_estimator = cfpo::AdvEstimator::kLeaveOneOut;
  return cfg;
}

}  // namespace cfpo_tests

#endif  // CFPO_TESTS_PRESETS_HPP_
