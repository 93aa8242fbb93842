#include "cfpo/run_config.hpp"

#include <stdexcept>

namespace cfpo {

LoadedRun load_run_config(const ConfigDoc& doc) {
  LoadedRun run;
  run.run_name = doc.get_string("run_name");
  run.output_dir = doc.get_string_or("output_dir", "");

  TrainConfig& cfg = run.train;

  ObjectiveConfig& obj = cfg.objective;
  obj.kind = objective_kind_from_string(doc.get_string("objective.kind"));
  obj.eps = doc.get_double_or("objective.eps", 0.2);
  obj.eps_low = doc.get_double_or("objective.eps_low", obj.eps);
  obj.eps_high = doc.get_double_or("objective.eps_high", obj.eps);
  obj.beta = doc.get_double_or("objective.beta", 0.0);
  obj.aggregation =
      aggregation_from_string(doc.get_string_or("objective.aggregation", "sequence_mean"));

  PolicySpec& pol = cfg.policy;
  pol.vocab_size = static_cast<int>(doc.get_int("policy.vocab_size"));
  pol.num_prompts = static_cast<int>(doc.get_int("policy.num_prompts"));
  pol.max_len = static_cast<int>(doc.get_int("policy.max_len"));
  pol.feature_mode =
      feature_mode_from_string(doc.get_string_or("policy.feature_mode", "prompt_prev"));
  pol.num_pos_buckets = static_cast<int>(doc.get_int_or("policy.num_pos_buckets", 1));

  EnvSpec& env = cfg.env;
  env.kind = env_kind_from_string(doc.get_string("env.kind"));
  env.num_prompts = pol.num_prompts;
  env.vocab_size = pol.vocab_size;
  if (doc.has("env.answer_tokens")) {
    for (const ConfigValue& v : doc.get_array("env.answer_tokens")) {
      if (const std::int64_t* i = std::get_if<std::int64_t>(&v.v)) {
        env.answer_map.push_back(static_cast<int>(*i));
      } else {
        throw ConfigError("field 'env.answer_tokens' must hold integers");
      }
    }
  } else {
    // Default: answers cycle through the non-EOS vocabulary.
    for (int p = 0; p < pol.num_prompts; ++p) {
      env.answer_map.push_back(1 + p % (pol.vocab_size - 1));
    }
  }
  env.quality_weight = doc.get_double_or("env.quality_weight", 1.0);
  env.length_bonus = doc.get_double_or("env.length_bonus", 0.0);
  env.length_cap = static_cast<int>(doc.get_int_or("env.length_cap", pol.max_len));
  env.reward_noise_std = doc.get_double_or("env.reward_noise_std", 0.0);

  cfg.batch_size = static_cast<int>(doc.get_int("trainer.batch_size"));
  cfg.group_size = static_cast<int>(doc.get_int("trainer.group_size"));
  cfg.iterations = static_cast<int>(doc.get_int("trainer.iterations"));
  cfg.minibatch_size =
      static_cast<int>(doc.get_int_or("trainer.minibatch_size", cfg.batch_responses()));
  cfg.learning_rate = doc.get_double("trainer.learning_rate");
  cfg.steps = static_cast<int>(doc.get_int("trainer.steps"));
  cfg.seed = static_cast<std::uint64_t>(doc.get_int("trainer.seed"));
  cfg.advantage_estimator = adv_estimator_from_string(
      doc.get_string_or("trainer.advantage_estimator", "group_relative"));
  cfg.temperature = doc.get_double_or("trainer.temperature", 1.0);

  try {
    cfg.validate();
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return run;
}

ConfigDoc run_config_to_doc(const LoadedRun& run) {
  const TrainConfig& cfg = run.train;
  ConfigDoc doc;
  doc.set("run_name", run.run_name);
  if (!run.output_dir.empty()) doc.set("output_dir", run.output_dir);

  doc.set("objective.kind", to_string(cfg.objective.kind));
  doc.set("objective.eps", cfg.objective.eps);
  doc.set("objective.eps_low", cfg.objective.eps_low);
  doc.set("objective.eps_high", cfg.objective.eps_high);
  doc.set("objective.beta", cfg.objective.beta);
  doc.set("objective.aggregation", to_string(cfg.objective.aggregation));

  doc.set("policy.vocab_size", cfg.policy.vocab_size);
  doc.set("policy.num_prompts", cfg.policy.num_prompts);
  doc.set("policy.max_len", cfg.policy.max_len);
  doc.set("policy.feature_mode", to_string(cfg.policy.feature_mode));
  doc.set("policy.num_pos_buckets", cfg.policy.num_pos_buckets);

  doc.set("env.kind", to_string(cfg.env.kind));
  ConfigValue::Array answers;
  for (int a : cfg.env.answer_map) answers.push_back(ConfigValue(a));
  doc.set("env.answer_tokens", ConfigValue(std::move(answers)));
  doc.set("env.quality_weight", cfg.env.quality_weight);
  doc.set("env.length_bonus", cfg.env.length_bonus);
  doc.set("env.length_cap", cfg.env.length_cap);
  doc.set("env.reward_noise_std", cfg.env.reward_noise_std);

  doc.set("trainer.batch_size", cfg.batch_size);
  doc.set("trainer.group_size", cfg.group_size);
  doc.set("trainer.iterations", cfg.iterations);
  doc.set("trainer.minibatch_size", cfg.minibatch_size);
  doc.set("trainer.learning_rate", cfg.learning_rate);
  doc.set("trainer.steps", cfg.steps);
  doc.set("trainer.seed", static_cast<std::int64_t>(cfg.seed));
  doc.set("trainer.advantage_estimator", to_string(cfg.advantage_estimator));
  doc.set("trainer.temperature", cfg.temperature);
  return doc;
}

}  // namespace cfpo
