#ifndef CFPO_ENVS_HPP_
#define CFPO_ENVS_HPP_

#include <span>
#include <string>
#include <vector>

#include "cfpo/rng.hpp"

namespace cfpo {

enum class EnvKind { kVerifiable, kLengthHackable };

std::string to_string(EnvKind kind);
EnvKind env_kind_from_string(const std::string& s);

// Response-level reward environments. Verifiable pays 1.0 for emitting the
// prompt's answer token and terminating with EOS; LengthHackable adds a
// capped per-token bonus on top of the answer-quality term, the exploitable
// length channel.
struct EnvSpec {
  EnvKind kind = EnvKind::kVerifiable;
  int num_prompts = 1;
  int vocab_size = 2;
  std::vector<int> answer_map;    // per prompt, token in [1, vocab_size)
  double quality_weight = 1.0;    // LengthHackable only
  double length_bonus = 0.0;      // per content token up to length_cap
  int length_cap = 1;
  double reward_noise_std = 0.0;

  // policy_max_len bounds length_cap; pass the policy's max_len.
  void validate(int policy_max_len) const;
};

// Uniform prompt id in [0, num_prompts).
int sample_prompt(const EnvSpec& spec, RngStream& rng);

// Scalar reward for one response. Pure in (spec, prompt, tokens, rng draws).
double reward(const EnvSpec& spec, int prompt_id, std::span<const int> tokens,
              RngStream& rng);

}  // namespace cfpo

#endif  // CFPO_ENVS_HPP_
