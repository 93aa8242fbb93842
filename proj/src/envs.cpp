#include "cfpo/envs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cfpo/policy.hpp"

namespace cfpo {

std::string to_string(EnvKind kind) {
  return kind == EnvKind::kVerifiable ? "verifiable" : "length_hackable";
}

EnvKind env_kind_from_string(const std::string& s) {
  if (s == "verifiable") return EnvKind::kVerifiable;
  if (s == "length_hackable") return EnvKind::kLengthHackable;
  throw std::domain_error("unknown env kind '" + s +
                          "' (expected verifiable|length_hackable)");
}

void EnvSpec::validate(int policy_max_len) const {
  if (num_prompts < 1) throw std::domain_error("env num_prompts must be >= 1");
  if (vocab_size < 2) throw std::domain_error("env vocab_size must be >= 2");
  if (static_cast<int>(answer_map.size()) != num_prompts) {
    throw std::domain_error("answer_map must have one token per prompt");
  }
  for (int a : answer_map) {
    if (a < 1 || a >= vocab_size) {
      throw std::domain_error("answer tokens must lie in [1, vocab_size)");
    }
  }
  if (reward_noise_std < 0.0) throw std::domain_error("reward_noise_std must be >= 0");
  if (kind == EnvKind::kLengthHackable) {
    if (length_bonus < 0.0) throw std::domain_error("length_bonus must be >= 0");
    if (length_cap < 1 || length_cap > policy_max_len) {
      throw std::domain_error("length_cap must be in [1, policy max_len]");
    }
  }
}

int sample_prompt(const EnvSpec& spec, RngStream& rng) {
  return static_cast<int>(rng.next_below(static_cast<std::uint64_t>(spec.num_prompts)));
}

double reward(const EnvSpec& spec, int prompt_id, std::span<const int> tokens,
              RngStream& rng) {
  if (tokens.empty()) throw std::domain_error("reward requires a nonempty response");
  if (prompt_id < 0 || prompt_id >= spec.num_prompts) {
    throw std::domain_error("prompt_id out of range");
  }

  const int answer = spec.answer_map[prompt_id];
  const bool has_answer = std::find(tokens.begin(), tokens.end(), answer) != tokens.end();
  const bool terminated = tokens.back() == 0;

  double value = 0.0;
  if (spec.kind == EnvKind::kVerifiable) {
    value = (has_answer && terminated) ? 1.0 : 0.0;
  } else {
    const double quality = has_answer ? 1.0 : 0.0;
    const int len = std::min(content_length(tokens), spec.length_cap);
    value = spec.quality_weight * quality + spec.length_bonus * static_cast<double>(len);
  }
  if (spec.reward_noise_std > 0.0) {
    value += spec.reward_noise_std * rng.next_gaussian();
  }
  return value;
}

}  // namespace cfpo
