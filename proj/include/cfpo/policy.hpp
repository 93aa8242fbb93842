#ifndef CFPO_POLICY_HPP_
#define CFPO_POLICY_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cfpo/rng.hpp"

namespace cfpo {

enum class FeatureMode { kPromptPrev, kPromptPrevPos };

std::string to_string(FeatureMode mode);
FeatureMode feature_mode_from_string(const std::string& s);

// Shape of the feature-indexed softmax sequence policy. Token 0 is the
// reserved end-of-sequence symbol; it also serves as the beginning-of-
// sequence previous token at position 0.
struct PolicySpec {
  int vocab_size = 2;
  int num_prompts = 1;
  int max_len = 1;
  FeatureMode feature_mode = FeatureMode::kPromptPrev;
  int num_pos_buckets = 1;

  int num_states() const;
  void validate() const;
  bool operator==(const PolicySpec&) const = default;
};

struct StateIndex {
  int prompt_id = 0;
  int prev_token = 0;
  int pos_bucket = 0;
  int row = 0;  // row into the logit table
};

// Dense logit table, one row per state, one column per vocabulary token.
struct PolicyParams {
  PolicySpec spec;
  std::vector<double> theta;  // num_states x vocab_size, row-major

  double logit(int row, int token) const { return theta[row * spec.vocab_size + token]; }
  double& logit(int row, int token) { return theta[row * spec.vocab_size + token]; }
};

PolicyParams zero_params(const PolicySpec& spec);

// Injective map from (prompt, previous token, position) into the logit row
// space. Position enters only in kPromptPrevPos mode, bucketed as
// floor(position * num_pos_buckets / max_len).
StateIndex state_index(const PolicySpec& spec, int prompt_id, int prev_token,
                       int position);

// Softmax of the state's logit row, max-subtracted. Entries positive,
// summing to 1 within 1e-12.
std::vector<double> token_distribution(const PolicyParams& params, const StateIndex& state);

// log pi(token | state), computed as logit - logsumexp. Always finite, <= 0.
double log_prob(const PolicyParams& params, const StateIndex& state, int token);

// Score function restricted to the state's row: onehot(token) - probs.
// Every other row of the full gradient is zero. out.size() == vocab_size.
void log_prob_grad(const PolicyParams& params, const StateIndex& state, int token,
                   std::span<double> out);

struct Response {
  std::vector<int> tokens;   // includes the terminating 0 when sampled
  std::vector<double> logps; // per token, under the untempered policy
};

// Autoregressive sampling until EOS (token 0) or max_len tokens.
// `temperature` scales logits for action selection only; recorded logps are
// always the temperature-1 log-probabilities of the chosen tokens.
Response sample_response(const PolicyParams& params, int prompt_id, RngStream& rng,
                         double temperature = 1.0);

// States visited while producing `tokens` for this prompt, one per token.
std::vector<StateIndex> response_states(const PolicySpec& spec, int prompt_id,
                                        std::span<const int> tokens);

// Number of non-EOS tokens.
int content_length(std::span<const int> tokens);

// Shannon entropy of the state's token distribution, in nats.
double entropy(const PolicyParams& params, const StateIndex& state);

// Mean over `states` of exact KL(pi_a(.|s) || pi_b(.|s)).
double policy_kl(const PolicyParams& a, const PolicyParams& b,
                 std::span<const StateIndex> states);

// Checkpoint: CSV with a spec header followed by the row-major logit table.
// Round-trips doubles exactly.
void save_checkpoint(const PolicyParams& params, const std::filesystem::path& path);
PolicyParams load_checkpoint(const std::filesystem::path& path);

}  // namespace cfpo

#endif  // CFPO_POLICY_HPP_
