#include "cfpo/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cfpo {

std::string to_string(FeatureMode mode) {
  return mode == FeatureMode::kPromptPrev ? "prompt_prev" : "prompt_prev_pos";
}

FeatureMode feature_mode_from_string(const std::string& s) {
  if (s == "prompt_prev") return FeatureMode::kPromptPrev;
  if (s == "prompt_prev_pos") return FeatureMode::kPromptPrevPos;
  throw std::domain_error("unknown feature mode '" + s +
                          "' (expected prompt_prev|prompt_prev_pos)");
}

int PolicySpec::num_states() const {
  const int base = num_prompts * vocab_size;
  return feature_mode == FeatureMode::kPromptPrevPos ? base * num_pos_buckets : base;
}

void PolicySpec::validate() const {
  if (vocab_size < 2) throw std::domain_error("vocab_size must be >= 2");
  if (num_prompts < 1) throw std::domain_error("num_prompts must be >= 1");
  if (max_len < 1) throw std::domain_error("max_len must be >= 1");
  if (num_pos_buckets < 1) throw std::domain_error("num_pos_buckets must be >= 1");
}

PolicyParams zero_params(const PolicySpec& spec) {
  spec.validate();
  PolicyParams p;
  p.spec = spec;
  p.theta.assign(static_cast<std::size_t>(spec.num_states()) * spec.vocab_size, 0.0);
  return p;
}

StateIndex state_index(const PolicySpec& spec, int prompt_id, int prev_token,
                       int position) {
  if (prompt_id < 0 || prompt_id >= spec.num_prompts) {
    throw std::domain_error("prompt_id out of range");
  }
  if (prev_token < 0 || prev_token >= spec.vocab_size) {
    throw std::domain_error("prev_token out of range");
  }
  if (position < 0 || position >= spec.max_len) {
    throw std::domain_error("position out of range");
  }
  StateIndex s;
  s.prompt_id = prompt_id;
  s.prev_token = prev_token;
  const int base = prompt_id * spec.vocab_size + prev_token;
  if (spec.feature_mode == FeatureMode::kPromptPrevPos) {
    s.pos_bucket = position * spec.num_pos_buckets / spec.max_len;
    s.row = base * spec.num_pos_buckets + s.pos_bucket;
  } else {
    s.pos_bucket = 0;
    s.row = base;
  }
  return s;
}

namespace {

// logsumexp of the state's row after max subtraction; returns (max, lse).
std::pair<double, double> row_max_lse(const PolicyParams& params, int row) {
  const int v = params.spec.vocab_size;
  const double* logits = params.theta.data() + static_cast<std::size_t>(row) * v;
  double m = logits[0];
  for (int j = 1; j < v; ++j) m = std::max(m, logits[j]);
  double sum = 0.0;
  for (int j = 0; j < v; ++j) sum += std::exp(logits[j] - m);
  return {m, std::log(sum)};
}

}  // namespace

std::vector<double> token_distribution(const PolicyParams& params, const StateIndex& state) {
  const int v = params.spec.vocab_size;
  const double* logits = params.theta.data() + static_cast<std::size_t>(state.row) * v;
  double m = logits[0];
  for (int j = 1; j < v; ++j) m = std::max(m, logits[j]);
  std::vector<double> probs(v);
  double sum = 0.0;
  for (int j = 0; j < v; ++j) {
    probs[j] = std::exp(logits[j] - m);
    sum += probs[j];
  }
  for (double& p : probs) p /= sum;
  return probs;
}

double log_prob(const PolicyParams& params, const StateIndex& state, int token) {
  if (token < 0 || token >= params.spec.vocab_size) {
    throw std::domain_error("token out of range");
  }
  const auto [m, lse] = row_max_lse(params, state.row);
  return params.logit(state.row, token) - m - lse;
}

void log_prob_grad(const PolicyParams& params, const StateIndex& state, int token,
                   std::span<double> out) {
  const int v = params.spec.vocab_size;
  if (static_cast<int>(out.size()) != v) {
    throw std::domain_error("gradient span size must equal vocab_size");
  }
  const std::vector<double> probs = token_distribution(params, state);
  for (int j = 0; j < v; ++j) out[j] = -probs[j];
  out[token] += 1.0;
}

Response sample_response(const PolicyParams& params, int prompt_id, RngStream& rng,
                         double temperature) {
  if (!(temperature > 0.0)) throw std::domain_error("temperature must be positive");
  const PolicySpec& spec = params.spec;
  Response resp;
  int prev = 0;  // BOS convention: reserved token 0
  for (int pos = 0; pos < spec.max_len; ++pos) {
    const StateIndex state = state_index(spec, prompt_id, prev, pos);

    // Selection distribution under temperature-scaled logits.
    const int v = spec.vocab_size;
    const double* logits = params.theta.data() + static_cast<std::size_t>(state.row) * v;
    double m = logits[0];
    for (int j = 1; j < v; ++j) m = std::max(m, logits[j]);
    double sum = 0.0;
    std::vector<double> w(v);
    for (int j = 0; j < v; ++j) {
      w[j] = std::exp((logits[j] - m) / temperature);
      sum += w[j];
    }

    const double u = rng.next_double() * sum;
    double acc = 0.0;
    int token = v - 1;  // guard against accumulated rounding
    for (int j = 0; j < v; ++j) {
      acc += w[j];
      if (u < acc) {
        token = j;
        break;
      }
    }

    resp.tokens.push_back(token);
    resp.logps.push_back(log_prob(params, state, token));
    if (token == 0) break;
    prev = token;
  }
  return resp;
}

std::vector<StateIndex> response_states(const PolicySpec& spec, int prompt_id,
                                        std::span<const int> tokens) {
  std::vector<StateIndex> states;
  states.reserve(tokens.size());
  int prev = 0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    states.push_back(state_index(spec, prompt_id, prev, static_cast<int>(t)));
    prev = tokens[t];
  }
  return states;
}

int content_length(std::span<const int> tokens) {
  if (tokens.empty()) return 0;
  return static_cast<int>(tokens.size()) - (tokens.back() == 0 ? 1 : 0);
}

double entropy(const PolicyParams& params, const StateIndex& state) {
  const std::vector<double> probs = token_distribution(params, state);
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double policy_kl(const PolicyParams& a, const PolicyParams& b,
                 std::span<const StateIndex> states) {
  if (states.empty()) throw std::domain_error("policy_kl requires a nonempty state list");
  double total = 0.0;
  std::vector<double> lpa(a.spec.vocab_size), lpb(b.spec.vocab_size);
  for (const StateIndex& s : states) {
    const auto [ma, lsea] = row_max_lse(a, s.row);
    const auto [mb, lseb] = row_max_lse(b, s.row);
    double kl = 0.0;
    for (int j = 0; j < a.spec.vocab_size; ++j) {
      const double la = a.logit(s.row, j) - ma - lsea;
      const double lb = b.logit(s.row, j) - mb - lseb;
      kl += std::exp(la) * (la - lb);
    }
    total += kl;
  }
  return total / static_cast<double>(states.size());
}

void save_checkpoint(const PolicyParams& params, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  const PolicySpec& s = params.spec;
  out << "vocab_size,num_prompts,max_len,feature_mode,num_pos_buckets,num_states\n";
  out << s.vocab_size << ',' << s.num_prompts << ',' << s.max_len << ','
      << to_string(s.feature_mode) << ',' << s.num_pos_buckets << ',' << s.num_states()
      << '\n';
  char buf[64];
  for (int row = 0; row < s.num_states(); ++row) {
    for (int j = 0; j < s.vocab_size; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", params.logit(row, j));
      out << buf << (j + 1 == s.vocab_size ? '\n' : ',');
    }
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path.string());
}

PolicyParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  std::string header, specs;
  std::getline(in, header);
  std::getline(in, specs);

  auto fields = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
  };
  const auto sf = fields(specs);
  if (sf.size() != 6) throw std::runtime_error("malformed checkpoint header");

  PolicySpec spec;
  spec.vocab_size = std::stoi(sf[0]);
  spec.num_prompts = std::stoi(sf[1]);
  spec.max_len = std::stoi(sf[2]);
  spec.feature_mode = feature_mode_from_string(sf[3]);
  spec.num_pos_buckets = std::stoi(sf[4]);
  spec.validate();
  if (std::stoi(sf[5]) != spec.num_states()) {
    throw std::runtime_error("checkpoint num_states does not match spec");
  }

  PolicyParams params = zero_params(spec);
  std::string line;
  for (int row = 0; row < spec.num_states(); ++row) {
    if (!std::getline(in, line)) throw std::runtime_error("checkpoint truncated");
    const auto vals = fields(line);
    if (static_cast<int>(vals.size()) != spec.vocab_size) {
      throw std::runtime_error("checkpoint row has wrong arity");
    }
    for (int j = 0; j < spec.vocab_size; ++j) {
      params.logit(row, j) = std::stod(vals[j]);
    }
  }
  return params;
}

}  // namespace cfpo
