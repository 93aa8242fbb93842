#include "cfpo/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cfpo/advantages.hpp"
#include "cfpo/errors.hpp"

namespace cfpo {

namespace {

// Substream tags for the per-step stream tree.
constexpr std::uint64_t kPromptTag = 1;
constexpr std::uint64_t kSampleTag = 2;
constexpr std::uint64_t kRewardTag = 3;

constexpr double kLogGapGuard = 50.0;

}  // namespace

std::string to_string(AdvEstimator est) {
  return est == AdvEstimator::kGroupRelative ? "group_relative" : "leave_one_out";
}

AdvEstimator adv_estimator_from_string(const std::string& s) {
  if (s == "group_relative") return AdvEstimator::kGroupRelative;
  if (s == "leave_one_out") return AdvEstimator::kLeaveOneOut;
  throw std::domain_error("unknown advantage estimator '" + s +
                          "' (expected group_relative|leave_one_out)");
}

void TrainConfig::validate() const {
  objective.validate();
  policy.validate();
  env.validate(policy.max_len);
  if (env.num_prompts != policy.num_prompts) {
    throw std::domain_error("env num_prompts must match policy num_prompts");
  }
  if (env.vocab_size != policy.vocab_size) {
    throw std::domain_error("env vocab_size must match policy vocab_size");
  }
  if (batch_size < 1) throw std::domain_error("batch_size must be >= 1");
  if (group_size < 2) throw std::domain_error("group_size must be >= 2");
  if (iterations < 1) throw std::domain_error("iterations must be >= 1");
  const int n = batch_responses();
  if (minibatch_size < 1 || minibatch_size > n) {
    throw std::domain_error("minibatch_size must be in [1, batch_size*group_size]");
  }
  if (n % minibatch_size != 0) {
    throw std::domain_error("batch_size*group_size must be divisible by minibatch_size");
  }
  if (!(learning_rate > 0.0)) throw std::domain_error("learning_rate must be positive");
  if (steps < 0) throw std::domain_error("steps must be >= 0");
  if (!(temperature > 0.0)) throw std::domain_error("temperature must be positive");
}

double batch_mean_reward(const RolloutBatch& batch) {
  if (batch.rewards.empty()) return 0.0;
  double sum = 0.0;
  for (double r : batch.rewards) sum += r;
  return sum / static_cast<double>(batch.rewards.size());
}

double batch_mean_length(const RolloutBatch& batch) {
  if (batch.responses.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& tokens : batch.responses) sum += content_length(tokens);
  return sum / static_cast<double>(batch.responses.size());
}

namespace {

// Samples one (prompt slot, group member) response and its bookkeeping.
void fill_response(const PolicyParams& params, const PolicyParams& ref,
                   const TrainConfig& cfg, const RngStream& step_rng, int prompt_slot,
                   int member, RolloutBatch& batch) {
  const int g = cfg.group_size;
  const int idx = prompt_slot * g + member;
  const int prompt = batch.prompts[prompt_slot];

  RngStream sample_rng =
      step_rng.substream(kSampleTag).substream(static_cast<std::uint64_t>(idx));
  Response resp = sample_response(params, prompt, sample_rng, cfg.temperature);

  RngStream reward_rng =
      step_rng.substream(kRewardTag).substream(static_cast<std::uint64_t>(idx));
  batch.rewards[idx] = reward(cfg.env, prompt, resp.tokens, reward_rng);

  const auto states = response_states(params.spec, prompt, resp.tokens);
  auto& refs = batch.ref_logps[idx];
  refs.resize(resp.tokens.size());
  for (std::size_t t = 0; t < resp.tokens.size(); ++t) {
    refs[t] = log_prob(ref, states[t], resp.tokens[t]);
  }

  batch.responses[idx] = std::move(resp.tokens);
  batch.old_logps[idx] = std::move(resp.logps);
}

RolloutBatch rollout_impl(const PolicyParams& params, const PolicyParams& ref,
                          const TrainConfig& cfg, const RngStream& rng, bool parallel) {
  const int n = cfg.batch_responses();
  RolloutBatch batch;
  batch.prompts.resize(cfg.batch_size);
  batch.responses.resize(n);
  batch.old_logps.resize(n);
  batch.ref_logps.resize(n);
  batch.rewards.resize(n);

  for (int i = 0; i < cfg.batch_size; ++i) {
    RngStream prompt_rng = rng.substream(kPromptTag).substream(static_cast<std::uint64_t>(i));
    batch.prompts[i] = sample_prompt(cfg.env, prompt_rng);
  }

  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int idx = 0; idx < n; ++idx) {
      fill_response(params, ref, cfg, rng, idx / cfg.group_size, idx % cfg.group_size, batch);
    }
  } else {
    for (int idx = 0; idx < n; ++idx) {
      fill_response(params, ref, cfg, rng, idx / cfg.group_size, idx % cfg.group_size, batch);
    }
  }
  return batch;
}

}  // namespace

RolloutBatch rollout(const PolicyParams& params, const PolicyParams& ref,
                     const TrainConfig& cfg, const RngStream& rng) {
  return rollout_impl(params, ref, cfg, rng, true);
}

RolloutBatch rollout_serial(const PolicyParams& params, const PolicyParams& ref,
                            const TrainConfig& cfg, const RngStream& rng) {
  return rollout_impl(params, ref, cfg, rng, false);
}

void compute_advantages(RolloutBatch& batch, AdvEstimator estimator, int group_size) {
  if (group_size < 2) throw std::domain_error("group_size must be >= 2");
  const int n = static_cast<int>(batch.rewards.size());
  if (n % group_size != 0) throw std::domain_error("batch not divisible into groups");
  batch.advantages.resize(n);
  for (int start = 0; start < n; start += group_size) {
    const std::span<const double> group(batch.rewards.data() + start,
                                        static_cast<std::size_t>(group_size));
    const std::vector<double> adv = estimator == AdvEstimator::kGroupRelative
                                        ? group_relative(group)
                                        : leave_one_out(group);
    std::copy(adv.begin(), adv.end(), batch.advantages.begin() + start);
  }
}

namespace {

// Gradient contribution of one response, accumulated per visited logit row
// in first-visit order. Merging these in response order gives a summation
// order that does not depend on thread count.
struct ResponseGrad {
  std::vector<int> rows;
  std::vector<std::vector<double>> row_grads;
  double loss = 0.0;
  long clipped_high = 0;
  long clipped_low = 0;
};

ResponseGrad build_response_gradient(const PolicyParams& params, const RolloutBatch& batch,
                                     int response_id, int prompt, const ObjectiveConfig& cfg,
                                     double seq_weight, double token_weight) {
  const auto& tokens = batch.responses[response_id];
  const auto& old_logps = batch.old_logps[response_id];
  const auto& ref_logps = batch.ref_logps[response_id];
  const double advantage = batch.advantages[response_id];
  const int v = params.spec.vocab_size;

  const double w = cfg.aggregation == Aggregation::kPerSequenceMean
                       ? seq_weight / static_cast<double>(tokens.size())
                       : token_weight;

  ResponseGrad out;
  const auto states = response_states(params.spec, prompt, tokens);
  std::vector<double> score(v);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const StateIndex& state = states[t];
    const double logp_cur = log_prob(params, state, tokens[t]);
    const double gap = logp_cur - old_logps[t];
    if (std::abs(gap) > kLogGapGuard) {
      throw RatioOverflowError(gap, response_id, static_cast<long>(t),
                               "probability ratio overflow at response " +
                                   std::to_string(response_id) + ", token " +
                                   std::to_string(t));
    }
    const double ratio = std::exp(gap);

    TokenLoss tl;
    try {
      tl = token_loss({ratio, advantage, logp_cur, ref_logps[t]}, cfg);
    } catch (const RatioOverflowError& e) {
      throw RatioOverflowError(e.log_gap(), response_id, static_cast<long>(t),
                               "reference KL overflow at response " +
                                   std::to_string(response_id) + ", token " +
                                   std::to_string(t));
    }

    if (ratio > 1.0 + cfg.eps_high) ++out.clipped_high;
    if (ratio < 1.0 - cfg.eps_low) ++out.clipped_low;
    out.loss += w * tl.value;

    // d loss / d logits(row) = coeff * (onehot(token) - probs)
    const double coeff = w * (tl.grad_ratio * ratio + tl.grad_logp_cur_kl);
    if (coeff == 0.0) continue;
    log_prob_grad(params, state, tokens[t], score);

    std::size_t slot = out.rows.size();
    for (std::size_t k = 0; k < out.rows.size(); ++k) {
      if (out.rows[k] == state.row) {
        slot = k;
        break;
      }
    }
    if (slot == out.rows.size()) {
      out.rows.push_back(state.row);
      out.row_grads.emplace_back(v, 0.0);
    }
    for (int j = 0; j < v; ++j) out.row_grads[slot][j] += coeff * score[j];
  }
  return out;
}

GradResult surrogate_gradient_impl(const PolicyParams& params, const RolloutBatch& batch,
                                   std::span<const int> response_ids,
                                   const ObjectiveConfig& cfg, int group_size,
                                   bool parallel) {
  if (batch.advantages.size() != batch.responses.size()) {
    throw std::domain_error("advantages not computed for this batch");
  }
  if (response_ids.empty()) throw std::domain_error("empty response selection");

  const int m = static_cast<int>(response_ids.size());
  const double seq_weight = 1.0 / static_cast<double>(m);
  std::size_t total_tokens = 0;
  for (int id : response_ids) total_tokens += batch.responses[id].size();
  const double token_weight = 1.0 / static_cast<double>(total_tokens);

  std::vector<ResponseGrad> parts(m);
  std::exception_ptr err;
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int k = 0; k < m; ++k) {
      try {
        const int id = response_ids[k];
        parts[k] = build_response_gradient(params, batch, id,
                                           batch.prompt_of(id, group_size), cfg,
                                           seq_weight, token_weight);
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
  } else {
    for (int k = 0; k < m; ++k) {
      const int id = response_ids[k];
      parts[k] = build_response_gradient(params, batch, id,
                                         batch.prompt_of(id, group_size), cfg, seq_weight,
                                         token_weight);
    }
  }
  if (err) std::rethrow_exception(err);

  GradResult out;
  out.grad.assign(params.theta.size(), 0.0);
  out.tokens = static_cast<long>(total_tokens);
  const int v = params.spec.vocab_size;
  for (int k = 0; k < m; ++k) {
    const ResponseGrad& part = parts[k];
    for (std::size_t slot = 0; slot < part.rows.size(); ++slot) {
      double* dst = out.grad.data() + static_cast<std::size_t>(part.rows[slot]) * v;
      const double* src = part.row_grads[slot].data();
      for (int j = 0; j < v; ++j) dst[j] += src[j];
    }
    out.loss += part.loss;
    out.clipped_high += part.clipped_high;
    out.clipped_low += part.clipped_low;
  }

  double norm_sq = 0.0;
  for (double g : out.grad) norm_sq += g * g;
  out.grad_norm = std::sqrt(norm_sq);
  return out;
}

// Group size is only needed to map responses to prompts; infer it from the
// batch layout.
int infer_group_size(const RolloutBatch& batch) {
  if (batch.prompts.empty() || batch.responses.empty()) {
    throw std::domain_error("empty rollout batch");
  }
  const std::size_t n = batch.responses.size();
  if (n % batch.prompts.size() != 0) throw std::domain_error("ragged rollout batch");
  return static_cast<int>(n / batch.prompts.size());
}

}  // namespace

GradResult surrogate_gradient(const PolicyParams& params, const RolloutBatch& batch,
                              std::span<const int> response_ids,
                              const ObjectiveConfig& cfg) {
  return surrogate_gradient_impl(params, batch, response_ids, cfg, infer_group_size(batch),
                                 true);
}

GradResult surrogate_gradient_serial(const PolicyParams& params, const RolloutBatch& batch,
                                     std::span<const int> response_ids,
                                     const ObjectiveConfig& cfg) {
  return surrogate_gradient_impl(params, batch, response_ids, cfg, infer_group_size(batch),
                                 false);
}

namespace {

std::vector<StateIndex> selection_states(const RolloutBatch& batch,
                                         std::span<const int> response_ids,
                                         const PolicySpec& spec, int group_size) {
  std::vector<StateIndex> states;
  for (int id : response_ids) {
    const auto resp_states =
        response_states(spec, batch.prompt_of(id, group_size), batch.responses[id]);
    states.insert(states.end(), resp_states.begin(), resp_states.end());
  }
  return states;
}

MetricsRecord make_record(const RolloutBatch& batch, std::span<const int> response_ids,
                          const PolicyParams& before, const PolicyParams& after,
                          const PolicyParams* ref, const ObjectiveConfig& cfg,
                          int group_size) {
  MetricsRecord rec;
  rec.mean_reward = batch_mean_reward(batch);
  rec.mean_length = batch_mean_length(batch);

  long high = 0, low = 0, tokens = 0;
  for (int id : response_ids) {
    const auto states =
        response_states(before.spec, batch.prompt_of(id, group_size), batch.responses[id]);
    for (std::size_t t = 0; t < states.size(); ++t) {
      const double ratio =
          std::exp(log_prob(before, states[t], batch.responses[id][t]) -
                   batch.old_logps[id][t]);
      if (ratio > 1.0 + cfg.eps_high) ++high;
      if (ratio < 1.0 - cfg.eps_low) ++low;
      ++tokens;
    }
  }
  rec.clip_frac_high = tokens > 0 ? static_cast<double>(high) / tokens : 0.0;
  rec.clip_frac_low = tokens > 0 ? static_cast<double>(low) / tokens : 0.0;

  const auto states = selection_states(batch, response_ids, after.spec, group_size);
  if (!states.empty()) {
    double h = 0.0;
    for (const StateIndex& s : states) h += entropy(after, s);
    rec.mean_entropy = h / static_cast<double>(states.size());
    rec.kl_prev = policy_kl(before, after, states);
    if (ref != nullptr) rec.kl_ref = policy_kl(after, *ref, states);
  }
  return rec;
}

}  // namespace

MetricsRecord compute_metrics(const RolloutBatch& batch, const PolicyParams& before,
                              const PolicyParams& after, const ObjectiveConfig& cfg) {
  std::vector<int> ids(batch.responses.size());
  std::iota(ids.begin(), ids.end(), 0);
  return make_record(batch, ids, before, after, nullptr, cfg, infer_group_size(batch));
}

int update_epoch(PolicyParams& params, const RolloutBatch& batch, const TrainConfig& cfg,
                 const PolicyParams& ref, int step, const RngStream& shuffle_rng,
                 std::vector<MetricsRecord>& records) {
  const int n = cfg.batch_responses();
  if (static_cast<int>(batch.responses.size()) != n) {
    throw std::domain_error("batch size does not match config");
  }
  const int chunks = n / cfg.minibatch_size;
  int substep = 0;

  for (int pass = 0; pass < cfg.iterations; ++pass) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (cfg.minibatch_size < n) {
      RngStream pass_rng = shuffle_rng.substream(static_cast<std::uint64_t>(pass));
      for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(pass_rng.next_below(static_cast<std::uint64_t>(i + 1)));
        std::swap(order[i], order[j]);
      }
    }

    for (int c = 0; c < chunks; ++c) {
      std::vector<int> ids(order.begin() + static_cast<std::ptrdiff_t>(c) * cfg.minibatch_size,
                           order.begin() + static_cast<std::ptrdiff_t>(c + 1) * cfg.minibatch_size);
      // Canonical accumulation order inside the mini-batch.
      std::sort(ids.begin(), ids.end());

      const PolicyParams before = params;
      const GradResult gr = surrogate_gradient(params, batch, ids, cfg.objective);
      for (std::size_t k = 0; k < params.theta.size(); ++k) {
        params.theta[k] -= cfg.learning_rate * gr.grad[k];
      }

      MetricsRecord rec =
          make_record(batch, ids, before, params, &ref, cfg.objective, cfg.group_size);
      rec.step = step;
      rec.substep = substep++;
      rec.grad_norm = gr.grad_norm;
      rec.clip_frac_high = gr.tokens > 0 ? static_cast<double>(gr.clipped_high) / gr.tokens : 0.0;
      rec.clip_frac_low = gr.tokens > 0 ? static_cast<double>(gr.clipped_low) / gr.tokens : 0.0;
      records.push_back(rec);
    }
  }
  return substep;
}

bool CollapseMonitor::observe(double mean_reward) {
  running_max_ = std::max(running_max_, mean_reward);
  if (mean_reward < 0.1 * running_max_) {
    ++below_count_;
  } else {
    below_count_ = 0;
  }
  return below_count_ >= 20;
}

TrainResult train(const TrainConfig& cfg) {
  cfg.validate();
  TrainResult result;
  result.params = zero_params(cfg.policy);
  const PolicyParams ref = result.params;  // reference = initial snapshot

  const RngStream root(cfg.seed);
  CollapseMonitor monitor;

  for (int step = 0; step < cfg.steps; ++step) {
    const RngStream step_rng = root.substream(0x726f6cull).substream(static_cast<std::uint64_t>(step));
    RolloutBatch batch = rollout(result.params, ref, cfg, step_rng);
    compute_advantages(batch, cfg.advantage_estimator, cfg.group_size);

    const RngStream shuffle_rng =
        root.substream(0x736866ull).substream(static_cast<std::uint64_t>(step));
    try {
      update_epoch(result.params, batch, cfg, ref, step, shuffle_rng, result.records);
    } catch (const RatioOverflowError&) {
      result.collapsed = true;
      result.collapse_reason = "ratio_overflow";
      result.collapse_step = step;
      result.steps_completed = step;
      break;
    }

    const double mean_reward = batch_mean_reward(batch);
    result.steps_completed = step + 1;
    result.final_reward = mean_reward;
    result.max_reward = std::max(result.max_reward, mean_reward);

    if (monitor.observe(mean_reward)) {
      result.collapsed = true;
      result.collapse_reason = "reward_collapse";
      result.collapse_step = step;
      break;
    }
  }

  return result;
}

}  // namespace cfpo
