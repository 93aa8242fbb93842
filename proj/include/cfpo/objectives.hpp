#ifndef CFPO_OBJECTIVES_HPP_
#define CFPO_OBJECTIVES_HPP_

#include <string>

namespace cfpo {

enum class ObjectiveKind { kClip, kCfpo };
enum class Aggregation { kPerSequenceMean, kTokenLevel };

std::string to_string(ObjectiveKind kind);
std::string to_string(Aggregation agg);
ObjectiveKind objective_kind_from_string(const std::string& s);
Aggregation aggregation_from_string(const std::string& s);

struct ObjectiveConfig {
  ObjectiveKind kind = ObjectiveKind::kClip;
  double eps = 0.2;       // trust-region width; the only width CFPO uses
  double eps_low = 0.2;   // asymmetric clip bounds; default symmetric = eps
  double eps_high = 0.2;
  double beta = 0.0;      // reference-KL coefficient
  Aggregation aggregation = Aggregation::kPerSequenceMean;

  // Throws std::domain_error on a bad field.
  void validate() const;
};

// One token's inputs to the surrogate loss. ratio = pi_cur / pi_old.
struct TokenSample {
  double ratio;
  double advantage;
  double logp_cur;
  double logp_ref;
};

struct KlPenalty {
  double value;          // >= 0, zero iff logp_cur == logp_ref
  double grad_logp_cur;  // exact d(value)/d(logp_cur)
};

struct TokenLoss {
  double value;             // -surrogate + beta * kl.value
  double grad_ratio;        // d(value)/d(ratio)
  double grad_logp_cur_kl;  // KL part of d(value)/d(logp_cur)
};

// min(r*A, clamp(r, 1-eps_low, 1+eps_high)*A). Equals r*A inside the band.
double clip_surrogate(double r, double adv, double eps_low, double eps_high);

// Derivative of clip_surrogate in r. Zero exactly on the flat branches
// (r > 1+eps_high with A > 0, r < 1-eps_low with A < 0); elsewhere A.
// At a clip boundary the inner-branch derivative A is returned.
double clip_surrogate_grad_r(double r, double adv, double eps_low, double eps_high);

// r*A - (|A| / 2 eps) * (r-1)^2. Concave in r for A != 0; its unique
// maximizer over r > 0 is 1 + sign(A) * eps.
double cfpo_surrogate(double r, double adv, double eps);

// A - (|A| / eps) * (r-1). Vanishes at r = 1 + sign(A) * eps.
double cfpo_surrogate_grad_r(double r, double adv, double eps);

// Nonnegative single-sample estimator of KL(pi_cur || pi_ref):
// exp(d) - d - 1 with d = logp_ref - logp_cur. Throws RatioOverflowError
// when d > 50.
KlPenalty kl_ref_penalty(double logp_cur, double logp_ref);

// Per-token loss summand: dispatches on cfg.kind, adds the beta-weighted
// reference-KL penalty. With beta == 0 the KL component is exactly zero
// and the penalty estimator is not evaluated.
TokenLoss token_loss(const TokenSample& sample, const ObjectiveConfig& cfg);

}  // namespace cfpo

#endif  // CFPO_OBJECTIVES_HPP_
