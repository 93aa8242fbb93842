#include "cfpo/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cfpo/errors.hpp"

namespace cfpo {

namespace {

void require_finite_positive_ratio(double r) {
  if (!std::isfinite(r) || r <= 0.0) {
    throw std::domain_error("probability ratio must be finite and positive");
  }
}

void require_positive_eps(double eps, const char* name) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw std::domain_error(std::string(name) + " must be positive and finite");
  }
}

}  // namespace

std::string to_string(ObjectiveKind kind) {
  return kind == ObjectiveKind::kClip ? "clip" : "cfpo";
}

std::string to_string(Aggregation agg) {
  return agg == Aggregation::kPerSequenceMean ? "sequence_mean" : "token_level";
}

ObjectiveKind objective_kind_from_string(const std::string& s) {
  if (s == "clip") return ObjectiveKind::kClip;
  if (s == "cfpo") return ObjectiveKind::kCfpo;
  throw std::domain_error("unknown objective kind '" + s + "' (expected clip|cfpo)");
}

Aggregation aggregation_from_string(const std::string& s) {
  if (s == "sequence_mean") return Aggregation::kPerSequenceMean;
  if (s == "token_level") return Aggregation::kTokenLevel;
  throw std::domain_error("unknown aggregation '" + s +
                          "' (expected sequence_mean|token_level)");
}

void ObjectiveConfig::validate() const {
  require_positive_eps(eps, "eps");
  require_positive_eps(eps_low, "eps_low");
  require_positive_eps(eps_high, "eps_high");
  if (beta < 0.0 || !std::isfinite(beta)) {
    throw std::domain_error("beta must be nonnegative and finite");
  }
}

double clip_surrogate(double r, double adv, double eps_low, double eps_high) {
  require_finite_positive_ratio(r);
  require_positive_eps(eps_low, "eps_low");
  require_positive_eps(eps_high, "eps_high");
  const double clamped = std::clamp(r, 1.0 - eps_low, 1.0 + eps_high);
  return std::min(r * adv, clamped * adv);
}

double clip_surrogate_grad_r(double r, double adv, double eps_low, double eps_high) {
  require_finite_positive_ratio(r);
  require_positive_eps(eps_low, "eps_low");
  require_positive_eps(eps_high, "eps_high");
  // Flat branches, strict so that exactly-at-boundary keeps the inner slope.
  if (r > 1.0 + eps_high && adv > 0.0) return 0.0;
  if (r < 1.0 - eps_low && adv < 0.0) return 0.0;
  return adv;
}

double cfpo_surrogate(double r, double adv, double eps) {
  require_finite_positive_ratio(r);
  require_positive_eps(eps, "eps");
  const double dev = r - 1.0;
  return r * adv - std::abs(adv) / (2.0 * eps) * dev * dev;
}

double cfpo_surrogate_grad_r(double r, double adv, double eps) {
  require_finite_positive_ratio(r);
  require_positive_eps(eps, "eps");
  return adv - std::abs(adv) / eps * (r - 1.0);
}

KlPenalty kl_ref_penalty(double logp_cur, double logp_ref) {
  if (!std::isfinite(logp_cur) || !std::isfinite(logp_ref)) {
    throw std::domain_error("kl_ref_penalty requires finite log-probabilities");
  }
  const double d = logp_ref - logp_cur;
  if (d > 50.0) {
    throw RatioOverflowError(d, -1, -1,
                             "reference log-probability gap exceeds overflow guard");
  }
  const double e = std::exp(d);
  return {e - d - 1.0, 1.0 - e};
}

TokenLoss token_loss(const TokenSample& sample, const ObjectiveConfig& cfg) {
  double surrogate = 0.0;
  double surrogate_grad = 0.0;
  if (cfg.kind == ObjectiveKind::kClip) {
    surrogate = clip_surrogate(sample.ratio, sample.advantage, cfg.eps_low, cfg.eps_high);
    surrogate_grad =
        clip_surrogate_grad_r(sample.ratio, sample.advantage, cfg.eps_low, cfg.eps_high);
  } else {
    surrogate = cfpo_surrogate(sample.ratio, sample.advantage, cfg.eps);
    surrogate_grad = cfpo_surrogate_grad_r(sample.ratio, sample.advantage, cfg.eps);
  }

  TokenLoss out{-surrogate, -surrogate_grad, 0.0};
  if (cfg.beta != 0.0) {
    const KlPenalty kl = kl_ref_penalty(sample.logp_cur, sample.logp_ref);
    out.value += cfg.beta * kl.value;
    out.grad_logp_cur_kl = cfg.beta * kl.grad_logp_cur;
  }
  return out;
}

}  // namespace cfpo
