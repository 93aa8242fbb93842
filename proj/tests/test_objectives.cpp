#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cfpo/errors.hpp"
#include "cfpo/objectives.hpp"
#include "cfpo/rng.hpp"

using namespace cfpo;

namespace {

// Independent two-branch oracle for the clipped surrogate: evaluate both
// branches explicitly and take the min.
double clip_oracle(double r, double a, double lo_eps, double hi_eps) {
  const double unclipped = r * a;
  const double clamped = std::min(std::max(r, 1.0 - lo_eps), 1.0 + hi_eps) * a;
  return std::min(unclipped, clamped);
}

// Central finite difference of f at x.
template <typename F>
double central_diff(F f, double x, double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

double rel_err(double got, double want) {
  const double scale = std::max({std::abs(got), std::abs(want), 1.0});
  return std::abs(got - want) / scale;
}

}  // namespace

TEST_CASE("clip surrogate frozen examples against the two-branch oracle") {
  CHECK(clip_surrogate(1.0, 2.0, 0.2, 0.2) == doctest::Approx(2.0));
  CHECK(clip_surrogate(1.5, 1.0, 0.2, 0.2) == doctest::Approx(1.2));
  // min(0.5 * -1, clamp(0.5, 0.8, 1.2) * -1) = min(-0.5, -0.8) = -0.8
  CHECK(clip_oracle(0.5, -1.0, 0.2, 0.2) == doctest::Approx(-0.8));
  CHECK(clip_surrogate(0.5, -1.0, 0.2, 0.2) == doctest::Approx(-0.8));

  RngStream rng(101);
  for (int i = 0; i < 2000; ++i) {
    const double r = 0.05 + rng.next_double() * 3.0;
    const double a = (rng.next_double() * 2.0 - 1.0) * 3.0;
    const double lo_eps = 0.05 + rng.next_double() * 0.5;
    const double hi_eps = 0.05 + rng.next_double() * 0.5;
    CHECK(clip_surrogate(r, a, lo_eps, hi_eps) ==
          doctest::Approx(clip_oracle(r, a, lo_eps, hi_eps)).epsilon(1e-12));
  }
}

TEST_CASE("clip surrogate equals r*A inside the trust region") {
  RngStream rng(5);
  for (int i = 0; i < 500; ++i) {
    const double eps = 0.05 + rng.next_double() * 0.9;
    const double r = 1.0 - eps + rng.next_double() * 2.0 * eps;
    const double a = (rng.next_double() * 2.0 - 1.0) * 5.0;
    CHECK(clip_surrogate(r, a, eps, eps) == r * a);
  }
}

TEST_CASE("clip gradient: flat branches are exactly zero, inner branch is A") {
  CHECK(clip_surrogate_grad_r(1.5, 1.0, 0.2, 0.2) == 0.0);
  CHECK(clip_surrogate_grad_r(1.0, 3.0, 0.2, 0.2) == 3.0);
  CHECK(clip_surrogate_grad_r(1.5, -1.0, 0.2, 0.2) == -1.0);
  // Kink convention: at the boundary exactly, the inner-branch slope A.
  CHECK(clip_surrogate_grad_r(1.2, 1.0, 0.2, 0.2) == 1.0);
  CHECK(clip_surrogate_grad_r(0.8, -1.0, 0.2, 0.2) == -1.0);

  RngStream rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double eps = 0.1 + rng.next_double() * 0.4;
    const double a = (rng.next_double() * 2.0 - 1.0) * 4.0;
    const double above = 1.0 + eps + 1e-4 + rng.next_double();
    const double below = std::max(1e-3, 1.0 - eps - 1e-4 - rng.next_double() * 0.5);
    if (a > 0.0) CHECK(clip_surrogate_grad_r(above, a, eps, eps) == 0.0);
    if (a < 0.0) CHECK(clip_surrogate_grad_r(below, a, eps, eps) == 0.0);
  }
}

TEST_CASE("clip gradient matches finite differences away from kinks") {
  RngStream rng(13);
  int checked = 0;
  while (checked < 1000) {
    const double eps_lo = 0.1 + rng.next_double() * 0.3;
    const double eps_hi = 0.1 + rng.next_double() * 0.3;
    const double r = 0.1 + rng.next_double() * 2.5;
    const double a = (rng.next_double() * 2.0 - 1.0) * 3.0;
    // Exclude kink neighborhoods; the derivative jumps there.
    if (std::abs(r - (1.0 - eps_lo)) < 1e-3 || std::abs(r - (1.0 + eps_hi)) < 1e-3) continue;
    if (std::abs(a) < 1e-3) continue;
    const double fd = central_diff(
        [&](double x) { return clip_surrogate(x, a, eps_lo, eps_hi); }, r);
    CHECK(rel_err(clip_surrogate_grad_r(r, a, eps_lo, eps_hi), fd) <= 1e-6);
    ++checked;
  }
}

TEST_CASE("cfpo surrogate frozen examples") {
  CHECK(cfpo_surrogate(1.0, 2.0, 0.2) == doctest::Approx(2.0));
  // 1.2 - (1/0.4) * 0.04 = 1.2 - 0.1
  CHECK(cfpo_surrogate(1.2, 1.0, 0.2) == doctest::Approx(1.1));
  CHECK(cfpo_surrogate(1.5, 0.0, 0.2) == 0.0);
}

TEST_CASE("cfpo gradient frozen examples and finite differences") {
  CHECK(cfpo_surrogate_grad_r(1.2, 1.0, 0.2) == doctest::Approx(0.0));
  CHECK(cfpo_surrogate_grad_r(1.0, -4.0, 0.2) == doctest::Approx(-4.0));
  // 1 - (1/0.2) * 0.5
  CHECK(cfpo_surrogate_grad_r(1.5, 1.0, 0.2) == doctest::Approx(-1.5));

  RngStream rng(19);
  for (int i = 0; i < 1000; ++i) {
    const double eps = 0.05 + rng.next_double() * 0.9;
    const double r = 0.1 + rng.next_double() * 2.5;
    const double a = (rng.next_double() * 2.0 - 1.0) * 3.0;
    const double fd = central_diff([&](double x) { return cfpo_surrogate(x, a, eps); }, r);
    CHECK(rel_err(cfpo_surrogate_grad_r(r, a, eps), fd) <= 1e-6);
  }
}

TEST_CASE("cfpo maximizer sits at 1 + sign(A) eps") {
  // Golden-section oracle, independent of the gradient formula.
  auto argmax = [](double a, double eps) {
    const double invphi = 0.6180339887498948482;
    double lo = 1e-9, hi = 3.0;
    double c = hi - invphi * (hi - lo), d = lo + invphi * (hi - lo);
    double fc = cfpo_surrogate(c, a, eps), fd = cfpo_surrogate(d, a, eps);
    while (hi - lo > 1e-10) {
      if (fc > fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - invphi * (hi - lo);
        fc = cfpo_surrogate(c, a, eps);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + invphi * (hi - lo);
        fd = cfpo_surrogate(d, a, eps);
      }
    }
    return 0.5 * (lo + hi);
  };

  RngStream rng(23);
  for (int i = 0; i < 300; ++i) {
    double a = (rng.next_double() * 2.0 - 1.0) * 2.0;
    if (std::abs(a) < 0.05) a = 0.05;
    const double eps = 0.01 + rng.next_double() * 0.99;
    CHECK(std::abs(argmax(a, eps) - (1.0 + (a > 0 ? eps : -eps))) <= 1e-6);
  }
}

TEST_CASE("cfpo restoring force and r=1 slope") {
  RngStream rng(29);
  for (int i = 0; i < 500; ++i) {
    const double eps = 0.05 + rng.next_double() * 0.5;
    const double a = 0.1 + rng.next_double() * 3.0;  // A > 0
    const double above = 1.0 + eps + 1e-6 + rng.next_double();
    const double below = std::max(1e-3, 1.0 + eps - 1e-6 - rng.next_double());
    CHECK(cfpo_surrogate_grad_r(above, a, eps) < 0.0);
    CHECK(cfpo_surrogate_grad_r(below, a, eps) > 0.0);
    // At r=1 both objectives share slope A, the on-policy equivalence basis.
    CHECK(cfpo_surrogate_grad_r(1.0, a, eps) == a);
    CHECK(clip_surrogate_grad_r(1.0, a, eps, eps) == a);
    CHECK(cfpo_surrogate_grad_r(1.0, -a, eps) == -a);
    CHECK(clip_surrogate_grad_r(1.0, -a, eps, eps) == -a);
  }
}

TEST_CASE("cfpo penalty symmetry and positive homogeneity in A") {
  RngStream rng(31);
  for (int i = 0; i < 500; ++i) {
    const double eps = 0.05 + rng.next_double() * 0.9;
    const double a = (rng.next_double() * 2.0 - 1.0) * 3.0;
    const double delta = rng.next_double() * 0.9;
    const double pen_up = (1.0 + delta) * a - cfpo_surrogate(1.0 + delta, a, eps);
    const double pen_dn = (1.0 - delta) * a - cfpo_surrogate(1.0 - delta, a, eps);
    CHECK(pen_up == doctest::Approx(pen_dn).epsilon(1e-12));

    const double c = 0.1 + rng.next_double() * 5.0;
    const double r = 0.1 + rng.next_double() * 2.5;
    CHECK(cfpo_surrogate(r, c * a, eps) ==
          doctest::Approx(c * cfpo_surrogate(r, a, eps)).epsilon(1e-12));
  }
}

TEST_CASE("kl penalty values from the closed form") {
  const auto [v0, g0] = kl_ref_penalty(-1.0, -1.0);
  CHECK(v0 == 0.0);
  CHECK(g0 == 0.0);

  // d = -1: e^-1 + 1 - 1 = e^-1
  const auto [v1, g1] = kl_ref_penalty(-1.0, -2.0);
  CHECK(v1 == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  // d = +1: e - 2
  const auto [v2, g2] = kl_ref_penalty(-2.0, -1.0);
  CHECK(v2 == doctest::Approx(std::exp(1.0) - 2.0).epsilon(1e-15));

  RngStream rng(37);
  for (int i = 0; i < 1000; ++i) {
    const double cur = -rng.next_double() * 6.0;
    const double ref = -rng.next_double() * 6.0;
    const auto [value, grad] = kl_ref_penalty(cur, ref);
    CHECK(value >= 0.0);
    const double fd = central_diff(
        [&](double x) { return kl_ref_penalty(x, ref).value; }, cur);
    CHECK(rel_err(grad, fd) <= 1e-6);
  }

  CHECK_THROWS_AS(kl_ref_penalty(-60.0, -1.0), RatioOverflowError);
}

TEST_CASE("token_loss composes surrogate and KL pieces") {
  ObjectiveConfig cfpo_cfg;
  cfpo_cfg.kind = ObjectiveKind::kCfpo;
  ObjectiveConfig clip_cfg;
  clip_cfg.kind = ObjectiveKind::kClip;

  // At r=1 both objectives reduce to -A.
  for (const auto& cfg : {cfpo_cfg, clip_cfg}) {
    const TokenLoss tl = token_loss({1.0, 1.0, -1.0, -1.0}, cfg);
    CHECK(tl.value == doctest::Approx(-1.0));
    CHECK(tl.grad_ratio == doctest::Approx(-1.0));
    CHECK(tl.grad_logp_cur_kl == 0.0);
  }

  const TokenLoss clipped = token_loss({1.5, 1.0, -1.0, -1.0}, clip_cfg);
  CHECK(clipped.value == doctest::Approx(-1.2));
  CHECK(clipped.grad_ratio == 0.0);

  const TokenLoss quad = token_loss({1.5, 1.0, -1.0, -1.0}, cfpo_cfg);
  CHECK(quad.value == doctest::Approx(-0.875));
  CHECK(quad.grad_ratio == doctest::Approx(1.5));

  // beta > 0 brings in the penalty; beta = 0 must not evaluate it at all.
  ObjectiveConfig with_kl = cfpo_cfg;
  with_kl.beta = 0.5;
  const TokenLoss kl_on = token_loss({1.0, 0.0, -1.0, -2.0}, with_kl);
  CHECK(kl_on.value == doctest::Approx(0.5 * std::exp(-1.0)));
  CHECK(kl_on.grad_logp_cur_kl == doctest::Approx(0.5 * (1.0 - std::exp(-1.0))));
  CHECK_NOTHROW(token_loss({1.0, 0.0, -100.0, -1.0}, cfpo_cfg));  // beta 0 skips KL
  CHECK_THROWS_AS(token_loss({1.0, 0.0, -100.0, -1.0}, with_kl), RatioOverflowError);

  CHECK_THROWS_AS(token_loss({-0.5, 1.0, -1.0, -1.0}, cfpo_cfg), std::domain_error);
  CHECK_THROWS_AS(clip_surrogate(0.0, 1.0, 0.2, 0.2), std::domain_error);
  CHECK_THROWS_AS(cfpo_surrogate(1.0, 1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(cfpo_surrogate(1.0, 1.0, -0.2), std::domain_error);
}

TEST_CASE("A=0 tokens contribute nothing under both objectives") {
  for (const ObjectiveKind kind : {ObjectiveKind::kClip, ObjectiveKind::kCfpo}) {
    ObjectiveConfig cfg;
    cfg.kind = kind;
    RngStream rng(41);
    for (int i = 0; i < 100; ++i) {
      const double r = 0.1 + rng.next_double() * 2.5;
      const TokenLoss tl = token_loss({r, 0.0, -1.0, -1.0}, cfg);
      CHECK(tl.value == 0.0);
      CHECK(tl.grad_ratio == 0.0);
    }
  }
}
