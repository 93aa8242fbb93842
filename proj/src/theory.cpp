#include "cfpo/theory.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "cfpo/objectives.hpp"

namespace cfpo {

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

constexpr double kPinskerSlackTol = 1e-12;

}  // namespace

void Simplex::validate() const {
  if (probs.size() < 2) throw std::domain_error("simplex dimension must be >= 2");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::domain_error("simplex entries must be nonnegative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::domain_error("simplex entries must sum to 1 within 1e-12");
  }
}

Simplex uniform_simplex(int dim) {
  Simplex s;
  s.probs.assign(dim, 1.0 / dim);
  return s;
}

Simplex random_simplex(int dim, RngStream& rng) {
  Simplex s;
  s.probs.resize(dim);
  double sum = 0.0;
  for (double& p : s.probs) {
    p = rng.next_exponential();
    sum += p;
  }
  for (double& p : s.probs) p /= sum;
  return s;
}

double tv_distance(const Simplex& p, const Simplex& q) {
  if (p.dim() != q.dim()) throw std::domain_error("tv_distance dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i) sum += std::abs(p.probs[i] - q.probs[i]);
  return 0.5 * sum;
}

double kl_divergence(const Simplex& p, const Simplex& q) {
  if (p.dim() != q.dim()) throw std::domain_error("kl_divergence dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i) {
    if (p.probs[i] == 0.0) continue;
    if (q.probs[i] == 0.0) return std::numeric_limits<double>::infinity();
    sum += p.probs[i] * std::log(p.probs[i] / q.probs[i]);
  }
  return sum;
}

void TinyMdp::validate() const {
  if (num_states < 1 || num_states > 4) throw std::domain_error("num_states must be in [1, 4]");
  if (num_actions < 1 || num_actions > 4) {
    throw std::domain_error("num_actions must be in [1, 4]");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::domain_error("gamma must be in (0, 1)");
  const std::size_t sa = static_cast<std::size_t>(num_states) * num_actions;
  if (transition.size() != sa * num_states) throw std::domain_error("transition tensor size");
  if (reward.size() != sa) throw std::domain_error("reward tensor size");
  if (initial.size() != static_cast<std::size_t>(num_states)) {
    throw std::domain_error("initial distribution size");
  }
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      double row = 0.0;
      for (int s2 = 0; s2 < num_states; ++s2) {
        if (!(p(s, a, s2) >= 0.0)) throw std::domain_error("negative transition probability");
        row += p(s, a, s2);
      }
      if (std::abs(row - 1.0) > 1e-12) {
        throw std::domain_error("transition rows must be stochastic within 1e-12");
      }
    }
  }
  double init_sum = 0.0;
  for (double d : initial) {
    if (!(d >= 0.0)) throw std::domain_error("initial distribution entries must be >= 0");
    init_sum += d;
  }
  if (std::abs(init_sum - 1.0) > 1e-12) {
    throw std::domain_error("initial distribution must sum to 1");
  }
}

TabularPolicy uniform_policy(const TinyMdp& mdp) {
  return TabularPolicy(mdp.num_states, uniform_simplex(mdp.num_actions));
}

TabularPolicy random_policy(const TinyMdp& mdp, RngStream& rng) {
  TabularPolicy pi;
  pi.reserve(mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s) pi.push_back(random_simplex(mdp.num_actions, rng));
  return pi;
}

ExactEval exact_eval(const TinyMdp& mdp, const TabularPolicy& policy) {
  mdp.validate();
  if (static_cast<int>(policy.size()) != mdp.num_states) {
    throw std::domain_error("policy must have one simplex per state");
  }
  const int S = mdp.num_states;
  const int A = mdp.num_actions;

  Eigen::MatrixXd p_pi(S, S);
  Eigen::VectorXd r_pi(S);
  for (int s = 0; s < S; ++s) {
    if (static_cast<int>(policy[s].dim()) != A) {
      throw std::domain_error("policy simplex dimension must equal num_actions");
    }
    double r_mean = 0.0;
    for (int s2 = 0; s2 < S; ++s2) p_pi(s, s2) = 0.0;
    for (int a = 0; a < A; ++a) {
      const double w = policy[s].probs[a];
      r_mean += w * mdp.r(s, a);
      for (int s2 = 0; s2 < S; ++s2) p_pi(s, s2) += w * mdp.p(s, a, s2);
    }
    r_pi(s) = r_mean;
  }

  const Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(S, S) - mdp.gamma * p_pi;
  const Eigen::VectorXd v = sys.partialPivLu().solve(r_pi);
  if ((sys * v - r_pi).lpNorm<Eigen::Infinity>() > 1e-10) {
    throw std::runtime_error("Bellman solve residual exceeded 1e-10");
  }

  Eigen::VectorXd init(S);
  for (int s = 0; s < S; ++s) init(s) = mdp.initial[s];
  const Eigen::VectorXd occ = sys.transpose().partialPivLu().solve(init);
  if ((sys.transpose() * occ - init).lpNorm<Eigen::Infinity>() > 1e-10) {
    throw std::runtime_error("visitation solve residual exceeded 1e-10");
  }

  ExactEval out;
  out.values.assign(v.data(), v.data() + S);
  out.eta = init.dot(v);
  out.advantages.resize(static_cast<std::size_t>(S) * A);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      double q = mdp.r(s, a);
      for (int s2 = 0; s2 < S; ++s2) q += mdp.gamma * mdp.p(s, a, s2) * v(s2);
      out.advantages[s * A + a] = q - v(s);
    }
  }
  out.rho.resize(S);
  for (int s = 0; s < S; ++s) out.rho[s] = (1.0 - mdp.gamma) * occ(s);
  return out;
}

CheckReport check_pinsker(long trials, int dim, std::uint64_t seed) {
  if (trials < 1 || dim < 2) throw std::domain_error("check_pinsker needs trials >= 1, dim >= 2");
  const double t0 = now_ms();
  const RngStream root = RngStream(seed).substream(0x70696e73ull);

  long violations = 0;
  double max_slack = -std::numeric_limits<double>::infinity();
#pragma omp parallel for reduction(+ : violations) reduction(max : max_slack) schedule(static)
  for (long i = 0; i < trials; ++i) {
    RngStream trial = root.substream(static_cast<std::uint64_t>(i));
    RngStream sp = trial.substream(0);
    RngStream sq = trial.substream(1);
    const Simplex p = random_simplex(dim, sp);
    const Simplex q = random_simplex(dim, sq);
    const double slack = tv_distance(p, q) - std::sqrt(kl_divergence(p, q) / 2.0);
    max_slack = std::max(max_slack, slack);
    if (slack > kPinskerSlackTol) ++violations;
  }

  // Deterministic near-corner stress: one mass approaching 1.
  long extra = 0;
  for (double delta : {1e-3, 1e-6, 1e-9, 1e-12}) {
    Simplex corner;
    corner.probs.assign(dim, delta / (dim - 1));
    corner.probs[0] = 1.0 - delta;
    for (const Simplex& other : {uniform_simplex(dim), corner}) {
      const double slack = tv_distance(corner, other) -
                           std::sqrt(kl_divergence(corner, other) / 2.0);
      max_slack = std::max(max_slack, slack);
      if (slack > kPinskerSlackTol) ++violations;
      ++extra;
    }
  }

  CheckReport rep;
  rep.name = "pinsker";
  rep.trials = trials + extra;
  rep.violations = violations;
  rep.max_slack = max_slack;
  rep.wall_time_ms = now_ms() - t0;
  rep.note = "dim " + std::to_string(dim);
  return rep;
}

CheckReport check_prop1(double delta_kl, long trials, int dim, std::uint64_t seed,
                        std::optional<double> delta_tv) {
  if (!(delta_kl > 0.0)) throw std::domain_error("delta_kl must be positive");
  if (trials < 1 || dim < 2) throw std::domain_error("check_prop1 needs trials >= 1, dim >= 2");
  const double t0 = now_ms();
  const double threshold = delta_tv.value_or(std::sqrt(delta_kl / 2.0));
  const bool hypothesis_ok = threshold >= std::sqrt(delta_kl / 2.0) - 1e-15;

  CheckReport rep;
  rep.name = "prop1_containment";

  if (!hypothesis_ok) {
    // The containment claim needs delta_tv >= sqrt(delta_kl / 2); below that
    // a counterexample exists. Exhibit one on the symmetric two-point family
    // p = (1/2, 1/2), q = (1/2 + x, 1/2 - x): KL(p||q) = -log(1 - 4x^2) / 2,
    // TV = x. Bisect for KL(x) = delta_kl.
    double lo = 0.0, hi = 0.499999999;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double kl = -0.5 * std::log(1.0 - 4.0 * mid * mid);
      (kl < delta_kl ? lo : hi) = mid;
    }
    const double x = lo;
    const double kl_at_x = -0.5 * std::log(1.0 - 4.0 * x * x);
    char buf[256];
    if (x > threshold) {
      std::snprintf(buf, sizeof(buf),
                    "hypothesis delta_tv >= sqrt(delta_kl/2) violated: counterexample "
                    "TV=%.9g > delta_tv=%.9g with KL=%.9g <= delta_kl=%.9g",
                    x, threshold, kl_at_x, delta_kl);
    } else {
      std::snprintf(buf, sizeof(buf),
                    "hypothesis delta_tv >= sqrt(delta_kl/2) violated; no counterexample "
                    "found on the two-point family");
    }
    rep.note = buf;
    rep.inconclusive = true;
    rep.wall_time_ms = now_ms() - t0;
    return rep;
  }

  const RngStream root = RngStream(seed).substream(0x70726f70ull);
  long violations = 0;
  long feasible = 0;
  double max_slack = -std::numeric_limits<double>::infinity();
#pragma omp parallel for reduction(+ : violations, feasible) reduction(max : max_slack) \
    schedule(static)
  for (long i = 0; i < trials; ++i) {
    RngStream trial = root.substream(static_cast<std::uint64_t>(i));
    RngStream sp = trial.substream(0);
    RngStream sq = trial.substream(1);
    const Simplex p = random_simplex(dim, sp);
    Simplex q;
    if (i % 2 == 0) {
      q = random_simplex(dim, sq);
    } else {
      // Resample near p so KL-feasible pairs are guaranteed to appear.
      const Simplex noise = random_simplex(dim, sq);
      const double u = sq.next_double();
      const double lambda = 0.2 * u * u;
      q.probs.resize(dim);
      for (int j = 0; j < dim; ++j) {
        q.probs[j] = (1.0 - lambda) * p.probs[j] + lambda * noise.probs[j];
      }
    }
    const double kl = kl_divergence(p, q);
    if (kl <= delta_kl) {
      ++feasible;
      const double slack = tv_distance(p, q) - threshold;
      max_slack = std::max(max_slack, slack);
      if (slack > kPinskerSlackTol) ++violations;
    }
  }

  rep.trials = trials;
  rep.violations = violations;
  rep.max_slack = max_slack;
  rep.inconclusive = feasible == 0;
  rep.note = "feasible pairs " + std::to_string(feasible) + ", delta_kl " +
             std::to_string(delta_kl);
  rep.wall_time_ms = now_ms() - t0;
  return rep;
}

namespace {

double sign_bugged_surrogate(double r, double adv, double eps) {
  // Self-test fixture: quadratic penalty applied with the wrong sign.
  const double dev = r - 1.0;
  return r * adv + std::abs(adv) / (2.0 * eps) * dev * dev;
}

}  // namespace

double golden_section_argmax(double (*f)(double, double, double), double adv, double eps,
                             double lo, double hi) {
  const double invphi = 0.6180339887498948482;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c, adv, eps);
  double fd = f(d, adv, eps);
  while (b - a > 1e-10) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c, adv, eps);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d, adv, eps);
    }
  }
  return 0.5 * (a + b);
}

CheckReport check_eps_aligned(long trials, std::uint64_t seed, bool inject_sign_bug) {
  if (trials < 1) throw std::domain_error("check_eps_aligned needs trials >= 1");
  const double t0 = now_ms();
  const RngStream root = RngStream(seed).substream(0x616c69676eull);
  double (*surrogate)(double, double, double) =
      inject_sign_bug ? &sign_bugged_surrogate : &cfpo_surrogate;

  long violations = 0;
  double max_slack = -std::numeric_limits<double>::infinity();
#pragma omp parallel for reduction(+ : violations) reduction(max : max_slack) schedule(static)
  for (long i = 0; i < trials; ++i) {
    RngStream trial = root.substream(static_cast<std::uint64_t>(i));
    // A away from zero so the maximizer is unique; eps in (0, 1].
    double adv = (trial.next_double() * 2.0 - 1.0) * 2.0;
    if (std::abs(adv) < 0.05) adv = adv < 0.0 ? -0.05 : 0.05;
    const double eps = 1e-3 + trial.next_double() * (1.0 - 1e-3);

    const double found = golden_section_argmax(surrogate, adv, eps, 1e-9, 3.0);
    const double expected = 1.0 + (adv > 0.0 ? eps : -eps);
    const double err = std::abs(found - expected);
    max_slack = std::max(max_slack, err - 1e-6);
    if (err > 1e-6) ++violations;

    // The clipped objective is flat past the boundary for A > 0: equal
    // values at 1 + eps and 1 + 2 eps, so its maximizer is not unique.
    const double a_pos = std::abs(adv);
    if (clip_surrogate(1.0 + eps, a_pos, eps, eps) !=
        clip_surrogate(1.0 + 2.0 * eps, a_pos, eps, eps)) {
      ++violations;
    }
  }

  CheckReport rep;
  rep.name = "eps_aligned";
  rep.trials = trials;
  rep.violations = violations;
  rep.max_slack = max_slack;
  rep.wall_time_ms = now_ms() - t0;
  if (inject_sign_bug) rep.note = "sign-bug fixture active";
  return rep;
}

namespace {

struct BoundSides {
  double lhs = 0.0;
  double rhs_tv = 0.0;
  double rhs_ratio = 0.0;
};

BoundSides improvement_bound_sides(const TinyMdp& mdp, const TabularPolicy& pi,
                                   const TabularPolicy& pi_new, const ExactEval& eval,
                                   const ExactEval& eval_new) {
  const int S = mdp.num_states;
  const int A = mdp.num_actions;
  const double gamma = mdp.gamma;

  double xi = 0.0;
  for (int s = 0; s < S; ++s) {
    double ea = 0.0;
    for (int a = 0; a < A; ++a) ea += pi_new[s].probs[a] * eval.advantages[s * A + a];
    xi = std::max(xi, std::abs(ea));
  }

  double adv_term = 0.0;
  double tv_term = 0.0;
  double ratio_adv_term = 0.0;
  double ratio_dev_term = 0.0;
  for (int s = 0; s < S; ++s) {
    const double w = eval.rho[s];
    double ea = 0.0;
    double dev = 0.0;
    for (int a = 0; a < A; ++a) {
      const double adv = eval.advantages[s * A + a];
      ea += pi_new[s].probs[a] * adv;
      const double p_old = pi[s].probs[a];
      if (p_old > 0.0) {
        const double ratio = pi_new[s].probs[a] / p_old;
        ratio_adv_term += w * p_old * ratio * adv;
        dev += p_old * std::abs(ratio - 1.0);
      }
    }
    adv_term += w * ea;
    tv_term += w * tv_distance(pi[s], pi_new[s]);
    ratio_dev_term += w * dev;
  }

  BoundSides sides;
  sides.lhs = eval_new.eta - eval.eta;
  const double c1 = 1.0 / (1.0 - gamma);
  sides.rhs_tv = c1 * adv_term - 2.0 * xi * gamma / ((1.0 - gamma) * (1.0 - gamma)) * tv_term;
  sides.rhs_ratio = c1 * ratio_adv_term -
                    xi * gamma / ((1.0 - gamma) * (1.0 - gamma)) * ratio_dev_term;
  return sides;
}

}  // namespace

CheckReport check_improvement_bound(const TinyMdp& mdp, long trials, std::uint64_t seed) {
  mdp.validate();
  if (trials < 1) throw std::domain_error("check_improvement_bound needs trials >= 1");
  const double t0 = now_ms();
  const RngStream root = RngStream(seed).substream(0x626f756e64ull);

  long violations = 0;
  double max_slack = -std::numeric_limits<double>::infinity();
  double max_form_gap = 0.0;
#pragma omp parallel for reduction(+ : violations) reduction(max : max_slack, max_form_gap) \
    schedule(static)
  for (long i = 0; i < trials; ++i) {
    RngStream trial = root.substream(static_cast<std::uint64_t>(i));
    RngStream sa = trial.substream(0);
    RngStream sb = trial.substream(1);
    const TabularPolicy pi = random_policy(mdp, sa);
    TabularPolicy pi_new;
    if (i % 2 == 0) {
      pi_new = random_policy(mdp, sb);
    } else {
      // Near-pi pairs stress the bound where it is tightest.
      pi_new = pi;
      const TabularPolicy noise = random_policy(mdp, sb);
      const double u = sb.next_double();
      const double lambda = 0.3 * u * u;
      for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
          pi_new[s].probs[a] = (1.0 - lambda) * pi[s].probs[a] + lambda * noise[s].probs[a];
        }
      }
    }

    const ExactEval eval = exact_eval(mdp, pi);
    const ExactEval eval_new = exact_eval(mdp, pi_new);
    const BoundSides sides = improvement_bound_sides(mdp, pi, pi_new, eval, eval_new);

    const double slack = std::max(sides.rhs_tv, sides.rhs_ratio) - sides.lhs;
    max_slack = std::max(max_slack, slack);
    if (slack > 1e-9) ++violations;
    max_form_gap = std::max(max_form_gap, std::abs(sides.rhs_tv - sides.rhs_ratio));
  }

  CheckReport rep;
  rep.name = "improvement_bound";
  rep.trials = trials;
  rep.violations = violations;
  rep.max_slack = max_slack;
  rep.wall_time_ms = now_ms() - t0;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "gamma %.3g, max |rhs_tv - rhs_ratio| = %.3g", mdp.gamma,
                max_form_gap);
  rep.note = buf;
  return rep;
}

namespace {

// Barycentric lattice: all compositions of `grid` into dim nonnegative parts,
// scaled by 1/grid. Deterministic enumeration order.
std::vector<Simplex> simplex_lattice(int dim, int grid) {
  std::vector<Simplex> points;
  std::vector<int> parts(dim, 0);
  // Odometer over the first dim-1 coordinates; the last takes the remainder.
  std::vector<int> idx(dim - 1, 0);
  while (true) {
    int used = 0;
    for (int v : idx) used += v;
    if (used <= grid) {
      Simplex s;
      s.probs.resize(dim);
      for (int j = 0; j < dim - 1; ++j) s.probs[j] = static_cast<double>(idx[j]) / grid;
      s.probs[dim - 1] = static_cast<double>(grid - used) / grid;
      points.push_back(std::move(s));
    }
    int j = 0;
    while (j < dim - 1) {
      if (++idx[j] <= grid) break;
      idx[j] = 0;
      ++j;
    }
    if (j == dim - 1) break;
  }
  return points;
}

}  // namespace

CheckReport check_bound_ordering(const TinyMdp& mdp, double delta_kl, int grid,
                                 double delta_tv_factor, const TabularPolicy* base_in) {
  mdp.validate();
  if (!(delta_kl > 0.0)) throw std::domain_error("delta_kl must be positive");
  if (grid < 50) throw std::domain_error("grid resolution must be >= 50");
  if (mdp.num_states * mdp.num_actions > 8) {
    throw std::domain_error("bound ordering grid search requires S*A <= 8");
  }
  const double t0 = now_ms();

  TabularPolicy base;
  if (base_in != nullptr) {
    base = *base_in;
  } else {
    // Fixed interior base policy, weights proportional to action index + 1.
    for (int s = 0; s < mdp.num_states; ++s) {
      Simplex row;
      row.probs.resize(mdp.num_actions);
      const double denom = mdp.num_actions * (mdp.num_actions + 1) / 2.0;
      for (int a = 0; a < mdp.num_actions; ++a) row.probs[a] = (a + 1) / denom;
      base.push_back(std::move(row));
    }
  }

  const ExactEval eval = exact_eval(mdp, base);
  const double delta_tv = delta_tv_factor * std::sqrt(delta_kl / 2.0);
  const int S = mdp.num_states;
  const int A = mdp.num_actions;
  const double gamma = mdp.gamma;
  const double penalty_coef = 2.0 * gamma / ((1.0 - gamma) * (1.0 - gamma));

  const std::vector<Simplex> lattice = simplex_lattice(A, grid);
  double combos = 1.0;
  for (int s = 0; s < S; ++s) combos *= static_cast<double>(lattice.size());
  if (combos > 2e7) throw std::domain_error("grid too large for exhaustive search");

  double best_tv = -std::numeric_limits<double>::infinity();
  double best_kl = -std::numeric_limits<double>::infinity();
  long tv_feasible = 0;
  long kl_feasible = 0;

  std::vector<std::size_t> pick(S, 0);
  while (true) {
    double first_term = 0.0;
    double tv_pen = 0.0;
    double kl_pen = 0.0;
    double xi = 0.0;
    bool tv_ok = true;
    bool kl_ok = true;
    for (int s = 0; s < S; ++s) {
      const Simplex& cand = lattice[pick[s]];
      double ea = 0.0;
      for (int a = 0; a < A; ++a) ea += cand.probs[a] * eval.advantages[s * A + a];
      xi = std::max(xi, std::abs(ea));
      first_term += eval.rho[s] * ea;
      const double tv = tv_distance(base[s], cand);
      const double kl = kl_divergence(base[s], cand);
      if (tv > delta_tv + 1e-15) tv_ok = false;
      if (!(kl <= delta_kl + 1e-15)) kl_ok = false;
      tv_pen += eval.rho[s] * tv;
      kl_pen += eval.rho[s] * (std::isinf(kl) ? 1e18 : std::sqrt(kl / 2.0));
    }
    const double first = first_term / (1.0 - gamma);
    if (tv_ok) {
      ++tv_feasible;
      best_tv = std::max(best_tv, first - penalty_coef * xi * tv_pen);
    }
    if (kl_ok) {
      ++kl_feasible;
      best_kl = std::max(best_kl, first - penalty_coef * xi * kl_pen);
    }

    int s = 0;
    while (s < S) {
      if (++pick[s] < lattice.size()) break;
      pick[s] = 0;
      ++s;
    }
    if (s == S) break;
  }

  CheckReport rep;
  rep.name = "bound_ordering";
  rep.trials = static_cast<long>(combos);
  if (kl_feasible == 0) {
    rep.inconclusive = true;
    rep.note = "no KL-feasible grid point; grid too coarse";
  } else {
    const double slack = best_kl - best_tv;  // violation when positive
    rep.max_slack = slack;
    if (slack > 1e-6) rep.violations = 1;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "max L_TV %.9g over %ld points, max L_KL %.9g over %ld points, delta_tv %.4g",
                  best_tv, tv_feasible, best_kl, kl_feasible, delta_tv);
    rep.note = buf;
  }
  rep.wall_time_ms = now_ms() - t0;
  return rep;
}

namespace {

TinyMdp fixed_mdp_a() {
  // Two-state chain: action 0 stays, action 1 switches.
  TinyMdp m;
  m.num_states = 2;
  m.num_actions = 2;
  m.gamma = 0.5;
  m.transition = {
      // s=0: a=0 stay, a=1 switch
      1, 0, 0, 1,
      // s=1
      0, 1, 1, 0,
  };
  m.reward = {0.0, 0.2, 1.0, 0.5};
  m.initial = {1.0, 0.0};
  return m;
}

TinyMdp fixed_mdp_b() {
  // Three-state drift with noisy transitions.
  TinyMdp m;
  m.num_states = 3;
  m.num_actions = 2;
  m.gamma = 0.9;
  m.transition = {
      // s=0
      0.8, 0.2, 0.0, 0.1, 0.7, 0.2,
      // s=1
      0.3, 0.6, 0.1, 0.0, 0.2, 0.8,
      // s=2
      0.1, 0.1, 0.8, 0.5, 0.3, 0.2,
  };
  m.reward = {0.0, -0.1, 0.3, 0.1, 1.0, 0.4};
  m.initial = {0.5, 0.3, 0.2};
  return m;
}

TinyMdp fixed_mdp_c() {
  // Two states, three actions, long horizon.
  TinyMdp m;
  m.num_states = 2;
  m.num_actions = 3;
  m.gamma = 0.99;
  m.transition = {
      // s=0
      1.0, 0.0, 0.6, 0.4, 0.2, 0.8,
      // s=1
      0.3, 0.7, 0.9, 0.1, 0.0, 1.0,
  };
  m.reward = {0.1, 0.0, -0.2, 0.8, 0.2, 0.5};
  m.initial = {0.7, 0.3};
  return m;
}

TinyMdp bandit_mdp() {
  // One state, three actions; the ordering check's default domain.
  TinyMdp m;
  m.num_states = 1;
  m.num_actions = 3;
  m.gamma = 0.9;
  m.transition = {1.0, 1.0, 1.0};
  m.reward = {1.0, 0.2, -0.4};
  m.initial = {1.0};
  return m;
}

}  // namespace

std::vector<CheckReport> run_all_checks(const CheckSuiteOptions& opts) {
  std::vector<CheckReport> reports;

  long pinsker_trials = 0;
  long pinsker_violations = 0;
  double pinsker_slack = -std::numeric_limits<double>::infinity();
  double pinsker_ms = 0.0;
  for (int dim = 2; dim <= 8; ++dim) {
    const CheckReport r = check_pinsker(opts.pinsker_trials, dim, opts.seed + dim);
    pinsker_trials += r.trials;
    pinsker_violations += r.violations;
    pinsker_slack = std::max(pinsker_slack, r.max_slack);
    pinsker_ms += r.wall_time_ms;
  }
  CheckReport pinsker;
  pinsker.name = "pinsker";
  pinsker.trials = pinsker_trials;
  pinsker.violations = pinsker_violations;
  pinsker.max_slack = pinsker_slack;
  pinsker.wall_time_ms = pinsker_ms;
  pinsker.note = "dims 2-8";
  reports.push_back(pinsker);

  reports.push_back(check_prop1(0.02, opts.prop1_trials, 4, opts.seed));
  reports.push_back(check_eps_aligned(opts.eps_aligned_trials, opts.seed,
                                      opts.inject_sign_bug));

  const TinyMdp mdps[] = {fixed_mdp_a(), fixed_mdp_b(), fixed_mdp_c()};
  for (const TinyMdp& mdp : mdps) {
    CheckReport r = check_improvement_bound(mdp, opts.bound_trials, opts.seed);
    char suffix[32];
    std::snprintf(suffix, sizeof(suffix), "_gamma%.2f", mdp.gamma);
    r.name += suffix;
    reports.push_back(std::move(r));
  }

  reports.push_back(check_bound_ordering(bandit_mdp(), 0.02, opts.ordering_grid));
  return reports;
}

}  // namespace cfpo
