#ifndef CFPO_THEORY_HPP_
#define CFPO_THEORY_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfpo/rng.hpp"

namespace cfpo {

// Probability vector; entries >= 0 summing to 1 within 1e-12.
struct Simplex {
  std::vector<double> probs;

  void validate() const;
  std::size_t dim() const { return probs.size(); }
};

Simplex uniform_simplex(int dim);
// Symmetric Dirichlet(1) draw: uniform on the simplex.
Simplex random_simplex(int dim, RngStream& rng);

// (1/2) sum |p_i - q_i|, in [0, 1].
double tv_distance(const Simplex& p, const Simplex& q);

// sum p_i log(p_i / q_i) with 0 log 0 = 0. Returns +infinity when q puts
// zero mass where p does not.
double kl_divergence(const Simplex& p, const Simplex& q);

// Discounted MDP small enough for exact linear-algebra evaluation.
struct TinyMdp {
  int num_states = 1;
  int num_actions = 1;
  std::vector<double> transition;  // S x A x S, row-stochastic in the last axis
  std::vector<double> reward;      // S x A
  double gamma = 0.9;
  std::vector<double> initial;     // distribution over states

  double p(int s, int a, int s2) const {
    return transition[(s * num_actions + a) * num_states + s2];
  }
  double r(int s, int a) const { return reward[s * num_actions + a]; }
  void validate() const;
};

// Per-state action distributions.
using TabularPolicy = std::vector<Simplex>;

TabularPolicy uniform_policy(const TinyMdp& mdp);
TabularPolicy random_policy(const TinyMdp& mdp, RngStream& rng);

struct ExactEval {
  double eta = 0.0;                 // expected discounted return from `initial`
  std::vector<double> values;       // V(s)
  std::vector<double> advantages;   // S x A, Q - V
  std::vector<double> rho;          // (1-gamma)-normalized discounted visitation
};

// Solves the Bellman system directly; residual must stay below 1e-10.
ExactEval exact_eval(const TinyMdp& mdp, const TabularPolicy& policy);

// One check's outcome. `max_slack` is the worst observed violation margin
// (bound RHS minus LHS in the direction that would break the claim);
// negative values mean the claim held with room to spare.
struct CheckReport {
  std::string name;
  long trials = 0;
  long violations = 0;
  double max_slack = 0.0;
  double wall_time_ms = 0.0;
  bool inconclusive = false;
  std::string note;
};

// D_TV <= sqrt(D_KL / 2) on random simplex pairs plus deterministic
// near-corner stress cases.
CheckReport check_pinsker(long trials, int dim, std::uint64_t seed);

// Solution-space containment: every pair with KL <= delta_kl must satisfy
// TV <= delta_tv (default sqrt(delta_kl / 2)). Resamples near p so the run
// always tests at least one KL-feasible pair. When delta_tv is set below
// the Pinsker threshold the hypothesis fails; the report flags it and
// carries a counterexample found by line search.
CheckReport check_prop1(double delta_kl, long trials, int dim, std::uint64_t seed,
                        std::optional<double> delta_tv = std::nullopt);

// The quadratic-penalty surrogate attains its maximum at 1 + sign(A) eps
// (located by golden-section search), while the clipped surrogate is flat
// past the boundary. `inject_sign_bug` flips the penalty sign — a self-test
// fixture that must produce violations.
CheckReport check_eps_aligned(long trials, std::uint64_t seed,
                              bool inject_sign_bug = false);

// Performance-improvement lower bound on random policy pairs, checked in
// both the TV form and the ratio form; their right-hand sides agree
// analytically and the report notes any numerical discrepancy.
CheckReport check_improvement_bound(const TinyMdp& mdp, long trials, std::uint64_t seed);

// Grid search over per-state action simplices: the TV-constrained maximum
// of the TV-penalty bound dominates the KL-constrained maximum of the
// KL-penalty bound when delta_tv >= sqrt(delta_kl / 2).
CheckReport check_bound_ordering(const TinyMdp& mdp, double delta_kl, int grid,
                                 double delta_tv_factor = 1.0,
                                 const TabularPolicy* base = nullptr);

// Golden-section argmax of a unimodal function on [lo, hi] to ~1e-9.
double golden_section_argmax(double (*f)(double, double, double), double adv, double eps,
                             double lo, double hi);

struct CheckSuiteOptions {
  std::uint64_t seed = 2024;
  long pinsker_trials = 10000;   // per dimension, dims 2..8
  long prop1_trials = 10000;
  long eps_aligned_trials = 1000;
  long bound_trials = 1000;      // per MDP
  int ordering_grid = 64;
  bool inject_sign_bug = false;  // self-test fixture
};

// Full suite used by `cfpo check`: Pinsker, containment, eps-alignment,
// the improvement bound on three fixed tiny MDPs (gamma 0.5 / 0.9 / 0.99),
// and the bound ordering on a 1-state 3-action MDP.
std::vector<CheckReport> run_all_checks(const CheckSuiteOptions& opts);

}  // namespace cfpo

#endif  // CFPO_THEORY_HPP_
