#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <vector>

#include "cfpo/policy.hpp"
#include "cfpo/rng.hpp"

using namespace cfpo;

namespace {

PolicySpec small_spec() {
  PolicySpec spec;
  spec.vocab_size = 4;
  spec.num_prompts = 2;
  spec.max_len = 8;
  return spec;
}

PolicyParams random_params(const PolicySpec& spec, RngStream& rng, double scale = 1.5) {
  PolicyParams p = zero_params(spec);
  for (double& t : p.theta) t = (rng.next_double() * 2.0 - 1.0) * scale;
  return p;
}

}  // namespace

TEST_CASE("state_index layout and injectivity") {
  const PolicySpec spec = small_spec();
  CHECK(state_index(spec, 1, 3, 0).row == 7);
  CHECK(state_index(spec, 0, 0, 5).row == 0);

  PolicySpec pos_spec = spec;
  pos_spec.feature_mode = FeatureMode::kPromptPrevPos;
  pos_spec.num_pos_buckets = 2;
  // (1*4+2)*2 + floor(5*2/8) = 12 + 1
  CHECK(state_index(pos_spec, 1, 2, 5).row == 13);

  // Enumerate every (prompt, prev, bucket) tuple; rows must be distinct and
  // in range.
  std::set<int> rows;
  std::map<int, std::tuple<int, int, int>> seen;
  for (int p = 0; p < pos_spec.num_prompts; ++p) {
    for (int prev = 0; prev < pos_spec.vocab_size; ++prev) {
      for (int pos = 0; pos < pos_spec.max_len; ++pos) {
        const StateIndex s = state_index(pos_spec, p, prev, pos);
        REQUIRE(s.row >= 0);
        REQUIRE(s.row < pos_spec.num_states());
        const auto key = std::tuple{p, prev, s.pos_bucket};
        if (seen.count(s.row)) {
          CHECK(seen[s.row] == key);  // same row only for the same tuple
        } else {
          seen[s.row] = key;
        }
        rows.insert(s.row);
      }
    }
  }
  CHECK(static_cast<int>(rows.size()) == pos_spec.num_states());

  CHECK_THROWS_AS(state_index(spec, 2, 0, 0), std::domain_error);
  CHECK_THROWS_AS(state_index(spec, 0, 4, 0), std::domain_error);
  CHECK_THROWS_AS(state_index(spec, 0, 0, 8), std::domain_error);
}

TEST_CASE("token_distribution: uniform, peaked, shift-invariant") {
  const PolicySpec spec = small_spec();
  PolicyParams params = zero_params(spec);
  const StateIndex s = state_index(spec, 0, 1, 0);

  const auto uniform = token_distribution(params, s);
  for (double p : uniform) CHECK(p == doctest::Approx(0.25).epsilon(1e-14));

  params.logit(s.row, 0) = 10.0;
  const auto peaked = token_distribution(params, s);
  const double expect = std::exp(10.0) / (std::exp(10.0) + 3.0);
  CHECK(peaked[0] == doctest::Approx(expect).epsilon(1e-12));
  CHECK(peaked[0] == doctest::Approx(0.99990).epsilon(1e-4));

  // Adding an exactly-representable constant leaves the distribution intact.
  PolicyParams shifted = params;
  for (int j = 0; j < spec.vocab_size; ++j) shifted.logit(s.row, j) += 7.0;
  const auto peaked2 = token_distribution(shifted, s);
  for (int j = 0; j < spec.vocab_size; ++j) CHECK(peaked2[j] == peaked[j]);

  double sum = 0.0;
  for (double p : peaked) sum += p;
  CHECK(std::abs(sum - 1.0) <= 1e-12);
}

TEST_CASE("log_prob agrees with the distribution and the closed form") {
  const PolicySpec spec = small_spec();
  PolicyParams params = zero_params(spec);
  const StateIndex s = state_index(spec, 1, 2, 0);

  CHECK(log_prob(params, s, 3) == doctest::Approx(std::log(0.25)).epsilon(1e-14));

  PolicySpec tiny;
  tiny.vocab_size = 2;
  tiny.num_prompts = 1;
  tiny.max_len = 1;
  PolicyParams two = zero_params(tiny);
  const StateIndex st = state_index(tiny, 0, 0, 0);
  two.logit(st.row, 0) = 1.0;
  // -log(1 + e^{-1})
  CHECK(log_prob(two, st, 0) == doctest::Approx(-std::log1p(std::exp(-1.0))).epsilon(1e-14));
  CHECK(log_prob(two, st, 0) == doctest::Approx(-0.313261687518).epsilon(1e-11));

  RngStream rng(61);
  for (int i = 0; i < 300; ++i) {
    const PolicyParams p = random_params(spec, rng, 3.0);
    const StateIndex state = state_index(spec, static_cast<int>(rng.next_below(2)),
                                         static_cast<int>(rng.next_below(4)), 0);
    const auto dist = token_distribution(p, state);
    for (int tok = 0; tok < spec.vocab_size; ++tok) {
      CHECK(log_prob(p, state, tok) ==
            doctest::Approx(std::log(dist[tok])).epsilon(1e-12));
      CHECK(log_prob(p, state, tok) <= 0.0);
    }
  }
}

TEST_CASE("log_prob_grad is onehot minus probs with zero row sum") {
  const PolicySpec spec = small_spec();
  PolicyParams params = zero_params(spec);
  const StateIndex s = state_index(spec, 0, 0, 0);
  std::vector<double> grad(spec.vocab_size);
  log_prob_grad(params, s, 2, grad);
  CHECK(grad[0] == doctest::Approx(-0.25));
  CHECK(grad[1] == doctest::Approx(-0.25));
  CHECK(grad[2] == doctest::Approx(0.75));
  CHECK(grad[3] == doctest::Approx(-0.25));

  RngStream rng(67);
  int coords = 0;
  for (int i = 0; i < 300; ++i) {
    PolicyParams p = random_params(spec, rng, 2.0);
    const StateIndex state = state_index(spec, static_cast<int>(rng.next_below(2)),
                                         static_cast<int>(rng.next_below(4)), 0);
    const int token = static_cast<int>(rng.next_below(4));
    log_prob_grad(p, state, token, grad);

    double row_sum = 0.0;
    for (double g : grad) row_sum += g;
    CHECK(std::abs(row_sum) <= 1e-12);

    // Finite-difference oracle over each logit of the state's row.
    const double h = 1e-5;
    for (int j = 0; j < spec.vocab_size; ++j) {
      const double saved = p.logit(state.row, j);
      p.logit(state.row, j) = saved + h;
      const double up = log_prob(p, state, token);
      p.logit(state.row, j) = saved - h;
      const double dn = log_prob(p, state, token);
      p.logit(state.row, j) = saved;
      const double fd = (up - dn) / (2.0 * h);
      const double scale = std::max({std::abs(fd), std::abs(grad[j]), 1.0});
      CHECK(std::abs(fd - grad[j]) / scale <= 1e-6);
      ++coords;
    }
  }
  CHECK(coords >= 1000);
}

TEST_CASE("sample_response: determinism, termination, logp bookkeeping") {
  const PolicySpec spec = small_spec();
  RngStream rng(71);
  const PolicyParams params = random_params(spec, rng);

  RngStream s1 = RngStream(99).substream(4);
  RngStream s2 = RngStream(99).substream(4);
  const Response a = sample_response(params, 1, s1);
  const Response b = sample_response(params, 1, s2);
  CHECK(a.tokens == b.tokens);
  CHECK(a.logps == b.logps);
  REQUIRE(!a.tokens.empty());
  CHECK(static_cast<int>(a.tokens.size()) <= spec.max_len);
  if (a.tokens.back() != 0) CHECK(static_cast<int>(a.tokens.size()) == spec.max_len);

  // Near-deterministic policy emits a constant sequence and never terminates.
  PolicyParams det = zero_params(spec);
  for (int row = 0; row < spec.num_states(); ++row) det.logit(row, 3) = 1e6;
  RngStream s3(5);
  const Response c = sample_response(det, 0, s3);
  CHECK(static_cast<int>(c.tokens.size()) == spec.max_len);
  for (int tok : c.tokens) CHECK(tok == 3);

  // Stored logps are the untempered log-probabilities of the chosen tokens.
  RngStream s4(6);
  const Response d = sample_response(params, 0, s4, 0.5);
  const auto states = response_states(spec, 0, d.tokens);
  for (std::size_t t = 0; t < d.tokens.size(); ++t) {
    CHECK(d.logps[t] == log_prob(params, states[t], d.tokens[t]));
  }
}

TEST_CASE("first-token distribution matches token_distribution") {
  // Chi-square against the exact categorical at the initial state, plus the
  // per-token 3-sigma screen; deterministic under the fixed seed.
  const PolicySpec spec = small_spec();
  const PolicyParams params = zero_params(spec);  // uniform
  const StateIndex s0 = state_index(spec, 0, 0, 0);
  const auto probs = token_distribution(params, s0);

  const int n = 100000;
  std::vector<int> counts(spec.vocab_size, 0);
  RngStream root(123);
  for (int i = 0; i < n; ++i) {
    RngStream draw = root.substream(i);
    const Response r = sample_response(params, 0, draw);
    ++counts[r.tokens[0]];
  }

  double chi2 = 0.0;
  for (int j = 0; j < spec.vocab_size; ++j) {
    const double expected = n * probs[j];
    chi2 += (counts[j] - expected) * (counts[j] - expected) / expected;
    const double sigma = std::sqrt(n * probs[j] * (1.0 - probs[j]));
    CHECK(std::abs(counts[j] - expected) <= 3.0 * sigma);
  }
  // df = 3, significance 1e-3 -> critical value 16.266
  CHECK(chi2 <= 16.266);
}

TEST_CASE("entropy: bounds and frozen values") {
  const PolicySpec spec = small_spec();
  PolicyParams params = zero_params(spec);
  const StateIndex s = state_index(spec, 0, 0, 0);
  CHECK(entropy(params, s) == doctest::Approx(std::log(4.0)).epsilon(1e-14));

  for (int row = 0; row < spec.num_states(); ++row) params.logit(row, 1) = 50.0;
  CHECK(entropy(params, s) == doctest::Approx(0.0).epsilon(1e-12));

  PolicySpec tiny;
  tiny.vocab_size = 2;
  tiny.num_prompts = 1;
  tiny.max_len = 1;
  PolicyParams two = zero_params(tiny);
  const StateIndex st = state_index(tiny, 0, 0, 0);
  two.logit(st.row, 0) = 1.0;
  const double p = 1.0 / (1.0 + std::exp(-1.0));
  const double want = -p * std::log(p) - (1 - p) * std::log(1 - p);
  CHECK(entropy(two, st) == doctest::Approx(want).epsilon(1e-14));
  CHECK(entropy(two, st) == doctest::Approx(0.582203).epsilon(1e-6));

  RngStream rng(73);
  for (int i = 0; i < 500; ++i) {
    const PolicyParams rp = random_params(spec, rng, 10.0);
    const double h = entropy(rp, s);
    CHECK(h >= 0.0);
    CHECK(h <= std::log(4.0) + 1e-12);
  }
}

TEST_CASE("policy_kl: zero on self, exact value, Pinsker bridge") {
  const PolicySpec spec = small_spec();
  RngStream rng(79);
  const PolicyParams a = random_params(spec, rng);
  const std::vector<StateIndex> states{state_index(spec, 0, 0, 0),
                                       state_index(spec, 1, 2, 0)};
  CHECK(policy_kl(a, a, states) == 0.0);

  // KL(uniform || softmax([10,10,0,0])) by direct summation.
  PolicyParams b = zero_params(spec);
  b.logit(states[0].row, 0) = 10.0;
  b.logit(states[0].row, 1) = 10.0;
  const PolicyParams u = zero_params(spec);
  const auto pb = token_distribution(b, states[0]);
  double want = 0.0;
  for (int j = 0; j < 4; ++j) want += 0.25 * std::log(0.25 / pb[j]);
  const std::vector<StateIndex> one{states[0]};
  CHECK(policy_kl(u, b, one) == doctest::Approx(want).epsilon(1e-12));

  for (int i = 0; i < 300; ++i) {
    const PolicyParams x = random_params(spec, rng, 2.0);
    const PolicyParams y = random_params(spec, rng, 2.0);
    const double kl = policy_kl(x, y, one);
    CHECK(kl >= 0.0);

    // TV <= sqrt(KL/2) bridges to the theory module's Pinsker check.
    const auto px = token_distribution(x, states[0]);
    const auto py = token_distribution(y, states[0]);
    double tv = 0.0;
    for (int j = 0; j < 4; ++j) tv += std::abs(px[j] - py[j]);
    tv *= 0.5;
    CHECK(tv <= std::sqrt(kl / 2.0) + 1e-12);
  }
}

TEST_CASE("ratio consistency between log_prob and distribution ratios") {
  const PolicySpec spec = small_spec();
  RngStream rng(83);
  for (int i = 0; i < 300; ++i) {
    const PolicyParams old_p = random_params(spec, rng, 2.0);
    const PolicyParams new_p = random_params(spec, rng, 2.0);
    const StateIndex s = state_index(spec, static_cast<int>(rng.next_below(2)),
                                     static_cast<int>(rng.next_below(4)), 0);
    const int tok = static_cast<int>(rng.next_below(4));
    const double from_logs = std::exp(log_prob(new_p, s, tok) - log_prob(old_p, s, tok));
    const double from_dists =
        token_distribution(new_p, s)[tok] / token_distribution(old_p, s)[tok];
    CHECK(from_logs == doctest::Approx(from_dists).epsilon(1e-12));
  }
}

TEST_CASE("checkpoint round-trips parameters exactly") {
  PolicySpec spec = small_spec();
  spec.feature_mode = FeatureMode::kPromptPrevPos;
  spec.num_pos_buckets = 2;
  RngStream rng(89);
  const PolicyParams params = random_params(spec, rng, 4.0);

  const auto path = std::filesystem::temp_directory_path() / "cfpo_test_checkpoint.csv";
  save_checkpoint(params, path);
  const PolicyParams loaded = load_checkpoint(path);
  CHECK(loaded.spec == params.spec);
  REQUIRE(loaded.theta.size() == params.theta.size());
  for (std::size_t i = 0; i < params.theta.size(); ++i) {
    CHECK(loaded.theta[i] == params.theta[i]);
  }
  std::filesystem::remove(path);
}
