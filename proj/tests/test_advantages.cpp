#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cfpo/advantages.hpp"
#include "cfpo/rng.hpp"

using namespace cfpo;

namespace {

// High-precision normalization oracle in long double.
std::vector<double> group_relative_oracle(const std::vector<double>& rewards) {
  long double mean = 0.0L;
  for (double r : rewards) mean += r;
  mean /= rewards.size();
  long double var = 0.0L;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= rewards.size();
  const long double sd = std::sqrt(var);
  std::vector<double> out;
  for (double r : rewards) out.push_back(sd > 0 ? static_cast<double>((r - mean) / sd) : 0.0);
  return out;
}

std::vector<double> random_group(RngStream& rng) {
  std::vector<double> rewards(2 + rng.next_below(10));
  for (double& r : rewards) r = (rng.next_double() * 2.0 - 1.0) * 5.0;
  return rewards;
}

}  // namespace

TEST_CASE("group_relative frozen examples") {
  const auto a = group_relative(std::vector<double>{1, 0, 0});
  // mean 1/3, population std sqrt(2)/3
  CHECK(a[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  CHECK(a[1] == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-9));
  CHECK(a[2] == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-9));
  CHECK(a[0] == doctest::Approx(1.41421).epsilon(1e-5));
  CHECK(a[1] == doctest::Approx(-0.70711).epsilon(1e-5));

  CHECK(group_relative(std::vector<double>{5, 5, 5, 5}) ==
        std::vector<double>{0, 0, 0, 0});

  const auto b = group_relative(std::vector<double>{1, 0});
  CHECK(b[0] == doctest::Approx(1.0));
  CHECK(b[1] == doctest::Approx(-1.0));

  CHECK_THROWS_AS(group_relative(std::vector<double>{1}), std::domain_error);
}

TEST_CASE("group_relative matches the long-double oracle") {
  RngStream rng(51);
  for (int i = 0; i < 1000; ++i) {
    const auto rewards = random_group(rng);
    const auto got = group_relative(rewards);
    const auto want = group_relative_oracle(rewards);
    for (std::size_t k = 0; k < rewards.size(); ++k) {
      CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-10));
    }
  }
}

TEST_CASE("group_relative normalization invariants") {
  RngStream rng(53);
  for (int i = 0; i < 2000; ++i) {
    const auto rewards = random_group(rng);
    const auto adv = group_relative(rewards);
    double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / adv.size();
    CHECK(std::abs(mean) <= 1e-9);
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    var /= adv.size();
    CHECK(std::abs(std::sqrt(var) - 1.0) <= 1e-9);

    // Invariance: shift by any c, scale by any positive factor.
    const double shift = (rng.next_double() * 2.0 - 1.0) * 10.0;
    const double scale = 0.1 + rng.next_double() * 10.0;
    std::vector<double> transformed = rewards;
    for (double& r : transformed) r = r * scale + shift;
    const auto adv2 = group_relative(transformed);
    for (std::size_t k = 0; k < adv.size(); ++k) {
      CHECK(adv2[k] == doctest::Approx(adv[k]).epsilon(1e-8));
    }
  }
}

TEST_CASE("leave_one_out frozen examples") {
  CHECK(leave_one_out(std::vector<double>{1, 0}) == std::vector<double>{1, -1});
  CHECK(leave_one_out(std::vector<double>{3, 3, 3}) == std::vector<double>{0, 0, 0});
  // (3 R_i - 3) / 2
  const auto a = leave_one_out(std::vector<double>{2, 1, 0});
  CHECK(a[0] == doctest::Approx(1.5));
  CHECK(a[1] == doctest::Approx(0.0));
  CHECK(a[2] == doctest::Approx(-1.5));
  CHECK_THROWS_AS(leave_one_out(std::vector<double>{7}), std::domain_error);
}

TEST_CASE("leave_one_out equivariance and zero sum") {
  RngStream rng(57);
  for (int i = 0; i < 2000; ++i) {
    const auto rewards = random_group(rng);
    const auto adv = leave_one_out(rewards);

    double max_abs = 0.0;
    for (double r : rewards) max_abs = std::max(max_abs, std::abs(r));
    const double sum = std::accumulate(adv.begin(), adv.end(), 0.0);
    CHECK(std::abs(sum) <= 1e-9 * std::max(1.0, rewards.size() * max_abs));

    const double shift = (rng.next_double() * 2.0 - 1.0) * 10.0;
    std::vector<double> shifted = rewards;
    for (double& r : shifted) r += shift;
    const auto adv_shift = leave_one_out(shifted);
    const double scale = 0.1 + rng.next_double() * 10.0;
    std::vector<double> scaled = rewards;
    for (double& r : scaled) r *= scale;
    const auto adv_scale = leave_one_out(scaled);
    for (std::size_t k = 0; k < adv.size(); ++k) {
      CHECK(adv_shift[k] == doctest::Approx(adv[k]).epsilon(1e-9));
      CHECK(adv_scale[k] == doctest::Approx(scale * adv[k]).epsilon(1e-9));
    }
  }
}

TEST_CASE("both estimators are permutation-equivariant") {
  RngStream rng(59);
  for (int i = 0; i < 500; ++i) {
    const auto rewards = random_group(rng);
    std::vector<std::size_t> perm(rewards.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t k = perm.size(); k > 1; --k) {
      std::swap(perm[k - 1], perm[rng.next_below(k)]);
    }
    std::vector<double> permuted(rewards.size());
    for (std::size_t k = 0; k < perm.size(); ++k) permuted[k] = rewards[perm[k]];

    const auto gr = group_relative(rewards);
    const auto gr_p = group_relative(permuted);
    const auto loo = leave_one_out(rewards);
    const auto loo_p = leave_one_out(permuted);
    for (std::size_t k = 0; k < perm.size(); ++k) {
      CHECK(gr_p[k] == doctest::Approx(gr[perm[k]]).epsilon(1e-12));
      CHECK(loo_p[k] == doctest::Approx(loo[perm[k]]).epsilon(1e-12));
    }
  }
}

TEST_CASE("broadcast_to_tokens replication and contract checks") {
  const std::vector<double> adv{1, -1};
  const std::vector<int> lengths{2, 3};
  CHECK(broadcast_to_tokens(adv, lengths) == std::vector<double>{1, 1, -1, -1, -1});

  CHECK(broadcast_to_tokens(std::vector<double>{0.5, -0.5}, std::vector<int>{1, 1}) ==
        std::vector<double>{0.5, -0.5});

  CHECK_THROWS_AS(broadcast_to_tokens(std::vector<double>{0.0}, std::vector<int>{1, 1}),
                  std::domain_error);
  CHECK_THROWS_AS(broadcast_to_tokens(adv, std::vector<int>{2, 0}), std::domain_error);
}
