#include "cfpo/advantages.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cfpo {

namespace {

void require_group(std::span<const double> rewards) {
  if (rewards.size() < 2) {
    throw std::domain_error("reward group needs at least 2 entries");
  }
  for (double r : rewards) {
    if (!std::isfinite(r)) throw std::domain_error("reward group entry not finite");
  }
}

}  // namespace

std::vector<double> group_relative(std::span<const double> rewards) {
  require_group(rewards);
  const std::size_t n = rewards.size();

  // Exact-tie detection, so constant groups yield exact zeros even when
  // the mean would not round back to the common value.
  const bool all_equal =
      std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards[0]; });
  if (all_equal) return std::vector<double>(n, 0.0);

  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(n);

  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= static_cast<double>(n);
  const double sd = std::sqrt(var);
  if (sd == 0.0) return std::vector<double>(n, 0.0);

  std::vector<double> adv(n);
  for (std::size_t i = 0; i < n; ++i) adv[i] = (rewards[i] - mean) / sd;
  return adv;
}

std::vector<double> leave_one_out(std::span<const double> rewards) {
  require_group(rewards);
  const std::size_t k = rewards.size();

  // Identical rewards carry no signal; return exact zeros rather than
  // rounding residue from the running sum.
  const bool all_equal =
      std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards[0]; });
  if (all_equal) return std::vector<double>(k, 0.0);

  double total = 0.0;
  for (double r : rewards) total += r;

  // (K R_i - sum) / (K - 1) == R_i - mean(others)
  std::vector<double> adv(k);
  for (std::size_t i = 0; i < k; ++i) {
    adv[i] = (static_cast<double>(k) * rewards[i] - total) / static_cast<double>(k - 1);
  }
  return adv;
}

std::vector<double> broadcast_to_tokens(std::span<const double> adv,
                                        std::span<const int> lengths) {
  if (adv.size() != lengths.size()) {
    throw std::domain_error("advantage count does not match response count");
  }
  std::size_t total = 0;
  for (int len : lengths) {
    if (len < 1) throw std::domain_error("response length must be >= 1");
    total += static_cast<std::size_t>(len);
  }
  std::vector<double> out;
  out.reserve(total);
  for (std::size_t i = 0; i < adv.size(); ++i) {
    out.insert(out.end(), static_cast<std::size_t>(lengths[i]), adv[i]);
  }
  return out;
}

}  // namespace cfpo
