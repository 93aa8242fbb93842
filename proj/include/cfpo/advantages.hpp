#ifndef CFPO_ADVANTAGES_HPP_
#define CFPO_ADVANTAGES_HPP_

#include <span>
#include <vector>

namespace cfpo {

// (R_i - mean) / std over the group, population std. A zero-variance group
// (all rewards identical) maps to all zeros: no learning signal, no epsilon
// smoothing. Requires group size >= 2.
std::vector<double> group_relative(std::span<const double> rewards);

// R_i minus the mean of the other K-1 rewards; sums to zero on every group.
// Requires K >= 2.
std::vector<double> leave_one_out(std::span<const double> rewards);

// Replicates adv[i] across lengths[i] token slots, response-major.
std::vector<double> broadcast_to_tokens(std::span<const double> adv,
                                        std::span<const int> lengths);

}  // namespace cfpo

#endif  // CFPO_ADVANTAGES_HPP_
