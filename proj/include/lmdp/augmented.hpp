#pragma once

#include <limits>
#include <vector>

#include "lmdp/mdp.hpp"
#include "lmdp/rng.hpp"

namespace lmdp {

class RngStream;

/// Sigmoid ascension probability sigma(alpha * bonus - omega).
double ascension_prob(double bonus, double alpha, double omega);

/// Table of ascension probabilities over real (state, action) pairs,
/// sigma(alpha * bonus(x,a) - omega) entrywise.
Mat ascension_table(const Mat& bonus, double alpha, double omega);

/// Indicator-rule alternative: p(x,a) = 1 if the optimistic backup
/// r(x,a) + bonus(x,a) + gamma * <P_hat_v-row> crosses r_max/(1-gamma).
/// Provided for benchmark construction only.
Mat indicator_ascension_table(const Mat& reward, const Mat& bonus, const Mat& next_value,
                              double gamma, double r_max);

/// Optimistically augmented MDP: one absorbing "heaven" state appended with
/// reward r_max for every action; from a real pair (x,a) the chain ascends
/// with probability p(x,a) and otherwise follows the base kernel; real mean
/// rewards become (1-p) r + p r_max.
struct AugmentedMdp {
  TabularMdp tab;    // n_states + 1 states; heaven = index n_states of the base
  Index heaven = 0;  // index of the absorbing state
};

/// Build the augmentation of a tabular base model from an ascension table
/// over real pairs (entries in [0,1]).
AugmentedMdp augment(const TabularMdp& base, const Mat& p_plus);

/// Convenience overload for linear models (materializes the tabular form).
AugmentedMdp augment(const LinearMdp& base, const Mat& p_plus);

/// Extend a policy over real states to the augmented state space; the action
/// choice at heaven is irrelevant (uniform by convention).
TabularPolicy extend_policy(const TabularPolicy& pi);

/// Extend a value vector over real states with the heaven value
/// r_max / (1 - gamma).
Vec extend_value(const Vec& v, double gamma, double r_max);

/// One trajectory of the base chain and its ascension coupling: both paths
/// share every base draw; at each transition the coupled path ascends with
/// probability p(x,a) and is absorbed from then on.  split_time is the index
/// of the first coupled state that differs from the base state (npos if the
/// paths never separate within the horizon).
struct CoupledRollout {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::vector<Index> base_states;     // length horizon + 1
  std::vector<Index> base_actions;    // length horizon
  std::vector<Index> coupled_states;  // length horizon + 1 (heaven = n_states)
  std::size_t split_time = npos;
};

CoupledRollout coupled_rollout(const TabularMdp& base, const Mat& p_plus,
                               const TabularPolicy& pi, std::size_t horizon, RngStream& rng);

}  // namespace lmdp
