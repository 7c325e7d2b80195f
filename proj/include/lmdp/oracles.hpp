#pragma once

#include <optional>
#include <vector>

#include "lmdp/mdp.hpp"

namespace lmdp {

/// Exact value functions of a fixed policy.
struct PolicyValues {
  Vec v;  // n_states
  Mat q;  // n_states x n_actions
};

/// Exact optimal policy and value.
struct OptimalSolution {
  TabularPolicy policy;  // deterministic, lowest-index tie break
  Vec v;                 // exact value of that policy (linear solve, not VI iterate)
  Mat q;
};

/// Exact policy evaluation by direct linear solve of
/// (I - gamma P_pi) V = r_pi, with Q = r + gamma P V.
PolicyValues policy_evaluation(const TabularMdp& mdp, const TabularPolicy& pi);

/// Value iteration to sup-norm tolerance tol*(1-gamma) on the iterate gap,
/// followed by greedy extraction (strict lowest-index argmax) and an exact
/// evaluation of the greedy policy.
OptimalSolution optimal_policy(const TabularMdp& mdp, double tol = 1e-12);

/// Exact normalized discounted occupancy: solves the transposed flow system
/// (I - gamma P_pi') nu = (1 - gamma) nu0 and splits mass by pi.
OccupancyMeasure occupancy_measure(const TabularMdp& mdp, const TabularPolicy& pi);

/// Expected normalized discounted return <nu0, V^pi> (in [0, r_max]).
double return_of_policy(const TabularMdp& mdp, const TabularPolicy& pi);

/// Max-norm residual of the stationary flow identity
/// E' mu = gamma P' mu + (1 - gamma) nu0 for a claimed occupancy.
double flow_residual(const TabularMdp& mdp, const OccupancyMeasure& mu);

/// Per-episode optimality gaps <nu0, V*_k - V^{pi_k}_k> for a sequence of
/// reward weight vectors and played policies on a linear MDP.  If all weight
/// vectors coincide, the comparator is computed once by optimal_policy;
/// otherwise an explicit fixed comparator is required (throws ConfigError if
/// absent).  The cumulative sum of gaps is the regret curve.
std::vector<double> regret_curve(const LinearMdp& mdp, const std::vector<Vec>& reward_weights,
                                 const std::vector<TabularPolicy>& policies,
                                 const std::optional<TabularPolicy>& comparator = std::nullopt);

/// All |A|^|X| deterministic policies (guarded to small instances).
std::vector<TabularPolicy> enumerate_deterministic_policies(Index n_states, Index n_actions);

}  // namespace lmdp
