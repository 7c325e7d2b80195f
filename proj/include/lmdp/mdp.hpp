#pragma once

#include <vector>

#include "lmdp/types.hpp"

namespace lmdp {

/// Feature map phi : (state, action) -> R^d stored as a dense table with one
/// row per (state, action) pair, row index = state * n_actions + action.
struct FeatureMap {
  Index n_states = 0;
  Index n_actions = 0;
  Mat table;           // (n_states * n_actions) x d
  double bound = 1.0;  // B: every row has 2-norm <= bound

  Index dim() const { return table.cols(); }
  Index row_index(Index state, Index action) const { return state * n_actions + action; }

  /// Feature row of one (state, action) pair (an Eigen row expression).
  auto phi(Index state, Index action) const { return table.row(row_index(state, action)); }

  /// Feature block of all actions at one state, as an n_actions x d view.
  auto state_block(Index state) const {
    return table.middleRows(state * n_actions, n_actions);
  }

  /// Throws ModelError unless every row norm is within bound (+1e-9 slack)
  /// and all entries are finite.
  void validate() const;
};

/// Stochastic tabular policy: probs(x, a) = pi(a | x), rows sum to 1.
struct TabularPolicy {
  Mat probs;  // n_states x n_actions

  Index n_states() const { return probs.rows(); }
  Index n_actions() const { return probs.cols(); }

  static TabularPolicy uniform(Index n_states, Index n_actions);
  /// Deterministic policy from an action index per state.
  static TabularPolicy deterministic(const std::vector<Index>& actions, Index n_actions);

  /// Throws ModelError unless rows are probability vectors (within 1e-9).
  void validate() const;
};

/// Explicit finite MDP: per-action transition matrices, mean-reward table,
/// discount, reward range, and initial distribution.  This is the exact-
/// arithmetic substrate for all oracles.
struct TabularMdp {
  Index n_states = 0;
  Index n_actions = 0;
  double gamma = 0.0;
  double r_max = 1.0;
  Vec nu0;                  // initial state distribution
  Mat reward;               // n_states x n_actions mean rewards
  std::vector<Mat> kernel;  // kernel[a] row x = P(. | x, a)

  /// State-transition matrix of a fixed policy: P_pi(x' | x).
  Mat policy_kernel(const TabularPolicy& pi) const;
  /// Expected reward per state under a fixed policy.
  Vec policy_reward(const TabularPolicy& pi) const;

  /// Throws ModelError on any violated structural invariant (row sums,
  /// negative probabilities beyond tolerance, reward range, nu0, gamma).
  void validate() const;
};

/// Linear MDP in the factored form P(x'|x,a) = <phi(x,a), m(x')>,
/// r(x,a) = <phi(x,a), w>, over finite state/action sets.
struct LinearMdp {
  Index n_states = 0;
  Index n_actions = 0;
  double gamma = 0.0;
  double r_max = 1.0;
  Vec nu0;
  FeatureMap features;
  Mat m_factor;        // n_states x d, row x' = m(x')'
  Vec reward_weights;  // w
  double w_max = 0.0;  // reward weight norm bound; defaults to ||w|| on load

  Index dim() const { return features.dim(); }

  /// Exact next-state distribution <phi(x,a), m(.)>.  Entries within
  /// -1e-9 of zero are clamped and the row renormalized; larger violations
  /// throw ModelError.
  Vec transition_distribution(Index state, Index action) const;

  /// Mean reward <phi(x,a), w>; throws ModelError if outside [0, r_max]
  /// beyond 1e-9.
  double mean_reward(Index state, Index action) const;

  /// Materialize the explicit tabular form (exact, for oracles).
  TabularMdp to_tabular() const;
  /// Tabular form with rewards replaced by phi' w_alt (e.g. an adversary's
  /// weight vector for one episode).
  TabularMdp to_tabular(const Vec& w_alt) const;

  /// Structural validation of every invariant; throws ModelError.
  void validate() const;
};

/// Normalized discounted state(-action) occupancy of a policy:
/// total mass 1, mu(x, a) = nu(x) * pi(a|x).
struct OccupancyMeasure {
  Mat state_action;  // n_states x n_actions
  Vec state;         // row sums

  double total_mass() const { return state.sum(); }
};

}  // namespace lmdp
