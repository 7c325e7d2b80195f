#include "lmdp/oracles.hpp"

#include <cmath>

namespace lmdp {

PolicyValues policy_evaluation(const TabularMdp& mdp, const TabularPolicy& pi) {
  const Mat p_pi = mdp.policy_kernel(pi);
  const Vec r_pi = mdp.policy_reward(pi);
  const Mat system = Mat::Identity(mdp.n_states, mdp.n_states) - mdp.gamma * p_pi;
  PolicyValues out;
  out.v = system.partialPivLu().solve(r_pi);
  out.q = mdp.reward;
  for (Index a = 0; a < mdp.n_actions; ++a)
    out.q.col(a) += mdp.gamma * (mdp.kernel[a] * out.v);
  return out;
}

OptimalSolution optimal_policy(const TabularMdp& mdp, double tol) {
  // Value iteration to a small iterate gap, then greedy extraction with a
  // strict lowest-index argmax and one exact evaluation of that policy.
  Vec v = Vec::Zero(mdp.n_states);
  const double stop = tol * (1.0 - mdp.gamma);
  for (long iter = 0; iter < 1000000; ++iter) {
    Mat q = mdp.reward;
    for (Index a = 0; a < mdp.n_actions; ++a) q.col(a) += mdp.gamma * (mdp.kernel[a] * v);
    const Vec v_next = q.rowwise().maxCoeff();
    const double gap = (v_next - v).cwiseAbs().maxCoeff();
    v = v_next;
    if (gap <= stop) break;
  }
  std::vector<Index> greedy(mdp.n_states, 0);
  Mat q = mdp.reward;
  for (Index a = 0; a < mdp.n_actions; ++a) q.col(a) += mdp.gamma * (mdp.kernel[a] * v);
  for (Index x = 0; x < mdp.n_states; ++x) {
    Index best = 0;
    for (Index a = 1; a < mdp.n_actions; ++a)
      if (q(x, a) > q(x, best)) best = a;  // ties keep the lowest index
    greedy[x] = best;
  }
  OptimalSolution out;
  out.policy = TabularPolicy::deterministic(greedy, mdp.n_actions);
  const PolicyValues pv = policy_evaluation(mdp, out.policy);
  out.v = pv.v;
  out.q = pv.q;
  return out;
}

OccupancyMeasure occupancy_measure(const TabularMdp& mdp, const TabularPolicy& pi) {
  const Mat p_pi = mdp.policy_kernel(pi);
  const Mat system = Mat::Identity(mdp.n_states, mdp.n_states) - mdp.gamma * p_pi.transpose();
  OccupancyMeasure mu;
  mu.state = system.partialPivLu().solve((1.0 - mdp.gamma) * mdp.nu0);
  mu.state_action = mu.state.asDiagonal() * pi.probs;
  return mu;
}

double return_of_policy(const TabularMdp& mdp, const TabularPolicy& pi) {
  return mdp.nu0.dot(policy_evaluation(mdp, pi).v);
}

double flow_residual(const TabularMdp& mdp, const OccupancyMeasure& mu) {
  const Vec nu = mu.state_action.rowwise().sum();
  Vec inflow = (1.0 - mdp.gamma) * mdp.nu0;
  for (Index a = 0; a < mdp.n_actions; ++a)
    inflow += mdp.gamma * (mdp.kernel[a].transpose() * mu.state_action.col(a));
  return (nu - inflow).cwiseAbs().maxCoeff();
}

std::vector<double> regret_curve(const LinearMdp& mdp, const std::vector<Vec>& reward_weights,
                                 const std::vector<TabularPolicy>& policies,
                                 const std::optional<TabularPolicy>& comparator) {
  if (reward_weights.size() != policies.size())
    throw ConfigError("regret_curve: weights and policies must have equal length");
  if (reward_weights.empty()) return {};
  bool fixed = true;
  for (const Vec& w : reward_weights)
    if (w.size() != reward_weights.front().size() || w != reward_weights.front()) {
      fixed = false;
      break;
    }
  if (!fixed && !comparator)
    throw ConfigError("regret_curve: adversarial reward sequence requires an explicit comparator");

  std::optional<TabularPolicy> comp = comparator;
  std::optional<Vec> comp_values;       // <nu0-weighted> comparator value per episode cache
  std::vector<double> gaps;
  gaps.reserve(policies.size());
  TabularMdp tab = mdp.to_tabular(reward_weights.front());
  if (!comp) comp = optimal_policy(tab).policy;
  for (std::size_t k = 0; k < policies.size(); ++k) {
    if (k > 0 && !fixed) tab = mdp.to_tabular(reward_weights[k]);
    double comp_return;
    if (fixed) {
      if (!comp_values) comp_values = Vec::Constant(1, return_of_policy(tab, *comp));
      comp_return = (*comp_values)[0];
    } else {
      comp_return = return_of_policy(tab, *comp);
    }
    gaps.push_back(comp_return - return_of_policy(tab, policies[k]));
  }
  return gaps;
}

std::vector<TabularPolicy> enumerate_deterministic_policies(Index n_states, Index n_actions) {
  double count = std::pow(static_cast<double>(n_actions), static_cast<double>(n_states));
  if (count > 4096.0)
    throw ConfigError("enumerate_deterministic_policies: instance too large to enumerate");
  std::vector<TabularPolicy> out;
  std::vector<Index> actions(n_states, 0);
  for (long idx = 0; idx < static_cast<long>(count); ++idx) {
    long rem = idx;
    for (Index x = 0; x < n_states; ++x) {
      actions[x] = rem % n_actions;
      rem /= n_actions;
    }
    out.push_back(TabularPolicy::deterministic(actions, n_actions));
  }
  return out;
}

}  // namespace lmdp
