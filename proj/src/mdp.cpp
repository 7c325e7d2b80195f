#include "lmdp/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lmdp {

namespace {

constexpr double kRowTol = 1e-9;

void require(bool cond, const std::string& what) {
  if (!cond) throw ModelError(what);
}

std::string at(const char* what, Index i, Index j = -1) {
  std::ostringstream os;
  os << what << " (index " << i;
  if (j >= 0) os << ", " << j;
  os << ")";
  return os.str();
}

bool is_distribution(const Eigen::Ref<const Vec>& v, double tol) {
  return v.allFinite() && v.minCoeff() >= -tol && std::abs(v.sum() - 1.0) <= tol;
}

}  // namespace

void FeatureMap::validate() const {
  require(n_states > 0 && n_actions > 0, "FeatureMap: empty state or action set");
  require(table.rows() == n_states * n_actions, "FeatureMap: row count must be |X| * |A|");
  require(table.cols() > 0, "FeatureMap: zero feature dimension");
  require(table.allFinite(), "FeatureMap: non-finite entry");
  require(bound > 0.0, "FeatureMap: bound must be positive");
  for (Index r = 0; r < table.rows(); ++r)
    require(table.row(r).norm() <= bound + kRowTol, at("FeatureMap: row norm exceeds bound", r));
}

TabularPolicy TabularPolicy::uniform(Index n_states, Index n_actions) {
  TabularPolicy pi;
  pi.probs = Mat::Constant(n_states, n_actions, 1.0 / static_cast<double>(n_actions));
  return pi;
}

TabularPolicy TabularPolicy::deterministic(const std::vector<Index>& actions, Index n_actions) {
  TabularPolicy pi;
  pi.probs = Mat::Zero(static_cast<Index>(actions.size()), n_actions);
  for (Index x = 0; x < pi.probs.rows(); ++x) {
    if (actions[x] < 0 || actions[x] >= n_actions)
      throw ModelError("TabularPolicy: action index out of range");
    pi.probs(x, actions[x]) = 1.0;
  }
  return pi;
}

void TabularPolicy::validate() const {
  require(probs.rows() > 0 && probs.cols() > 0, "TabularPolicy: empty table");
  for (Index x = 0; x < probs.rows(); ++x)
    require(is_distribution(probs.row(x).transpose(), kRowTol),
            at("TabularPolicy: row is not a distribution", x));
}

Mat TabularMdp::policy_kernel(const TabularPolicy& pi) const {
  Mat p = Mat::Zero(n_states, n_states);
  for (Index a = 0; a < n_actions; ++a)
    p.noalias() += pi.probs.col(a).asDiagonal() * kernel[a];
  return p;
}

Vec TabularMdp::policy_reward(const TabularPolicy& pi) const {
  return (pi.probs.array() * reward.array()).rowwise().sum();
}

void TabularMdp::validate() const {
  require(n_states > 0 && n_actions > 0, "TabularMdp: empty state or action set");
  require(gamma >= 0.0 && gamma < 1.0, "TabularMdp: gamma must lie in [0, 1)");
  require(r_max > 0.0, "TabularMdp: r_max must be positive");
  require(nu0.size() == n_states && is_distribution(nu0, kRowTol),
          "TabularMdp: nu0 is not a distribution");
  require(reward.rows() == n_states && reward.cols() == n_actions,
          "TabularMdp: reward table shape");
  require(reward.allFinite(), "TabularMdp: non-finite reward");
  require(reward.minCoeff() >= -kRowTol && reward.maxCoeff() <= r_max + kRowTol,
          "TabularMdp: reward outside [0, r_max]");
  require(static_cast<Index>(kernel.size()) == n_actions, "TabularMdp: kernel count");
  for (Index a = 0; a < n_actions; ++a) {
    require(kernel[a].rows() == n_states && kernel[a].cols() == n_states,
            at("TabularMdp: kernel shape", a));
    for (Index x = 0; x < n_states; ++x)
      require(is_distribution(kernel[a].row(x).transpose(), 1e-6),
              at("TabularMdp: kernel row is not a distribution", a, x));
  }
}

Vec LinearMdp::transition_distribution(Index state, Index action) const {
  Vec p = m_factor * features.phi(state, action).transpose();
  const double lo = p.minCoeff();
  const double dev = std::abs(p.sum() - 1.0);
  if (lo < -1e-6 || dev > 1e-6)
    throw ModelError(at("LinearMdp: factored transition is not a distribution", state, action));
  p = p.cwiseMax(0.0);
  p /= p.sum();
  return p;
}

double LinearMdp::mean_reward(Index state, Index action) const {
  const double r = features.phi(state, action).dot(reward_weights);
  if (!(r >= -kRowTol && r <= r_max + kRowTol))
    throw ModelError(at("LinearMdp: reward outside [0, r_max]", state, action));
  return std::clamp(r, 0.0, r_max);
}

TabularMdp LinearMdp::to_tabular() const { return to_tabular(reward_weights); }

TabularMdp LinearMdp::to_tabular(const Vec& w_alt) const {
  if (w_alt.size() != dim()) throw ModelError("LinearMdp: weight dimension mismatch");
  TabularMdp tab;
  tab.n_states = n_states;
  tab.n_actions = n_actions;
  tab.gamma = gamma;
  tab.r_max = r_max;
  tab.nu0 = nu0;
  tab.reward = Mat(n_states, n_actions);
  tab.kernel.assign(n_actions, Mat(n_states, n_states));
  for (Index x = 0; x < n_states; ++x) {
    for (Index a = 0; a < n_actions; ++a) {
      const double r = features.phi(x, a).dot(w_alt);
      if (!(r >= -kRowTol && r <= r_max + kRowTol))
        throw ModelError(at("LinearMdp: reward outside [0, r_max]", x, a));
      tab.reward(x, a) = std::clamp(r, 0.0, r_max);
      tab.kernel[a].row(x) = transition_distribution(x, a).transpose();
    }
  }
  return tab;
}

void LinearMdp::validate() const {
  features.validate();
  require(features.n_states == n_states && features.n_actions == n_actions,
          "LinearMdp: feature map shape mismatch");
  require(gamma >= 0.0 && gamma < 1.0, "LinearMdp: gamma must lie in [0, 1)");
  require(r_max > 0.0, "LinearMdp: r_max must be positive");
  require(nu0.size() == n_states && is_distribution(nu0, kRowTol),
          "LinearMdp: nu0 is not a distribution");
  require(m_factor.rows() == n_states && m_factor.cols() == dim(), "LinearMdp: m_factor shape");
  require(m_factor.allFinite(), "LinearMdp: non-finite m_factor");
  require(reward_weights.size() == dim(), "LinearMdp: weight dimension");
  require(reward_weights.allFinite(), "LinearMdp: non-finite weights");
  require(w_max <= 0.0 || reward_weights.norm() <= w_max + kRowTol,
          "LinearMdp: weight norm exceeds w_max");
  for (Index x = 0; x < n_states; ++x)
    for (Index a = 0; a < n_actions; ++a) {
      (void)transition_distribution(x, a);  // throws on violation
      (void)mean_reward(x, a);
    }
}

}  // namespace lmdp
