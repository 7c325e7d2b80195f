#include "lmdp/augmented.hpp"

#include <cmath>

#include "lmdp/numerics.hpp"

namespace lmdp {

double ascension_prob(double bonus, double alpha, double omega) {
  if (!(bonus >= 0.0)) throw ModelError("ascension_prob: bonus must be non-negative");
  return sigmoid(alpha * bonus - omega);
}

Mat ascension_table(const Mat& bonus, double alpha, double omega) {
  Mat p(bonus.rows(), bonus.cols());
  for (Index x = 0; x < bonus.rows(); ++x)
    for (Index a = 0; a < bonus.cols(); ++a) p(x, a) = ascension_prob(bonus(x, a), alpha, omega);
  return p;
}

Mat indicator_ascension_table(const Mat& reward, const Mat& bonus, const Mat& next_value,
                              double gamma, double r_max) {
  const double ceiling = r_max / (1.0 - gamma);
  return ((reward + bonus + gamma * next_value).array() >= ceiling).cast<double>();
}

AugmentedMdp augment(const TabularMdp& base, const Mat& p_plus) {
  if (p_plus.rows() != base.n_states || p_plus.cols() != base.n_actions)
    throw ModelError("augment: ascension table shape mismatch");
  if (!p_plus.allFinite() || p_plus.minCoeff() < 0.0 || p_plus.maxCoeff() > 1.0)
    throw ModelError("augment: ascension probabilities must lie in [0, 1]");
  const Index n = base.n_states;
  const Index heaven = n;
  AugmentedMdp out;
  out.heaven = heaven;
  out.tab.n_states = n + 1;
  out.tab.n_actions = base.n_actions;
  out.tab.gamma = base.gamma;
  out.tab.r_max = base.r_max;
  out.tab.nu0 = Vec::Zero(n + 1);
  out.tab.nu0.head(n) = base.nu0;
  out.tab.reward = Mat(n + 1, base.n_actions);
  // Real rows mix toward the ceiling reward; heaven is absorbing at r_max.
  out.tab.reward.topRows(n) =
      (1.0 - p_plus.array()) * base.reward.array() + p_plus.array() * base.r_max;
  out.tab.reward.row(heaven).setConstant(base.r_max);
  out.tab.kernel.assign(base.n_actions, Mat::Zero(n + 1, n + 1));
  for (Index a = 0; a < base.n_actions; ++a) {
    Mat& k = out.tab.kernel[a];
    for (Index x = 0; x < n; ++x) {
      k.row(x).head(n) = (1.0 - p_plus(x, a)) * base.kernel[a].row(x);
      k(x, heaven) = p_plus(x, a);
    }
    k(heaven, heaven) = 1.0;
  }
  return out;
}

AugmentedMdp augment(const LinearMdp& base, const Mat& p_plus) {
  return augment(base.to_tabular(), p_plus);
}

TabularPolicy extend_policy(const TabularPolicy& pi) {
  TabularPolicy out;
  out.probs = Mat(pi.n_states() + 1, pi.n_actions());
  out.probs.topRows(pi.n_states()) = pi.probs;
  out.probs.row(pi.n_states()).setConstant(1.0 / static_cast<double>(pi.n_actions()));
  return out;
}

Vec extend_value(const Vec& v, double gamma, double r_max) {
  Vec out(v.size() + 1);
  out.head(v.size()) = v;
  out[v.size()] = r_max / (1.0 - gamma);
  return out;
}

CoupledRollout coupled_rollout(const TabularMdp& base, const Mat& p_plus,
                               const TabularPolicy& pi, std::size_t horizon, RngStream& rng) {
  const Index heaven = base.n_states;
  CoupledRollout out;
  out.base_states.reserve(horizon + 1);
  out.coupled_states.reserve(horizon + 1);
  out.base_actions.reserve(horizon);

  RngStream init = rng.child(0);
  Index x = init.categorical(base.nu0);
  out.base_states.push_back(x);
  out.coupled_states.push_back(x);  // coupled chain starts identically

  for (std::size_t t = 1; t <= horizon; ++t) {
    RngStream step = rng.child(t);
    const Index a = step.categorical(pi.probs.row(x).transpose());
    const Index x_next = step.categorical(base.kernel[a].row(x).transpose());
    out.base_actions.push_back(a);
    out.base_states.push_back(x_next);
    if (out.split_time == CoupledRollout::npos) {
      // Still coupled: ascend with probability p(x, a), else follow the base.
      if (step.uniform01() < p_plus(x, a)) {
        out.split_time = t;
        out.coupled_states.push_back(heaven);
      } else {
        out.coupled_states.push_back(x_next);
      }
    } else {
      out.coupled_states.push_back(heaven);
    }
    x = x_next;
  }
  return out;
}

}  // namespace lmdp
