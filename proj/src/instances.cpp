#include "lmdp/instances.hpp"

#include <cmath>

#include "lmdp/rng.hpp"

namespace lmdp {

LinearMdp tabular_to_linear(const std::vector<Mat>& kernel, const Mat& reward, double gamma,
                            const Vec& nu0, double r_max) {
  const Index n_states = reward.rows();
  const Index n_actions = reward.cols();
  const Index d = n_states * n_actions;
  LinearMdp mdp;
  mdp.n_states = n_states;
  mdp.n_actions = n_actions;
  mdp.gamma = gamma;
  mdp.r_max = r_max;
  mdp.nu0 = nu0;
  mdp.features.n_states = n_states;
  mdp.features.n_actions = n_actions;
  mdp.features.table = Mat::Identity(d, d);
  mdp.features.bound = 1.0;
  mdp.m_factor = Mat::Zero(n_states, d);
  mdp.reward_weights = Vec::Zero(d);
  for (Index x = 0; x < n_states; ++x)
    for (Index a = 0; a < n_actions; ++a) {
      const Index j = x * n_actions + a;
      mdp.m_factor.col(j) = kernel[a].row(x).transpose();
      mdp.reward_weights[j] = reward(x, a);
    }
  mdp.w_max = std::max(mdp.reward_weights.norm(), 1e-12);
  mdp.validate();
  return mdp;
}

LinearMdp random_mixture_linear_mdp(Index d, Index n_states, Index n_actions, double gamma,
                                    std::uint64_t seed) {
  if (d < 1 || n_states < 1 || n_actions < 1) throw ConfigError("random_mixture: empty shape");
  RngStream rng(seed);
  RngStream feat_rng = rng.child(1);
  RngStream mix_rng = rng.child(2);
  RngStream w_rng = rng.child(3);
  RngStream nu_rng = rng.child(4);

  auto simplex_point = [](RngStream& r, Index n) {
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = r.exponential() + 1e-12;
    return Vec(v / v.sum());
  };

  LinearMdp mdp;
  mdp.n_states = n_states;
  mdp.n_actions = n_actions;
  mdp.gamma = gamma;
  mdp.r_max = 1.0;
  mdp.nu0 = simplex_point(nu_rng, n_states);
  mdp.features.n_states = n_states;
  mdp.features.n_actions = n_actions;
  mdp.features.bound = 1.0;
  mdp.features.table = Mat(n_states * n_actions, d);
  for (Index r = 0; r < mdp.features.table.rows(); ++r)
    mdp.features.table.row(r) = simplex_point(feat_rng, d).transpose();
  // Columns of m_factor are distributions over next states, so any simplex
  // mixture of them is again a distribution.
  mdp.m_factor = Mat(n_states, d);
  for (Index j = 0; j < d; ++j) mdp.m_factor.col(j) = simplex_point(mix_rng, n_states);
  mdp.reward_weights = Vec(d);
  for (Index j = 0; j < d; ++j) mdp.reward_weights[j] = w_rng.uniform01();
  mdp.w_max = std::max(mdp.reward_weights.norm(), 1e-12);
  mdp.validate();
  return mdp;
}

namespace {

void check_two_state_params(double gamma, double eps, const char* who) {
  const double delta = (1.0 - gamma) / gamma;
  if (!(gamma >= 0.5 && gamma < 1.0))
    throw ConfigError(std::string(who) + ": gamma must lie in [1/2, 1)");
  if (!(eps >= 0.0 && eps <= delta))
    throw ConfigError(std::string(who) + ": eps must lie in [0, (1-gamma)/gamma]");
}

}  // namespace

double hard_k_nu_expert_x0(double gamma, double eps) {
  const double delta = (1.0 - gamma) / gamma;
  return (1.0 - gamma + gamma * delta) /
         (1.0 - gamma + 2.0 * gamma * delta - gamma * eps);
}

double hard_k_q_star(double gamma, double eps) {
  const double delta = (1.0 - gamma) / gamma;
  const double a = 1.0 - gamma * (1.0 - delta);
  const double b = 1.0 - gamma * (1.0 - delta + eps);
  return a / (b * a - gamma * gamma * delta * (delta - eps));
}

HardInstanceK hard_instance_K(Index n_actions, double gamma, double eps, Index star) {
  check_two_state_params(gamma, eps, "hard_instance_K");
  if (n_actions < 2) throw ConfigError("hard_instance_K: need at least two actions");
  if (star < 0 || star >= n_actions) throw ConfigError("hard_instance_K: star out of range");
  const double delta = (1.0 - gamma) / gamma;

  std::vector<Mat> kernel(n_actions, Mat(2, 2));
  for (Index a = 0; a < n_actions; ++a) {
    const double stay0 = (a == star) ? 1.0 - delta + eps : 1.0 - delta;
    kernel[a] << stay0, 1.0 - stay0, delta, 1.0 - delta;
  }
  Mat reward(2, n_actions);
  reward.row(0).setOnes();
  reward.row(1).setZero();
  Vec nu0(2);
  nu0 << 1.0, 0.0;

  HardInstanceK inst;
  inst.mdp = tabular_to_linear(kernel, reward, gamma, nu0, 1.0);
  inst.expert = TabularPolicy::deterministic({star, star}, n_actions);
  inst.star = star;
  inst.nu_expert_x0 = hard_k_nu_expert_x0(gamma, eps);
  inst.nu_bad_x0 = 2.0 / 3.0;
  inst.q_expert_x0_star = hard_k_q_star(gamma, eps);
  inst.gap_lower_bound = gamma * eps / (3.0 * (1.0 - gamma));
  return inst;
}

double hard_tau_nu_x0(double gamma, double eps, double alpha_prob) {
  const double delta = (1.0 - gamma) / gamma;
  return (1.0 - gamma + 2.0 * gamma * delta) /
         (2.0 * (1.0 - gamma - gamma * alpha_prob * eps + 2.0 * gamma * delta));
}

HardInstanceTau hard_instance_tau(Index n_actions, double gamma, double eps, double w_max,
                                  int variant, Index star) {
  check_two_state_params(gamma, eps, "hard_instance_tau");
  if (n_actions < 2) throw ConfigError("hard_instance_tau: need at least two actions");
  if (star < 0 || star >= n_actions) throw ConfigError("hard_instance_tau: star out of range");
  if (!(w_max > 0.0)) throw ConfigError("hard_instance_tau: w_max must be positive");
  if (variant != 0 && variant != 1) throw ConfigError("hard_instance_tau: variant must be 0 or 1");
  const double delta = (1.0 - gamma) / gamma;

  std::vector<Mat> kernel(n_actions, Mat(2, 2));
  for (Index a = 0; a < n_actions; ++a) {
    const double leave0 = (a == star) ? delta - eps : delta;
    kernel[a] << 1.0 - leave0, leave0, delta, 1.0 - delta;
  }
  const Index rewarding = (variant == 0) ? 0 : 1;
  Mat reward = Mat::Zero(2, n_actions);
  reward.row(rewarding).setConstant(w_max);
  Vec nu0 = Vec::Constant(2, 0.5);

  HardInstanceTau inst;
  inst.mdp = tabular_to_linear(kernel, reward, gamma, nu0, w_max);
  inst.star = star;
  inst.variant = variant;
  inst.w_max = w_max;
  // Variant 0 rewards staying at x0: the expert plays a*.  Variant 1 rewards
  // x1: the expert avoids a* (lowest non-star action, deterministic).
  const Index avoid = (star == 0) ? 1 : 0;
  const Index expert_action = (variant == 0) ? star : avoid;
  inst.expert = TabularPolicy::deterministic({expert_action, expert_action}, n_actions);
  inst.phi_r = Mat::Zero(2 * n_actions, 2);
  for (Index x = 0; x < 2; ++x)
    for (Index a = 0; a < n_actions; ++a) inst.phi_r(x * n_actions + a, x) = 1.0;
  inst.w_r_true = Vec::Zero(2);
  inst.w_r_true[rewarding] = w_max;
  const double alpha_prob = (variant == 0) ? 1.0 : 0.0;
  inst.nu_expert_x0 = hard_tau_nu_x0(gamma, eps, alpha_prob);
  return inst;
}

LinearMdp concat_reward_features(const LinearMdp& dynamics, const Mat& phi_r, const Vec& w_r) {
  const Index d_r = phi_r.cols();
  const Index d_p = dynamics.dim();
  if (phi_r.rows() != dynamics.n_states * dynamics.n_actions)
    throw ConfigError("concat_reward_features: phi_r row count");
  if (w_r.size() != d_r) throw ConfigError("concat_reward_features: weight dimension");
  LinearMdp out = dynamics;
  out.features.table = Mat(phi_r.rows(), d_r + d_p);
  out.features.table << phi_r, dynamics.features.table;
  double bound = 0.0;
  for (Index r = 0; r < out.features.table.rows(); ++r)
    bound = std::max(bound, out.features.table.row(r).norm());
  out.features.bound = bound;
  out.m_factor = Mat::Zero(dynamics.n_states, d_r + d_p);
  out.m_factor.rightCols(d_p) = dynamics.m_factor;
  out.reward_weights = Vec::Zero(d_r + d_p);
  out.reward_weights.head(d_r) = w_r;
  out.w_max = std::max(w_r.norm(), 1e-12);
  out.validate();
  return out;
}

}  // namespace lmdp
