#include "lmdp/learner.hpp"

#include <cmath>

namespace lmdp {

void Hyperparams::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("Hyperparams: gamma must lie in [0, 1)");
  if (!(r_max > 0.0)) throw ConfigError("Hyperparams: r_max must be positive");
  if (!(eta > 0.0)) throw ConfigError("Hyperparams: eta must be positive");
  if (!(beta >= 0.0)) throw ConfigError("Hyperparams: beta must be non-negative");
  if (!(alpha >= 0.0)) throw ConfigError("Hyperparams: alpha must be non-negative");
  if (!(omega >= 0.0)) throw ConfigError("Hyperparams: omega must be non-negative");
}

TheoreticalHyperparams theoretical_hyperparams(long K, double gamma, Index d, double B,
                                               Index n_actions, double w_max, double delta,
                                               double r_max, double C) {
  if (K < 2) throw ConfigError("theoretical_hyperparams: K must be at least 2");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw ConfigError("theoretical_hyperparams: gamma must lie in (0, 1)");
  if (d < 1 || n_actions < 2)
    throw ConfigError("theoretical_hyperparams: need d >= 1 and at least two actions");
  if (!(B > 0.0 && w_max > 0.0 && r_max > 0.0 && C > 0.0))
    throw ConfigError("theoretical_hyperparams: scales must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("theoretical_hyperparams: delta must lie in (0, 1)");
  const double h = 1.0 / (1.0 - gamma);
  const double kd = static_cast<double>(K);
  const double dd = static_cast<double>(d);
  TheoreticalHyperparams p;
  p.l_max = h * std::log(kd / delta);
  p.t_total = p.l_max * kd;
  p.omega = std::log(kd);
  p.alpha = 2.0 * std::log(kd);
  p.eta = std::sqrt(5.0 * dd * std::log1p(B * B * p.t_total / dd) *
                    std::log(static_cast<double>(n_actions)) /
                    (8.0 * r_max * r_max * std::pow(h, 2.5) * kd));
  p.beta = C * h * r_max * dd * std::log(B * h * w_max * r_max * dd * kd / delta);
  p.q_max = (r_max + 2.0 * p.omega / p.alpha) / (1.0 - gamma);
  return p;
}

double validity_beta(double q_max, Index d, double alpha, double w_max, double r_max, double B,
                     double l_max, long K, double delta) {
  const double dd = static_cast<double>(d);
  const double kd = static_cast<double>(K);
  const double inner = 60.0 * 26.0 * alpha * w_max * r_max * std::pow(B, 4.5) *
                       std::pow(q_max, 4.0) * std::pow(l_max, 2.5) * std::pow(kd, 3.5) *
                       std::pow(dd, 2.5) / delta;
  return 8.0 * q_max * dd * std::log(inner);
}

CompactPolicy CompactPolicy::uniform(const Hyperparams& hp, const Mat& anchor_inv,
                                     bool zero_bonus, bool zero_ascension) {
  CompactPolicy pi;
  pi.eta = hp.eta;
  pi.gamma = hp.gamma;
  pi.r_max = hp.r_max;
  pi.beta = hp.beta;
  pi.alpha = hp.alpha;
  pi.omega = hp.omega;
  pi.anchor_inv = anchor_inv;
  pi.theta_sum = Vec::Zero(anchor_inv.rows());
  pi.episode_count = 0;
  pi.zero_bonus = zero_bonus;
  pi.zero_ascension = zero_ascension;
  return pi;
}

Vec CompactPolicy::scores(const Eigen::Ref<const Mat>& state_features) const {
  Vec s(state_features.rows());
  const double m = static_cast<double>(episode_count);
  for (Index a = 0; a < state_features.rows(); ++a)
    s[a] = backup(state_features.row(a).transpose(), theta_sum, m);
  return s;
}

Vec CompactPolicy::action_probs(const Eigen::Ref<const Mat>& state_features) const {
  Vec s = scores(state_features);
  s = (eta * (s.array() - s.maxCoeff())).exp();
  return s / s.sum();
}

Index CompactPolicy::act(const Eigen::Ref<const Mat>& state_features, RngStream& rng) const {
  return rng.categorical(action_probs(state_features));
}

TabularPolicy policy_table(const CompactPolicy& policy, const FeatureMap& features) {
  TabularPolicy pi;
  pi.probs = Mat(features.n_states, features.n_actions);
  for (Index x = 0; x < features.n_states; ++x)
    pi.probs.row(x) = policy.action_probs(features.state_block(x)).transpose();
  return pi;
}

Vec ValueFunction::q_values(const Eigen::Ref<const Mat>& state_features) const {
  Vec q(state_features.rows());
  for (Index a = 0; a < state_features.rows(); ++a)
    q[a] = base_policy.backup(state_features.row(a).transpose(), theta, 1.0);
  return q;
}

double ValueFunction::value(const Eigen::Ref<const Mat>& state_features) const {
  if (initial) return 0.0;
  const Vec probs = base_policy.action_probs(state_features);
  return weighted_logsumexp(probs, q_values(state_features), base_policy.eta);
}

Vec value_table(const ValueFunction& vf, const FeatureMap& features) {
  Vec v = Vec::Zero(features.n_states);
  if (vf.initial) return v;
  for (Index x = 0; x < features.n_states; ++x) v[x] = vf.value(features.state_block(x));
  return v;
}

LearnerState LearnerState::init(const Hyperparams& hp, FeatureMap features, bool zero_bonus,
                                bool zero_ascension, long refresh_period) {
  hp.validate();
  features.validate();
  LearnerState s;
  s.hp = hp;
  s.features = std::move(features);
  s.cov = CovarianceState<double>::identity(s.features.dim(), refresh_period);
  s.next_feature_sum = Mat::Zero(s.features.dim(), s.features.n_states);
  s.zero_bonus = zero_bonus;
  s.zero_ascension = zero_ascension;
  s.policy = CompactPolicy::uniform(hp, s.cov.anchor_inv, zero_bonus, zero_ascension);
  s.value_fn = ValueFunction{};
  return s;
}

EpisodeUpdateInfo process_episode(LearnerState& state, std::span<const Transition> transitions,
                                  long episode_len, const Vec& reward_weights) {
  const FeatureMap& fm = state.features;
  if (reward_weights.size() != fm.dim())
    throw ConfigError("process_episode: reward weight dimension mismatch");
  // Every episode ends in exactly one unrecorded step (the reset draw), so
  // the action count always exceeds the recorded transitions by one.
  if (episode_len != static_cast<long>(transitions.size()) + 1)
    throw ConfigError("process_episode: episode length must be transition count + 1");

  // 1. Ingest the recorded transitions (terminal steps never reach here).
  for (const Transition& tr : transitions) {
    if (tr.state < 0 || tr.state >= fm.n_states || tr.action < 0 || tr.action >= fm.n_actions ||
        tr.next_state < 0 || tr.next_state >= fm.n_states)
      throw ConfigError("process_episode: transition index out of range");
    const auto phi = fm.phi(tr.state, tr.action).transpose();
    rank_one_update(state.cov, phi);
    state.next_feature_sum.col(tr.next_state) += phi;
    ++state.n_transitions;
  }
  const long k = ++state.episode;
  state.steps_total += episode_len;
  const long t = 1 + state.n_transitions;  // transition clock T_k
  if (k == 1) state.first_episode_end_step = t;

  // 2. Epoch trigger: first episode end, or determinant doubled since the
  //    anchor.  On trigger: refresh the inverse, advance the epoch counters,
  //    re-pin the anchor, and reset the *current* policy to uniform.
  const bool trigger = (t == state.first_episode_end_step) ||
                       (state.cov.log_det - state.cov.anchor_log_det >= std::log(2.0));
  if (trigger) {
    refresh_inverse(state.cov);
    ++state.epoch;
    state.epoch_start_episode = k;
    state.epoch_start_step = t;
    state.cov.pin_anchor();
    state.policy =
        CompactPolicy::uniform(state.hp, state.cov.anchor_inv, state.zero_bonus, state.zero_ascension);
  }

  // 3. Ridge regression of V_k against observed next states:
  //    M_hat V = Lambda^{-1} sum_j phi_j V(x'_j), accumulated per distinct
  //    next state.  The exact-model hook replaces the estimate by the true
  //    transition operator applied to V.
  const Vec v_k = value_table(state.value_fn, fm);
  Vec m_hat_v;
  if (state.exact_m_factor) {
    m_hat_v = state.exact_m_factor->transpose() * v_k;
  } else {
    m_hat_v = state.cov.lambda_inv * (state.next_feature_sum * v_k);
  }
  Vec theta_next = reward_weights + state.hp.gamma * m_hat_v;

  // 4. Softmax policy update: fold theta into the running epoch sum.  The
  //    value function for the next episode soft-maxes the new backups under
  //    the pre-update (post-reset) policy.
  const CompactPolicy pi_k = state.policy;
  state.policy.theta_sum += theta_next;
  state.policy.episode_count += 1;
  state.value_fn = ValueFunction{/*initial=*/false, pi_k, theta_next};

  // 5. Diagnostics.
  EpisodeUpdateInfo info;
  info.episode = k;
  info.epoch_reset = trigger;
  info.epoch = state.epoch;
  info.t = t;
  info.v_table = v_k;
  info.m_hat_v = std::move(m_hat_v);
  info.theta = std::move(theta_next);
  info.bonus = Mat(fm.n_states, fm.n_actions);
  info.p_plus = Mat(fm.n_states, fm.n_actions);
  info.q_table = Mat(fm.n_states, fm.n_actions);
  for (Index x = 0; x < fm.n_states; ++x)
    for (Index a = 0; a < fm.n_actions; ++a) {
      const auto phi = fm.phi(x, a).transpose();
      const CompactPolicy::PairStats ps = pi_k.pair_stats(phi);
      info.bonus(x, a) = ps.cb;
      info.p_plus(x, a) = ps.p;
      info.q_table(x, a) = pi_k.backup(phi, info.theta, 1.0);
    }
  info.bonus_mean = info.bonus.mean();
  info.p_plus_mean = info.p_plus.mean();
  info.log_det = state.cov.log_det;
  return info;
}

}  // namespace lmdp
