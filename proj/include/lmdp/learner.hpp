#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lmdp/mdp.hpp"
#include "lmdp/numerics.hpp"
#include "lmdp/rng.hpp"

namespace lmdp {

/// Scalar parameters of the learner.  q_max is the derived ceiling
/// (r_max + 2*omega/alpha) / (1 - gamma) that bounds every Q estimate the
/// update rule can produce.
struct Hyperparams {
  double gamma = 0.9;
  double r_max = 1.0;
  double eta = 1.0;    // softmax / policy-update temperature
  double beta = 1.0;   // exploration bonus scale
  double alpha = 1.0;  // ascension sharpness
  double omega = 1.0;  // ascension offset

  double q_max() const {
    const double lift = alpha > 0.0 ? 2.0 * omega / alpha : 0.0;
    return (r_max + lift) / (1.0 - gamma);
  }

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// Full theory-mode parameterization for a K-episode run.
struct TheoreticalHyperparams {
  double omega = 0.0;
  double alpha = 0.0;
  double eta = 0.0;
  double beta = 0.0;   // bonus scale, regret-guarantee form
  double l_max = 0.0;  // episode-length ceiling H log(K/delta)
  double t_total = 0.0;  // T = l_max * K
  double q_max = 0.0;
};

/// Closed-form theory parameters:
///   omega = log K,  alpha = 2 log K,
///   eta   = sqrt(5 d log(1 + B^2 T / d) log|A| / (8 r_max^2 H^{5/2} K)),
///   beta  = C H r_max d log(B H w_max r_max d K / delta),
/// with H = 1/(1-gamma), l_max = H log(K/delta), T = l_max K.
TheoreticalHyperparams theoretical_hyperparams(long K, double gamma, Index d, double B,
                                               Index n_actions, double w_max, double delta,
                                               double r_max = 1.0, double C = 1.0);

/// Validity-lemma bonus scale
///   beta = 8 q_max d log(60*26 alpha w_max r_max B^{9/2} q_max^4
///                        l_max^{5/2} K^{7/2} d^{5/2} / delta).
double validity_beta(double q_max, Index d, double alpha, double w_max, double r_max, double B,
                     double l_max, long K, double delta);

/// Within-epoch softmax policy in compact form.  Over one epoch the policy
/// is exactly
///   pi(a|x) proportional to exp(eta * S(x,a)),
///   S(x,a) = (1-p(x,a)) * (phi(x,a)' theta_sum + m * cb(x,a))
///            + m * p(x,a) * r_max / (1-gamma),
/// where cb = beta * ||phi||_{anchor}, p = sigmoid(alpha*cb - omega), and m
/// counts the episodes folded into theta_sum since the epoch reset.  A fresh
/// epoch (m = 0, theta_sum = 0) gives the uniform policy.
struct CompactPolicy {
  double eta = 1.0;
  double gamma = 0.9;
  double r_max = 1.0;
  double beta = 1.0;
  double alpha = 1.0;
  double omega = 1.0;
  Mat anchor_inv;        // frozen Lambda^{-1} of the epoch
  Vec theta_sum;         // sum of theta over episodes since the reset
  long episode_count = 0;
  bool zero_bonus = false;
  bool zero_ascension = false;

  static CompactPolicy uniform(const Hyperparams& hp, const Mat& anchor_inv, bool zero_bonus,
                               bool zero_ascension);

  /// Exploration width and ascension probability of one feature row.
  struct PairStats {
    double cb = 0.0;
    double p = 0.0;
  };
  template <typename Derived>
  PairStats pair_stats(const Eigen::MatrixBase<Derived>& phi) const {
    PairStats s;
    if (!zero_bonus) s.cb = beta * elliptical_norm(anchor_inv, phi);
    if (!zero_ascension) s.p = sigmoid(alpha * s.cb - omega);
    return s;
  }

  /// One optimistic backup value (1-p)(phi' theta + scale*cb)
  /// + scale * p * r_max/(1-gamma); scale = 1 gives a single Q estimate,
  /// scale = episode_count with theta = theta_sum gives the policy score.
  template <typename Derived>
  double backup(const Eigen::MatrixBase<Derived>& phi, const Vec& theta, double scale) const {
    const PairStats s = pair_stats(phi);
    return (1.0 - s.p) * (phi.dot(theta) + scale * s.cb) +
           scale * s.p * r_max / (1.0 - gamma);
  }

  /// Scores S(x, .) for the n_actions x d feature block of one state.
  Vec scores(const Eigen::Ref<const Mat>& state_features) const;
  /// Action distribution softmax(eta * S) (max-subtracted).
  Vec action_probs(const Eigen::Ref<const Mat>& state_features) const;
  Index act(const Eigen::Ref<const Mat>& state_features, RngStream& rng) const;
};

/// Materialize a compact policy as an explicit stochastic table.
TabularPolicy policy_table(const CompactPolicy& policy, const FeatureMap& features);

/// Evaluator for the current optimistic value function: V(x) is the
/// eta-weighted soft maximum of the single-episode backups
/// q(x,a) = (1-p)(phi' theta + cb) + p r_max/(1-gamma) under the base
/// policy's action distribution.  A default-initialized evaluator is the
/// zero function (episode 1).
struct ValueFunction {
  bool initial = true;
  CompactPolicy base_policy;  // the policy the soft max averages over
  Vec theta;

  double value(const Eigen::Ref<const Mat>& state_features) const;
  /// Per-action backups q(x, .) for one state block.
  Vec q_values(const Eigen::Ref<const Mat>& state_features) const;
};

/// V evaluated at every state of a feature map.
Vec value_table(const ValueFunction& vf, const FeatureMap& features);

/// One recorded environment transition (the terminal reset step of an
/// episode is never recorded).
struct Transition {
  Index state = 0;
  Index action = 0;
  Index next_state = 0;
};

/// Diagnostics emitted by one learner update.
struct EpisodeUpdateInfo {
  long episode = 0;      // k (1-based)
  bool epoch_reset = false;
  long epoch = 0;
  long t = 0;            // transition-clock value T_k
  Vec v_table;           // V_k over states (the ridge target)
  Vec m_hat_v;           // regression estimate of (M V_k)
  Vec theta;             // theta_{k+1} = w_k + gamma * m_hat_v
  Mat bonus;             // CB_k table (n_states x n_actions)
  Mat p_plus;            // ascension table
  Mat q_table;           // Q_{k+1} table
  double bonus_mean = 0.0;
  double p_plus_mean = 0.0;
  double log_det = 0.0;
};

/// Complete learner state across episodes.
struct LearnerState {
  Hyperparams hp;
  FeatureMap features;
  CovarianceState<double> cov;
  Mat next_feature_sum;  // d x n_states; column x' accumulates phi over transitions into x'
  long n_transitions = 0;
  long steps_total = 0;  // actions played, including terminal steps
  long episode = 0;      // episodes processed
  long epoch = 0;
  long epoch_start_episode = 0;
  long epoch_start_step = 0;
  long first_episode_end_step = -1;  // T_1 once episode 1 completes
  CompactPolicy policy;   // policy for the next episode
  ValueFunction value_fn; // evaluates V_{next episode}
  bool zero_bonus = false;
  bool zero_ascension = false;
  std::optional<Mat> exact_m_factor;  // exact transition-operator override

  static LearnerState init(const Hyperparams& hp, FeatureMap features, bool zero_bonus = false,
                           bool zero_ascension = false, long refresh_period = 1000);
};

/// Fold one completed episode into the learner.  `transitions` are the
/// recorded (non-terminal) steps; `episode_len` counts all actions played
/// (so episode_len == transitions.size() + 1 for an uncapped episode).
/// Implements, in order: covariance/dataset ingestion, the epoch trigger
/// (reset to uniform and anchor re-pin), the ridge regression of V against
/// observed next states, and the softmax policy update.
EpisodeUpdateInfo process_episode(LearnerState& state, std::span<const Transition> transitions,
                                  long episode_len, const Vec& reward_weights);

}  // namespace lmdp
