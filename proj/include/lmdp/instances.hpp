#pragma once

#include <cstdint>
#include <vector>

#include "lmdp/mdp.hpp"

namespace lmdp {

/// Embed an explicit tabular model as a linear MDP with one-hot features of
/// dimension |X| |A|: phi(x,a) = e_{(x,a)}, m(x')_{(x,a)} = P(x'|x,a),
/// w_{(x,a)} = r(x,a).
LinearMdp tabular_to_linear(const std::vector<Mat>& kernel, const Mat& reward, double gamma,
                            const Vec& nu0, double r_max = 1.0);

/// Random d-dimensional linear MDP: feature rows drawn on the simplex,
/// m_factor columns are random distributions over states (so every mixture
/// is a distribution), rewards are convex combinations of weights in [0,1].
LinearMdp random_mixture_linear_mdp(Index d, Index n_states, Index n_actions, double gamma,
                                    std::uint64_t seed);

/// Two-state reinforcement-learning hard instance: staying at the rewarding
/// state x0 is delta-rare except that one action a* stays eps more often;
/// identifying a* is the whole problem.  Requires gamma >= 1/2 and
/// 0 <= eps <= (1-gamma)/gamma.
struct HardInstanceK {
  LinearMdp mdp;  // one-hot embedding, rewards 1{x = x0}
  TabularPolicy expert;
  Index star = 0;
  double nu_expert_x0 = 0.0;     // closed-form occupancy of x0 under a*
  double nu_bad_x0 = 0.0;        // occupancy of x0 avoiding a* (= 2/3)
  double q_expert_x0_star = 0.0; // closed-form Q^{expert}(x0, a*)
  double gap_lower_bound = 0.0;  // gamma*eps / (3(1-gamma))
};

HardInstanceK hard_instance_K(Index n_actions, double gamma, double eps, Index star = 0);

/// Closed forms backing HardInstanceK (unit-testable arithmetic).
double hard_k_nu_expert_x0(double gamma, double eps);
double hard_k_q_star(double gamma, double eps);

/// Two-state imitation hard instance: symmetric delta-switching chain except
/// a* at x0 switches eps less often; the reward places w_max on x0
/// (variant 0, expert plays a*) or on x1 (variant 1, expert avoids a*).
/// Reward features are one-hot in the state, phi_r(x, a) = e_x.
struct HardInstanceTau {
  LinearMdp mdp;  // one-hot transition embedding carrying the true reward
  TabularPolicy expert;
  Index star = 0;
  int variant = 0;
  Mat phi_r;      // (|X| |A|) x 2
  Vec w_r_true;   // (w_max, 0) or (0, w_max)
  double w_max = 0.0;
  double nu_expert_x0 = 0.0;  // closed form
};

HardInstanceTau hard_instance_tau(Index n_actions, double gamma, double eps, double w_max,
                                  int variant, Index star = 0);

/// Occupancy of x0 for a policy putting probability alpha on a* at x0
/// (both states' other actions are symmetric):
/// (1 - gamma + 2 gamma delta) / (2 (1 - gamma - gamma alpha eps + 2 gamma delta)),
/// delta = (1-gamma)/gamma.
double hard_tau_nu_x0(double gamma, double eps, double alpha_prob);

/// Combined-feature model for imitation: features [phi_r | phi_dyn],
/// m_factor [0 | m_dyn], weights [w_r ; 0].  The transition structure is
/// untouched; rewards become <phi_r, w_r>.
LinearMdp concat_reward_features(const LinearMdp& dynamics, const Mat& phi_r, const Vec& w_r);

}  // namespace lmdp
