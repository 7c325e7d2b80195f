#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "lmdp/envsim.hpp"
#include "lmdp/mdp.hpp"
#include "lmdp/oracles.hpp"

namespace lmdp {

/// Expert demonstrations reduced to reward-feature vectors, one row per
/// sampled (state, action) pair.
struct ExpertDataset {
  Mat samples;  // tau x d_r
};

/// Sample mean of the dataset rows; throws ConfigError on an empty dataset.
Vec estimate_expert_features(const ExpertDataset& data);

/// Euclidean projection onto the centered ball of the given radius.
Vec project_ball(const Vec& v, double radius);

/// One (state, action) pair distributed exactly as the normalized discounted
/// occupancy of pi: follow the chain from nu0 and stop each step with
/// probability 1 - gamma.
std::pair<Index, Index> sample_from_occupancy(const TabularMdp& mdp, const TabularPolicy& pi,
                                              RngStream& rng);

/// tau i.i.d. reward-feature samples from the exact occupancy of the expert
/// (computed by the oracle, then categorical over pairs).
ExpertDataset generate_expert_dataset(const TabularMdp& mdp, const TabularPolicy& expert,
                                      const Mat& phi_r, long tau, RngStream& rng);

/// Online gradient ascent state over reward weights.
struct OgdRewardState {
  Vec w;
  double eta_r = 0.0;
  double w_max = 0.0;
};

/// One ascent step w <- Pi_ball(w + eta_r * (lambda_hat - sampled_feature)).
void ogd_reward_step(OgdRewardState& state, const Vec& lambda_hat, const Vec& sampled_feature);

/// Reward adversary that runs the feature-matching OGD: at episode k it
/// samples one pair from the occupancy of the current policy, takes an
/// ascent step against the expert feature estimate, and emits the iterate
/// embedded into the combined weight space (reward block first), clipped
/// componentwise into [0, r_max] so emitted rewards stay in range.  The
/// unclipped iterates and clip events are recorded.
class OgdAdversary final : public RewardAdversary {
 public:
  OgdAdversary(TabularMdp dynamics, Mat phi_r, Vec lambda_hat, double w_max, double eta_r,
               Index combined_dim, double r_max);

  Vec next_weights(long k, const std::vector<TabularPolicy>& policies,
                   const std::vector<Vec>& weights, RngStream& rng) override;

  const std::vector<Vec>& iterates() const { return iterates_; }
  long clip_events() const { return clip_events_; }

 private:
  TabularMdp dynamics_;  // kernel access only; rewards never read
  Mat phi_r_;
  Vec lambda_hat_;
  OgdRewardState ogd_;
  Index combined_dim_;
  double r_max_;
  std::vector<Vec> iterates_;
  long clip_events_ = 0;
};

struct ImitationConfig {
  long K = 100;
  std::optional<long> tau;  // expert sample count; nullopt = exact features
  double eta_r = 0.0;       // 0 = default w_max / (B_r sqrt(K))
  std::optional<long> episode_cap;
};

struct ImitationResult {
  std::vector<TabularPolicy> policies;
  std::vector<Vec> reward_iterates;  // unclipped OGD iterates w_1..w_K
  std::vector<Vec> emitted_weights;  // combined-space weights the learner saw
  std::vector<EpisodeRecord> log;    // gaps vs expert under the true reward
  Vec lambda_hat;
  long clip_events = 0;
  double expert_return = 0.0;
  double average_return = 0.0;   // (1/K) sum_k <nu0, V^{pi_k}> under true reward
  double suboptimality = 0.0;    // expert_return - average_return
  Index output_index = 0;
};

/// Full imitation run: expert dataset -> feature estimate -> OGD reward
/// adversary driving the optimistic learner on the combined-feature model.
/// `combined` must carry the true reward in its weights (features laid out
/// [phi_r | phi_dynamics]); the learner itself never reads them --- it only
/// sees the adversary's emitted weights.  Suboptimality is measured by the
/// exact oracle under the true reward.
ImitationResult imitation_run(const LinearMdp& combined, const Mat& phi_r,
                           const TabularPolicy& expert, const ImitationConfig& cfg,
                           LearnerState learner, RngStream run_rng);

}  // namespace lmdp
