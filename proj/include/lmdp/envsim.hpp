#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "lmdp/learner.hpp"
#include "lmdp/mdp.hpp"
#include "lmdp/oracles.hpp"
#include "lmdp/rng.hpp"

namespace lmdp {

/// One simulator step.  `terminal` marks the step at which the episode ended
/// (continuation coin failed or the cap was hit); its next_state is the
/// fresh reset draw and is never recorded by the learner.
struct TrajectoryStep {
  Index state = 0;
  Index action = 0;
  Index next_state = 0;
  double reward = 0.0;
  bool terminal = false;
};

using ActionSampler = std::function<Index(Index state, RngStream& rng)>;

/// Roll one episode of the discounted process: start from nu0, and after
/// each action continue with probability gamma (geometric episode length).
/// Every step consumes draws from its own child stream of `episode_rng`, so
/// trajectories are reproducible independent of episode lengths elsewhere.
std::vector<TrajectoryStep> run_episode(const TabularMdp& mdp, const ActionSampler& act,
                                        RngStream episode_rng,
                                        std::optional<long> cap = std::nullopt);

/// Adversary protocol: called at the start of episode k (1-based) with the
/// policies pi_1..pi_k (the last entry is the policy about to play) and the
/// weights of episodes 1..k-1; returns w_k.
class RewardAdversary {
 public:
  virtual ~RewardAdversary() = default;
  virtual Vec next_weights(long k, const std::vector<TabularPolicy>& policies,
                           const std::vector<Vec>& weights, RngStream& rng) = 0;
};

/// Constant reward weights every episode.
class FixedAdversary final : public RewardAdversary {
 public:
  explicit FixedAdversary(Vec w) : w_(std::move(w)) {}
  Vec next_weights(long, const std::vector<TabularPolicy>&, const std::vector<Vec>&,
                   RngStream&) override {
    return w_;
  }

 private:
  Vec w_;
};

/// Cycles through a fixed list of weight vectors (simple oblivious
/// adversarial sequence for benchmarks).
class CyclingAdversary final : public RewardAdversary {
 public:
  explicit CyclingAdversary(std::vector<Vec> weights);
  Vec next_weights(long k, const std::vector<TabularPolicy>&, const std::vector<Vec>&,
                   RngStream&) override;

 private:
  std::vector<Vec> weights_;
};

/// One CSV row of the run log.  gap and regret_partial are oracle-computed
/// (exact per-episode optimality gaps and their running sum).
struct EpisodeRecord {
  long episode = 0;
  long epoch = 0;
  long steps_total = 0;
  long episode_len = 0;
  double regret_partial = 0.0;
  double gap = 0.0;
  double bonus_mean = 0.0;
  double p_plus_mean = 0.0;
  double log_det = 0.0;
};

struct TrainingOptions {
  long K = 1;
  std::optional<long> episode_cap;
  /// Called after each learner update (validity probes, tests).
  std::function<void(const LearnerState&, const EpisodeUpdateInfo&)> observer;
};

struct TrainingResult {
  std::vector<EpisodeRecord> log;        // gap fields left 0; filled by oracles
  std::vector<TabularPolicy> policies;   // pi_1..pi_K as played
  std::vector<Vec> weights;              // w_1..w_K
  Index output_index = 0;                // I ~ U[K], 0-based
  LearnerState state;                    // final learner state
};

/// Online training loop: per episode the adversary reveals w_k, one episode
/// is rolled with the learner's current policy, and the learner is updated.
/// Draw layout: run_rng child 1 -> adversary, child 2 -> episode k uses
/// grandchild k, child 3 -> output index draw.
TrainingResult run_training(const LinearMdp& mdp, LearnerState state, RewardAdversary& adversary,
                            const TrainingOptions& opt, RngStream run_rng);

/// Fill gap / regret_partial columns of a training log from exact
/// per-episode gaps (see regret_curve for comparator rules).
void fill_regret(std::vector<EpisodeRecord>& log, const LinearMdp& mdp,
                 const std::vector<Vec>& weights, const std::vector<TabularPolicy>& policies,
                 const std::optional<TabularPolicy>& comparator = std::nullopt);

/// Exact expected return of the uniformly drawn output policy:
/// (1/K) sum_k <nu0, V^{pi_k}>.
double evaluate_output(const LinearMdp& mdp, const std::vector<TabularPolicy>& policies);
/// Monte-Carlo counterpart drawing the output index n_draws times.
double evaluate_output_mc(const LinearMdp& mdp, const std::vector<TabularPolicy>& policies,
                          long n_draws, RngStream& rng);

/// Write the run log as CSV with the fixed header
/// run_id,episode,epoch,steps_total,episode_len,regret_partial,gap_k,
/// bonus_mean,p_plus_mean,logdet.  Floats use max-precision %.17g.
void write_csv(std::ostream& out, const std::string& run_id,
               const std::vector<EpisodeRecord>& log);

}  // namespace lmdp
