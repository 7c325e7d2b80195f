#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "lmdp/envsim.hpp"
#include "lmdp/instances.hpp"
#include "lmdp/oracles.hpp"

using namespace lmdp;

namespace {

ActionSampler uniform_sampler(Index n_actions) {
  return [n_actions](Index, RngStream& rng) { return rng.uniform_index(n_actions); };
}

LearnerState practical_learner(const LinearMdp& inst, double eta, double beta) {
  Hyperparams hp;
  hp.gamma = inst.gamma;
  hp.r_max = inst.r_max;
  hp.eta = eta;
  hp.beta = beta;
  hp.alpha = 2.0 * std::log(1000.0);
  hp.omega = std::log(1000.0);
  return LearnerState::init(hp, inst.features);
}

// Asserts the protocol: at episode k the adversary sees k policies (the
// current one last) and k-1 past weight vectors.
class ProtocolCheckingAdversary final : public RewardAdversary {
 public:
  explicit ProtocolCheckingAdversary(Vec w) : w_(std::move(w)) {}
  Vec next_weights(long k, const std::vector<TabularPolicy>& policies,
                   const std::vector<Vec>& weights, RngStream&) override {
    ok_ = ok_ && policies.size() == static_cast<std::size_t>(k) &&
          weights.size() == static_cast<std::size_t>(k - 1);
    // The policy about to play must be a valid distribution table.
    const Mat& probs = policies.back().probs;
    ok_ = ok_ && (probs.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12;
    return w_;
  }
  bool ok() const { return ok_; }

 private:
  Vec w_;
  bool ok_ = true;
};

class BadDimensionAdversary final : public RewardAdversary {
 public:
  Vec next_weights(long, const std::vector<TabularPolicy>&, const std::vector<Vec>&,
                   RngStream&) override {
    return Vec::Ones(1);
  }
};

}  // namespace

TEST_SUITE("envsim") {

TEST_CASE("gamma = 0: every episode is a single terminal step resetting from nu0") {
  TabularMdp mdp = random_mixture_linear_mdp(2, 3, 2, 0.5, 1).to_tabular();
  mdp.gamma = 0.0;
  RngStream rng(3);
  Vec start_counts = Vec::Zero(3);
  for (int i = 0; i < 20000; ++i) {
    const auto steps = run_episode(mdp, uniform_sampler(2), rng.child(i));
    REQUIRE(steps.size() == 1);
    CHECK(steps[0].terminal);
    CHECK(steps[0].reward == mdp.reward(steps[0].state, steps[0].action));
    start_counts[steps[0].state] += 1.0;
  }
  // Initial states follow nu0 (3-sigma per coordinate).
  for (Index x = 0; x < 3; ++x) {
    const double p = mdp.nu0[x];
    const double sigma = std::sqrt(p * (1.0 - p) / 20000.0);
    CHECK(std::abs(start_counts[x] / 20000.0 - p) < 3.0 * sigma + 1e-12);
  }
}

TEST_CASE("episode length is geometric with mean 1/(1-gamma)") {
  TabularMdp mdp = random_mixture_linear_mdp(2, 3, 2, 0.9, 2).to_tabular();
  const int n = 40000;
  RngStream rng(5);
  double sum = 0.0;
  std::vector<long> bins(21, 0);  // lengths 1..20, then the tail
  for (int i = 0; i < n; ++i) {
    const auto steps = run_episode(mdp, uniform_sampler(2), rng.child(i));
    const auto len = static_cast<long>(steps.size());
    sum += static_cast<double>(len);
    bins[static_cast<std::size_t>(std::min<long>(len, 21) - 1)] += 1;
  }
  const double mean = sum / n;
  // Geometric(p = 1 - gamma) on {1, 2, ...}: mean 10, variance gamma/(1-gamma)^2.
  const double sigma_mean = std::sqrt(0.9 / (0.1 * 0.1) / n);
  CHECK(std::abs(mean - 10.0) < 3.0 * sigma_mean);
  // Chi-square goodness of fit at the 1% level, df = 20 -> critical 37.566.
  double chi2 = 0.0;
  for (int t = 1; t <= 21; ++t) {
    const double p = t <= 20 ? 0.1 * std::pow(0.9, t - 1) : std::pow(0.9, 20);
    const double expected = n * p;
    const double diff = static_cast<double>(bins[static_cast<std::size_t>(t - 1)]) - expected;
    chi2 += diff * diff / expected;
  }
  CHECK(chi2 < 37.566);
}

TEST_CASE("cap bounds the length and marks the last step terminal") {
  TabularMdp mdp = random_mixture_linear_mdp(2, 3, 2, 0.95, 3).to_tabular();
  RngStream rng(7);
  long capped_count = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto steps = run_episode(mdp, uniform_sampler(2), rng.child(i), 5);
    REQUIRE(!steps.empty());
    CHECK(steps.size() <= 5);
    CHECK(steps.back().terminal);
    for (std::size_t t = 0; t + 1 < steps.size(); ++t) CHECK_FALSE(steps[t].terminal);
    if (steps.size() == 5) ++capped_count;
  }
  CHECK(capped_count > 0);  // gamma = 0.95 caps most episodes
  CHECK_THROWS_AS(run_episode(mdp, uniform_sampler(2), rng.child(99), 0), ConfigError);
}

TEST_CASE("the terminal step's state-action pair follows the occupancy measure") {
  const TabularMdp mdp = random_mixture_linear_mdp(2, 4, 2, 0.8, 4).to_tabular();
  const TabularPolicy pi = TabularPolicy::uniform(4, 2);
  const ActionSampler act = [&pi](Index x, RngStream& rng) {
    return rng.categorical(pi.probs.row(x).transpose());
  };
  const OccupancyMeasure mu = occupancy_measure(mdp, pi);
  Mat counts = Mat::Zero(4, 2);
  const int n = 100000;
  RngStream rng(9);
  for (int i = 0; i < n; ++i) {
    const auto steps = run_episode(mdp, act, rng.child(i));
    const auto& last = steps.back();
    counts(last.state, last.action) += 1.0;
  }
  const double tv = 0.5 * (counts / n - mu.state_action).cwiseAbs().sum();
  CHECK(tv < 0.015);
}

TEST_CASE("episodes are reproducible from their stream and differ across streams") {
  const TabularMdp mdp = random_mixture_linear_mdp(2, 4, 3, 0.9, 5).to_tabular();
  const auto a = run_episode(mdp, uniform_sampler(3), RngStream(42));
  const auto b = run_episode(mdp, uniform_sampler(3), RngStream(42));
  REQUIRE(a.size() == b.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    CHECK(a[t].state == b[t].state);
    CHECK(a[t].action == b[t].action);
    CHECK(a[t].next_state == b[t].next_state);
    CHECK(a[t].reward == b[t].reward);
    CHECK(a[t].terminal == b[t].terminal);
  }
  // A different stream changes the trajectory (compare a long horizon).
  bool any_diff = false;
  for (int s = 43; s < 48 && !any_diff; ++s) {
    const auto c = run_episode(mdp, uniform_sampler(3), RngStream(static_cast<std::uint64_t>(s)));
    any_diff = c.size() != a.size();
    for (std::size_t t = 0; !any_diff && t < a.size(); ++t)
      any_diff = c[t].state != a[t].state || c[t].action != a[t].action;
  }
  CHECK(any_diff);
}

TEST_CASE("training runs are seed-deterministic and episode streams are isolated") {
  const LinearMdp inst = random_mixture_linear_mdp(3, 4, 2, 0.9, 21);
  FixedAdversary adv(inst.reward_weights);
  TrainingOptions opts;
  opts.K = 10;
  const auto short_run =
      run_training(inst, practical_learner(inst, 0.5, 0.3), adv, opts, RngStream(77));
  opts.K = 25;
  const auto long_run =
      run_training(inst, practical_learner(inst, 0.5, 0.3), adv, opts, RngStream(77));
  // The first 10 episodes of the longer run replay the short run exactly:
  // per-episode child streams make the tail independent of K.
  for (std::size_t k = 0; k < 10; ++k) {
    CHECK(long_run.log[k].episode_len == short_run.log[k].episode_len);
    CHECK(long_run.log[k].steps_total == short_run.log[k].steps_total);
    CHECK(long_run.log[k].epoch == short_run.log[k].epoch);
    CHECK(long_run.log[k].log_det == short_run.log[k].log_det);
    CHECK(long_run.log[k].bonus_mean == short_run.log[k].bonus_mean);
    CHECK((long_run.policies[k].probs - short_run.policies[k].probs).cwiseAbs().maxCoeff() ==
          0.0);
  }
  // Same-seed reruns are bit-identical end to end.
  opts.K = 10;
  const auto rerun =
      run_training(inst, practical_learner(inst, 0.5, 0.3), adv, opts, RngStream(77));
  CHECK(rerun.output_index == short_run.output_index);
  for (std::size_t k = 0; k < 10; ++k)
    CHECK((rerun.policies[k].probs - short_run.policies[k].probs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("training bookkeeping: step totals, dataset size, first policy uniform") {
  const LinearMdp inst = random_mixture_linear_mdp(3, 4, 2, 0.85, 22);
  ProtocolCheckingAdversary adv(inst.reward_weights);
  TrainingOptions opts;
  opts.K = 40;
  const auto result =
      run_training(inst, practical_learner(inst, 0.5, 0.3), adv, opts, RngStream(78));
  CHECK(adv.ok());
  REQUIRE(result.log.size() == 40);
  REQUIRE(result.policies.size() == 40);
  REQUIRE(result.weights.size() == 40);
  long steps = 0;
  for (const auto& rec : result.log) {
    steps += rec.episode_len;
    CHECK(rec.steps_total == steps);
  }
  CHECK(result.state.steps_total == steps);
  // Exactly one unrecorded terminal step per episode.
  CHECK(result.state.n_transitions == steps - 40);
  CHECK((result.policies[0].probs.array() - 0.5).abs().maxCoeff() < 1e-15);
  CHECK(result.output_index >= 0);
  CHECK(result.output_index < 40);
}

TEST_CASE("training rejects incompatible learners and invalid adversary weights") {
  const LinearMdp inst = random_mixture_linear_mdp(3, 4, 2, 0.85, 23);
  const LinearMdp other = random_mixture_linear_mdp(3, 4, 2, 0.85, 24);
  TrainingOptions opts;
  opts.K = 5;
  FixedAdversary adv(inst.reward_weights);
  CHECK_THROWS_AS(
      run_training(inst, practical_learner(other, 0.5, 0.3), adv, opts, RngStream(1)),
      ConfigError);
  BadDimensionAdversary bad_dim;
  CHECK_THROWS_AS(
      run_training(inst, practical_learner(inst, 0.5, 0.3), bad_dim, opts, RngStream(1)),
      ModelError);
  // Weights that push rewards outside [0, r_max] are rejected by the model.
  const double max_reward = (inst.features.table * inst.reward_weights).maxCoeff();
  FixedAdversary too_big((2.0 * inst.r_max / max_reward) * inst.reward_weights);
  CHECK_THROWS_AS(
      run_training(inst, practical_learner(inst, 0.5, 0.3), too_big, opts, RngStream(1)),
      ModelError);
}

TEST_CASE("cycling adversary repeats its weight list in order") {
  const LinearMdp inst = random_mixture_linear_mdp(2, 3, 2, 0.8, 25);
  CyclingAdversary adv({inst.reward_weights, 0.5 * inst.reward_weights});
  TrainingOptions opts;
  opts.K = 6;
  const auto result =
      run_training(inst, practical_learner(inst, 0.5, 0.3), adv, opts, RngStream(79));
  for (std::size_t k = 0; k < 6; ++k) {
    const Vec& expected = k % 2 == 0 ? result.weights[0] : result.weights[1];
    CHECK((result.weights[k] - expected).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK((result.weights[0] - 2.0 * result.weights[1]).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(CyclingAdversary(std::vector<Vec>{}), ConfigError);
}

TEST_CASE("regret fill telescopes exact per-episode gaps") {
  const HardInstanceK hard = hard_instance_K(3, 0.9, 0.05);
  FixedAdversary adv(hard.mdp.reward_weights);
  TrainingOptions opts;
  opts.K = 30;
  auto result =
      run_training(hard.mdp, practical_learner(hard.mdp, 0.5, 0.3), adv, opts, RngStream(80));
  fill_regret(result.log, hard.mdp, result.weights, result.policies);
  const TabularMdp tab = hard.mdp.to_tabular();
  const double opt_return = return_of_policy(tab, optimal_policy(tab).policy);
  double acc = 0.0;
  for (std::size_t k = 0; k < result.log.size(); ++k) {
    const double direct = opt_return - return_of_policy(tab, result.policies[k]);
    CHECK(result.log[k].gap == doctest::Approx(direct).epsilon(1e-9));
    acc += result.log[k].gap;
    CHECK(result.log[k].regret_partial == doctest::Approx(acc).epsilon(1e-12));
    CHECK(result.log[k].gap >= -1e-10);
  }
}

TEST_CASE("exact output evaluation agrees with its Monte-Carlo counterpart") {
  const HardInstanceK hard = hard_instance_K(3, 0.9, 0.05);
  FixedAdversary adv(hard.mdp.reward_weights);
  TrainingOptions opts;
  opts.K = 20;
  const auto result =
      run_training(hard.mdp, practical_learner(hard.mdp, 0.5, 0.3), adv, opts, RngStream(81));
  const double exact = evaluate_output(hard.mdp, result.policies);
  const TabularMdp tab = hard.mdp.to_tabular();
  double var = 0.0;
  for (const auto& pi : result.policies) {
    const double r = return_of_policy(tab, pi);
    var += (r - exact) * (r - exact);
  }
  var /= static_cast<double>(result.policies.size());
  RngStream rng(82);
  const long draws = 20000;
  const double mc = evaluate_output_mc(hard.mdp, result.policies, draws, rng);
  CHECK(std::abs(mc - exact) < 3.0 * std::sqrt(var / static_cast<double>(draws)) + 1e-12);
}

TEST_CASE("CSV format: pinned header and max-precision floats") {
  EpisodeRecord r;
  r.episode = 1;
  r.epoch = 2;
  r.steps_total = 3;
  r.episode_len = 4;
  r.regret_partial = 0.1;
  r.gap = 0.5;
  r.bonus_mean = 1.0;
  r.p_plus_mean = 0.0;
  r.log_det = 2.25;
  std::ostringstream out;
  write_csv(out, "r1", {r});
  CHECK(out.str() ==
        "run_id,episode,epoch,steps_total,episode_len,regret_partial,gap_k,bonus_mean,"
        "p_plus_mean,logdet\n"
        "r1,1,2,3,4,0.10000000000000001,0.5,1,0,2.25\n");
}

}  // TEST_SUITE
