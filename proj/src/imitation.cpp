#include "lmdp/imitation.hpp"

#include <algorithm>
#include <cmath>

namespace lmdp {

Vec estimate_expert_features(const ExpertDataset& data) {
  if (data.samples.rows() == 0) throw ConfigError("estimate_expert_features: empty dataset");
  return data.samples.colwise().mean().transpose();
}

Vec project_ball(const Vec& v, double radius) {
  if (!(radius > 0.0)) throw ConfigError("project_ball: radius must be positive");
  const double n = v.norm();
  if (n <= radius) return v;
  return v * (radius / n);
}

std::pair<Index, Index> sample_from_occupancy(const TabularMdp& mdp, const TabularPolicy& pi,
                                              RngStream& rng) {
  // Follow the chain from nu0; at each step the visited pair is the sample
  // with probability 1 - gamma, which is exactly the normalized discounted
  // occupancy of pi.
  Index x = rng.categorical(mdp.nu0);
  for (;;) {
    const Index a = rng.categorical(pi.probs.row(x).transpose());
    if (rng.uniform01() >= mdp.gamma) return {x, a};
    x = rng.categorical(mdp.kernel[a].row(x).transpose());
  }
}

ExpertDataset generate_expert_dataset(const TabularMdp& mdp, const TabularPolicy& expert,
                                      const Mat& phi_r, long tau, RngStream& rng) {
  if (tau < 1) throw ConfigError("generate_expert_dataset: tau must be at least 1");
  if (phi_r.rows() != mdp.n_states * mdp.n_actions)
    throw ConfigError("generate_expert_dataset: phi_r row count");
  // Exact occupancy once, then i.i.d. categorical draws over pairs.
  const OccupancyMeasure mu = occupancy_measure(mdp, expert);
  Vec flat(mdp.n_states * mdp.n_actions);
  for (Index x = 0; x < mdp.n_states; ++x)
    for (Index a = 0; a < mdp.n_actions; ++a)
      flat[x * mdp.n_actions + a] = std::max(0.0, mu.state_action(x, a));
  flat /= flat.sum();
  ExpertDataset data;
  data.samples = Mat(tau, phi_r.cols());
  for (long i = 0; i < tau; ++i) data.samples.row(i) = phi_r.row(rng.categorical(flat));
  return data;
}

void ogd_reward_step(OgdRewardState& state, const Vec& lambda_hat, const Vec& sampled_feature) {
  if (lambda_hat.size() != state.w.size() || sampled_feature.size() != state.w.size())
    throw ConfigError("ogd_reward_step: dimension mismatch");
  state.w = project_ball(state.w + state.eta_r * (lambda_hat - sampled_feature), state.w_max);
}

OgdAdversary::OgdAdversary(TabularMdp dynamics, Mat phi_r, Vec lambda_hat, double w_max,
                           double eta_r, Index combined_dim, double r_max)
    : dynamics_(std::move(dynamics)),
      phi_r_(std::move(phi_r)),
      lambda_hat_(std::move(lambda_hat)),
      combined_dim_(combined_dim),
      r_max_(r_max) {
  if (phi_r_.rows() != dynamics_.n_states * dynamics_.n_actions)
    throw ConfigError("OgdAdversary: phi_r row count");
  if (lambda_hat_.size() != phi_r_.cols()) throw ConfigError("OgdAdversary: lambda_hat dimension");
  if (combined_dim_ < phi_r_.cols()) throw ConfigError("OgdAdversary: combined dimension too small");
  ogd_.w = Vec::Zero(phi_r_.cols());
  ogd_.w_max = w_max;
  ogd_.eta_r = eta_r;
}

Vec OgdAdversary::next_weights(long, const std::vector<TabularPolicy>& policies,
                               const std::vector<Vec>&, RngStream& rng) {
  if (policies.empty()) throw ConfigError("OgdAdversary: needs the current policy");
  // One occupancy sample of the current policy drives the ascent step.
  const auto [x, a] = sample_from_occupancy(dynamics_, policies.back(), rng);
  ogd_reward_step(ogd_, lambda_hat_, phi_r_.row(x * dynamics_.n_actions + a).transpose());
  iterates_.push_back(ogd_.w);
  // Embed into the combined weight space (reward block first) and clip the
  // emitted copy into [0, r_max] so the simulator's reward range holds.
  Vec emitted = Vec::Zero(combined_dim_);
  emitted.head(ogd_.w.size()) = ogd_.w;
  for (Index i = 0; i < ogd_.w.size(); ++i) {
    if (emitted[i] < 0.0 || emitted[i] > r_max_) {
      ++clip_events_;
      emitted[i] = std::clamp(emitted[i], 0.0, r_max_);
    }
  }
  return emitted;
}

ImitationResult imitation_run(const LinearMdp& combined, const Mat& phi_r,
                           const TabularPolicy& expert, const ImitationConfig& cfg,
                           LearnerState learner, RngStream run_rng) {
  if (cfg.K < 1) throw ConfigError("imitation_run: K must be at least 1");
  combined.validate();
  const TabularMdp true_tab = combined.to_tabular();

  ImitationResult result;
  // Expert feature estimate: sample mean of tau draws, or the exact
  // occupancy average when tau is absent ("infinite data").
  const OccupancyMeasure mu_e = occupancy_measure(true_tab, expert);
  if (cfg.tau) {
    RngStream data_rng = run_rng.child(100);
    const ExpertDataset data =
        generate_expert_dataset(true_tab, expert, phi_r, *cfg.tau, data_rng);
    result.lambda_hat = estimate_expert_features(data);
  } else {
    Vec exact = Vec::Zero(phi_r.cols());
    for (Index x = 0; x < true_tab.n_states; ++x)
      for (Index a = 0; a < true_tab.n_actions; ++a)
        exact += mu_e.state_action(x, a) * phi_r.row(x * true_tab.n_actions + a).transpose();
    result.lambda_hat = exact;
  }

  double b_r = 0.0;
  for (Index r = 0; r < phi_r.rows(); ++r) b_r = std::max(b_r, phi_r.row(r).norm());
  const double w_max = combined.w_max;
  const double eta_r =
      cfg.eta_r > 0.0 ? cfg.eta_r : w_max / (std::max(b_r, 1e-12) * std::sqrt(double(cfg.K)));

  // Dynamics handed to the adversary with rewards zeroed: it may read the
  // kernel (trajectory access) but never the true reward.
  TabularMdp dynamics = true_tab;
  dynamics.reward.setZero();
  OgdAdversary adversary(std::move(dynamics), phi_r, result.lambda_hat, w_max, eta_r,
                         combined.dim(), combined.r_max);

  TrainingOptions opt;
  opt.K = cfg.K;
  opt.episode_cap = cfg.episode_cap;
  TrainingResult training =
      run_training(combined, std::move(learner), adversary, opt, run_rng.child(200));

  // Suboptimality bookkeeping under the *true* reward, expert comparator.
  fill_regret(training.log, combined, std::vector<Vec>(cfg.K, combined.reward_weights),
              training.policies, expert);
  result.expert_return = return_of_policy(true_tab, expert);
  double acc = 0.0;
  for (const TabularPolicy& pi : training.policies) acc += return_of_policy(true_tab, pi);
  result.average_return = acc / static_cast<double>(cfg.K);
  result.suboptimality = result.expert_return - result.average_return;
  result.policies = std::move(training.policies);
  result.log = std::move(training.log);
  result.reward_iterates = adversary.iterates();
  result.emitted_weights = std::move(training.weights);
  result.clip_events = adversary.clip_events();
  result.output_index = training.output_index;
  return result;
}

}  // namespace lmdp
