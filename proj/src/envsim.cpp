#include "lmdp/envsim.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace lmdp {

namespace {

// Child-stream labels under one run stream.
constexpr std::uint64_t kAdversaryStream = 1;
constexpr std::uint64_t kEpisodeStream = 2;
constexpr std::uint64_t kOutputStream = 3;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<TrajectoryStep> run_episode(const TabularMdp& mdp, const ActionSampler& act,
                                        RngStream episode_rng, std::optional<long> cap) {
  if (cap && *cap < 1) throw ConfigError("run_episode: cap must be at least 1");
  std::vector<TrajectoryStep> steps;
  Index x = episode_rng.child(0).categorical(mdp.nu0);
  for (long t = 1;; ++t) {
    RngStream step_rng = episode_rng.child(static_cast<std::uint64_t>(t));
    TrajectoryStep step;
    step.state = x;
    step.action = act(x, step_rng);
    step.reward = mdp.reward(step.state, step.action);
    // Stop if the cap is hit; otherwise flip the continuation coin: with
    // probability 1 - gamma the process resets from nu0.
    const bool capped = cap && t >= *cap;
    const bool reset = !capped && step_rng.uniform01() >= mdp.gamma;
    step.terminal = capped || reset;
    if (step.terminal) {
      step.next_state = step_rng.categorical(mdp.nu0);
      steps.push_back(step);
      return steps;
    }
    step.next_state = step_rng.categorical(mdp.kernel[step.action].row(x).transpose());
    steps.push_back(step);
    x = step.next_state;
  }
}

CyclingAdversary::CyclingAdversary(std::vector<Vec> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ConfigError("CyclingAdversary: empty weight list");
}

Vec CyclingAdversary::next_weights(long k, const std::vector<TabularPolicy>&,
                                   const std::vector<Vec>&, RngStream&) {
  return weights_[static_cast<std::size_t>(k - 1) % weights_.size()];
}

TrainingResult run_training(const LinearMdp& mdp, LearnerState state, RewardAdversary& adversary,
                            const TrainingOptions& opt, RngStream run_rng) {
  if (opt.K < 1) throw ConfigError("run_training: K must be at least 1");
  mdp.validate();
  if (state.features.table.rows() != mdp.features.table.rows() ||
      state.features.dim() != mdp.dim() ||
      (state.features.table - mdp.features.table).cwiseAbs().maxCoeff() != 0.0)
    throw ConfigError("run_training: learner feature map does not match the environment");

  TrainingResult result;
  result.log.reserve(opt.K);
  result.policies.reserve(opt.K);
  result.weights.reserve(opt.K);
  RngStream adv_rng = run_rng.child(kAdversaryStream);
  const RngStream episodes_rng = run_rng.child(kEpisodeStream);

  for (long k = 1; k <= opt.K; ++k) {
    // The policy that will play this episode, in explicit form for the
    // adversary protocol and the post-hoc regret oracle.
    result.policies.push_back(policy_table(state.policy, state.features));
    const Vec w_k =
        adversary.next_weights(k, result.policies, result.weights, adv_rng);
    if (w_k.size() != mdp.dim())
      throw ModelError("run_training: adversary weight dimension mismatch");
    const TabularMdp tab_k = mdp.to_tabular(w_k);  // validates the reward range
    result.weights.push_back(w_k);

    const CompactPolicy& policy = state.policy;
    const FeatureMap& fm = state.features;
    const auto sampler = [&policy, &fm](Index x, RngStream& rng) {
      return policy.act(fm.state_block(x), rng);
    };
    const std::vector<TrajectoryStep> steps =
        run_episode(tab_k, sampler, episodes_rng.child(static_cast<std::uint64_t>(k)),
                    opt.episode_cap);

    std::vector<Transition> transitions;
    transitions.reserve(steps.size());
    for (const TrajectoryStep& s : steps)
      if (!s.terminal) transitions.push_back({s.state, s.action, s.next_state});
    const EpisodeUpdateInfo info =
        process_episode(state, transitions, static_cast<long>(steps.size()), w_k);

    EpisodeRecord rec;
    rec.episode = k;
    rec.epoch = info.epoch;
    rec.steps_total = state.steps_total;
    rec.episode_len = static_cast<long>(steps.size());
    rec.bonus_mean = info.bonus_mean;
    rec.p_plus_mean = info.p_plus_mean;
    rec.log_det = info.log_det;
    result.log.push_back(rec);
    if (opt.observer) opt.observer(state, info);
  }
  result.output_index = run_rng.child(kOutputStream).uniform_index(opt.K);
  result.state = std::move(state);
  return result;
}

void fill_regret(std::vector<EpisodeRecord>& log, const LinearMdp& mdp,
                 const std::vector<Vec>& weights, const std::vector<TabularPolicy>& policies,
                 const std::optional<TabularPolicy>& comparator) {
  const std::vector<double> gaps = regret_curve(mdp, weights, policies, comparator);
  if (gaps.size() != log.size()) throw ConfigError("fill_regret: log length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    acc += gaps[i];
    log[i].gap = gaps[i];
    log[i].regret_partial = acc;
  }
}

double evaluate_output(const LinearMdp& mdp, const std::vector<TabularPolicy>& policies) {
  if (policies.empty()) throw ConfigError("evaluate_output: no policies");
  const TabularMdp tab = mdp.to_tabular();
  double acc = 0.0;
  for (const TabularPolicy& pi : policies) acc += return_of_policy(tab, pi);
  return acc / static_cast<double>(policies.size());
}

double evaluate_output_mc(const LinearMdp& mdp, const std::vector<TabularPolicy>& policies,
                          long n_draws, RngStream& rng) {
  if (policies.empty()) throw ConfigError("evaluate_output_mc: no policies");
  if (n_draws < 1) throw ConfigError("evaluate_output_mc: need at least one draw");
  const TabularMdp tab = mdp.to_tabular();
  // Exact return per policy, sampled at uniformly drawn output indices.
  std::vector<double> returns(policies.size());
  for (std::size_t i = 0; i < policies.size(); ++i) returns[i] = return_of_policy(tab, policies[i]);
  double acc = 0.0;
  for (long i = 0; i < n_draws; ++i)
    acc += returns[static_cast<std::size_t>(rng.uniform_index(static_cast<Index>(policies.size())))];
  return acc / static_cast<double>(n_draws);
}

void write_csv(std::ostream& out, const std::string& run_id,
               const std::vector<EpisodeRecord>& log) {
  out << "run_id,episode,epoch,steps_total,episode_len,regret_partial,gap_k,bonus_mean,"
         "p_plus_mean,logdet\n";
  for (const EpisodeRecord& r : log) {
    out << run_id << ',' << r.episode << ',' << r.epoch << ',' << r.steps_total << ','
        << r.episode_len << ',' << format_double(r.regret_partial) << ','
        << format_double(r.gap) << ',' << format_double(r.bonus_mean) << ','
        << format_double(r.p_plus_mean) << ',' << format_double(r.log_det) << '\n';
  }
}

}  // namespace lmdp
