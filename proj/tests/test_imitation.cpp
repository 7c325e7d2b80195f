#include <doctest.h>

#include <cmath>
#include <utility>
#include <vector>

#include "lmdp/harness.hpp"
#include "lmdp/imitation.hpp"
#include "lmdp/instances.hpp"
#include "lmdp/oracles.hpp"

using namespace lmdp;

namespace {

LearnerState make_imitation_learner(const LinearMdp& combined, long K, double eta, double beta) {
  Hyperparams hp;
  hp.gamma = combined.gamma;
  hp.r_max = combined.r_max;
  hp.eta = eta;
  hp.beta = beta;
  hp.alpha = 2.0 * std::log(static_cast<double>(K));
  hp.omega = std::log(static_cast<double>(K));
  return LearnerState::init(hp, combined.features);
}

}  // namespace

TEST_SUITE("imitation") {

TEST_CASE("expert feature estimate is the sample mean; empty dataset rejected") {
  ExpertDataset data;
  data.samples = Mat(3, 2);
  data.samples << 1.0, 0.0, 0.0, 1.0, 1.0, 1.0;
  const Vec mean = estimate_expert_features(data);
  CHECK(mean[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(mean[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  ExpertDataset empty;
  empty.samples = Mat(0, 2);
  CHECK_THROWS_AS(estimate_expert_features(empty), ConfigError);
}

TEST_CASE("ball projection: identity inside, radial scaling outside") {
  Vec inside(2);
  inside << 0.3, 0.4;  // norm 0.5
  CHECK((project_ball(inside, 0.5) - inside).cwiseAbs().maxCoeff() == 0.0);
  Vec outside(2);
  outside << 3.0, 4.0;  // norm 5
  const Vec projected = project_ball(outside, 2.0);
  CHECK(projected.norm() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(projected[0] * outside[1] == doctest::Approx(projected[1] * outside[0]).epsilon(1e-15));
  CHECK_THROWS_AS(project_ball(inside, 0.0), ConfigError);
}

TEST_CASE("ascent step closed form with and without projection") {
  OgdRewardState state;
  state.w = Vec::Zero(2);
  state.eta_r = 0.5;
  state.w_max = 1.0;
  Vec lambda(2), f(2);
  lambda << 1.0, 0.0;
  f << 0.0, 1.0;
  ogd_reward_step(state, lambda, f);
  CHECK(state.w[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(state.w[1] == doctest::Approx(-0.5).epsilon(1e-15));
  // Second identical step leaves the ball: norm sqrt(2) -> radius 1.
  ogd_reward_step(state, lambda, f);
  CHECK(state.w.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(state.w[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(ogd_reward_step(state, Vec::Zero(3), f), ConfigError);
}

TEST_CASE("occupancy sampler: gamma = 0 gives the initial-state law exactly") {
  TabularMdp mdp = hard_instance_tau(3, 0.9, 0.05, 1.0, 0).mdp.to_tabular();
  mdp.gamma = 0.0;
  const TabularPolicy pi = TabularPolicy::uniform(2, 3);
  RngStream rng(31);
  Mat counts = Mat::Zero(2, 3);
  const int n = 30000;
  for (int i = 0; i < n; ++i) {
    const auto [x, a] = sample_from_occupancy(mdp, pi, rng);
    counts(x, a) += 1.0;
  }
  for (Index x = 0; x < 2; ++x)
    for (Index a = 0; a < 3; ++a) {
      const double p = mdp.nu0[x] * pi.probs(x, a);
      const double sigma = std::sqrt(p * (1.0 - p) / n);
      CHECK(std::abs(counts(x, a) / n - p) < 3.0 * sigma + 1e-12);
    }
}

TEST_CASE("occupancy sampler matches the exact occupancy in total variation") {
  const HardInstanceTau inst = hard_instance_tau(3, 0.9, 0.05, 1.0, 0);
  const TabularMdp tab = inst.mdp.to_tabular();
  TabularPolicy pi;
  pi.probs = Mat(2, 3);
  pi.probs << 0.6, 0.3, 0.1, 0.2, 0.2, 0.6;
  const OccupancyMeasure mu = occupancy_measure(tab, pi);
  RngStream rng(32);
  Mat counts = Mat::Zero(2, 3);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto [x, a] = sample_from_occupancy(tab, pi, rng);
    counts(x, a) += 1.0;
  }
  const double tv = 0.5 * (counts / n - mu.state_action).cwiseAbs().sum();
  CHECK(tv < 0.015);
  // The sampled reward feature is an unbiased estimate of Phi' mu (3 sigma).
  Vec mean_feature = Vec::Zero(2);
  RngStream rng2(33);
  for (int i = 0; i < n; ++i) {
    const auto [x, a] = sample_from_occupancy(tab, pi, rng2);
    mean_feature += inst.phi_r.row(x * 3 + a).transpose();
  }
  mean_feature /= n;
  Vec exact = Vec::Zero(2);
  for (Index x = 0; x < 2; ++x)
    for (Index a = 0; a < 3; ++a)
      exact += mu.state_action(x, a) * inst.phi_r.row(x * 3 + a).transpose();
  for (Index j = 0; j < 2; ++j) {
    const double sigma = std::sqrt(exact[j] * (1.0 - exact[j]) / n);
    CHECK(std::abs(mean_feature[j] - exact[j]) < 3.0 * sigma + 1e-12);
  }
}

TEST_CASE("expert dataset rows are reward-feature rows with the right mean") {
  const HardInstanceTau inst = hard_instance_tau(2, 0.9, 0.05, 1.0, 0);
  const TabularMdp tab = inst.mdp.to_tabular();
  RngStream rng(34);
  const ExpertDataset data = generate_expert_dataset(tab, inst.expert, inst.phi_r, 20000, rng);
  REQUIRE(data.samples.rows() == 20000);
  // Every row must be one of the phi_r rows (here: one-hot on the state).
  for (Index i = 0; i < data.samples.rows(); ++i) {
    const double s = data.samples.row(i).sum();
    CHECK(s == 1.0);
    CHECK(data.samples.row(i).maxCoeff() == 1.0);
  }
  const Vec mean = estimate_expert_features(data);
  const OccupancyMeasure mu = occupancy_measure(tab, inst.expert);
  // lambda = Phi' mu_E; coordinate 0 is the expert's x0 occupancy.
  CHECK(mu.state[0] == doctest::Approx(inst.nu_expert_x0).epsilon(1e-10));
  for (Index j = 0; j < 2; ++j) {
    const double p = mu.state[j];
    const double sigma = std::sqrt(p * (1.0 - p) / 20000.0);
    CHECK(std::abs(mean[j] - p) < 3.0 * sigma);
  }
  CHECK_THROWS_AS(generate_expert_dataset(tab, inst.expert, inst.phi_r, 0, rng), ConfigError);
}

TEST_CASE("expert feature estimation error decays like 1/sqrt(tau)") {
  const HardInstanceTau inst = hard_instance_tau(3, 0.9, 0.05, 1.0, 0);
  const TabularMdp tab = inst.mdp.to_tabular();
  const OccupancyMeasure mu = occupancy_measure(tab, inst.expert);
  Vec exact = Vec::Zero(2);
  for (Index x = 0; x < 2; ++x)
    for (Index a = 0; a < 3; ++a)
      exact += mu.state_action(x, a) * inst.phi_r.row(x * 3 + a).transpose();
  RngStream rng(35);
  const std::vector<long> taus = {16, 64, 256, 1024};
  std::vector<double> xs, errs;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    double acc = 0.0;
    const int repeats = 60;
    for (int r = 0; r < repeats; ++r) {
      RngStream draw = rng.child(i * 1000 + static_cast<std::uint64_t>(r));
      const ExpertDataset data =
          generate_expert_dataset(tab, inst.expert, inst.phi_r, taus[i], draw);
      acc += (estimate_expert_features(data) - exact).norm();
    }
    xs.push_back(static_cast<double>(taus[i]));
    errs.push_back(acc / repeats);
  }
  const SlopeFit fit = fit_loglog(xs, errs);
  CHECK(fit.slope > -0.65);
  CHECK(fit.slope < -0.35);
}

TEST_CASE("adversary emits clipped weights on the reward block only") {
  const HardInstanceTau inst = hard_instance_tau(2, 0.9, 0.05, 1.0, 1);
  const LinearMdp combined = concat_reward_features(inst.mdp, inst.phi_r, inst.w_r_true);
  ImitationConfig cfg;
  cfg.K = 60;
  cfg.tau = std::nullopt;
  const auto result = imitation_run(combined, inst.phi_r, inst.expert, cfg,
                                 make_imitation_learner(combined, cfg.K, 1.0, 0.3), RngStream(36));
  REQUIRE(result.emitted_weights.size() == 60);
  REQUIRE(result.reward_iterates.size() == 60);
  long recomputed_clips = 0;
  for (std::size_t k = 0; k < 60; ++k) {
    const Vec& emitted = result.emitted_weights[k];
    const Vec& iterate = result.reward_iterates[k];
    REQUIRE(emitted.size() == combined.dim());
    // Dynamics block never carries reward signal.
    CHECK(emitted.tail(combined.dim() - 2).cwiseAbs().maxCoeff() == 0.0);
    for (Index j = 0; j < 2; ++j) {
      const double clamped = std::min(std::max(iterate[j], 0.0), combined.r_max);
      CHECK(emitted[j] == clamped);
      if (iterate[j] != clamped) ++recomputed_clips;
    }
    CHECK(iterate.norm() <= inst.w_r_true.norm() + 1e-12);  // ball projection
  }
  CHECK(result.clip_events == recomputed_clips);
  CHECK(recomputed_clips > 0);  // the OGD walks negative on the unrewarded state
}

TEST_CASE("suboptimality bookkeeping and the exact regret decomposition") {
  const HardInstanceTau inst = hard_instance_tau(3, 0.9, 0.05, 1.0, 0);
  const LinearMdp combined = concat_reward_features(inst.mdp, inst.phi_r, inst.w_r_true);
  const TabularMdp tab = combined.to_tabular();
  ImitationConfig cfg;
  cfg.K = 40;
  cfg.tau = 200;
  const auto result = imitation_run(combined, inst.phi_r, inst.expert, cfg,
                                 make_imitation_learner(combined, cfg.K, 1.0, 0.3), RngStream(37));
  REQUIRE(result.log.size() == 40);
  // suboptimality = expert return - average return, and the per-episode gaps
  // telescope to K * suboptimality.
  CHECK(result.suboptimality ==
        doctest::Approx(result.expert_return - result.average_return).epsilon(1e-12));
  CHECK(result.log.back().regret_partial ==
        doctest::Approx(40.0 * result.suboptimality).epsilon(1e-8));
  // Exact decomposition: <r, mu_E - mu_k> splits into the played-reward term
  // plus the feature-mismatch term, episode by episode.
  const OccupancyMeasure mu_e = occupancy_measure(tab, inst.expert);
  auto flat_features = [&](const OccupancyMeasure& mu) {
    Vec v = Vec::Zero(2);
    for (Index x = 0; x < 2; ++x)
      for (Index a = 0; a < 3; ++a)
        v += mu.state_action(x, a) * inst.phi_r.row(x * 3 + a).transpose();
    return v;
  };
  const Vec lam_e = flat_features(mu_e);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t k = 0; k < 40; ++k) {
    const OccupancyMeasure mu_k = occupancy_measure(tab, result.policies[k]);
    const Vec lam_k = flat_features(mu_k);
    const Vec& w_k = result.reward_iterates[k];
    lhs += (1.0 - tab.gamma) * result.log[k].gap;
    const double played = w_k.dot(lam_e - lam_k);
    const double mismatch = (lam_k - lam_e).dot(w_k - inst.w_r_true);
    rhs += played + mismatch;
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
}

TEST_CASE("exact expert features reproduce the occupancy average; tau draws are reproducible") {
  const HardInstanceTau inst = hard_instance_tau(2, 0.9, 0.05, 1.0, 0);
  const LinearMdp combined = concat_reward_features(inst.mdp, inst.phi_r, inst.w_r_true);
  const TabularMdp tab = combined.to_tabular();
  ImitationConfig cfg;
  cfg.K = 10;
  cfg.tau = std::nullopt;
  const auto exact_run = imitation_run(combined, inst.phi_r, inst.expert, cfg,
                                    make_imitation_learner(combined, cfg.K, 1.0, 0.3), RngStream(38));
  const OccupancyMeasure mu_e = occupancy_measure(tab, inst.expert);
  Vec expected = Vec::Zero(2);
  for (Index x = 0; x < 2; ++x)
    for (Index a = 0; a < 2; ++a)
      expected += mu_e.state_action(x, a) * inst.phi_r.row(x * 2 + a).transpose();
  CHECK((exact_run.lambda_hat - expected).cwiseAbs().maxCoeff() < 1e-12);

  cfg.tau = 50;
  const auto run_a = imitation_run(combined, inst.phi_r, inst.expert, cfg,
                                make_imitation_learner(combined, cfg.K, 1.0, 0.3), RngStream(39));
  const auto run_b = imitation_run(combined, inst.phi_r, inst.expert, cfg,
                                make_imitation_learner(combined, cfg.K, 1.0, 0.3), RngStream(39));
  CHECK((run_a.lambda_hat - run_b.lambda_hat).cwiseAbs().maxCoeff() == 0.0);
  CHECK(run_a.suboptimality == run_b.suboptimality);
  CHECK(run_a.clip_events == run_b.clip_events);
}

TEST_CASE("default ascent rate is overridable") {
  const HardInstanceTau inst = hard_instance_tau(2, 0.9, 0.05, 1.0, 0);
  const LinearMdp combined = concat_reward_features(inst.mdp, inst.phi_r, inst.w_r_true);
  ImitationConfig cfg;
  cfg.K = 15;
  cfg.tau = std::nullopt;
  const auto default_rate = imitation_run(combined, inst.phi_r, inst.expert, cfg,
                                       make_imitation_learner(combined, cfg.K, 1.0, 0.3), RngStream(40));
  cfg.eta_r = 7.0;
  const auto fast_rate = imitation_run(combined, inst.phi_r, inst.expert, cfg,
                                    make_imitation_learner(combined, cfg.K, 1.0, 0.3), RngStream(40));
  // Same sample path, different step size: first iterates differ in scale.
  CHECK(default_rate.reward_iterates[0].norm() < fast_rate.reward_iterates[0].norm());
}

}  // TEST_SUITE
