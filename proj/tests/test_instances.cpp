#include <doctest.h>

#include <cmath>

#include "lmdp/instances.hpp"
#include "lmdp/oracles.hpp"

using namespace lmdp;

TEST_SUITE("instances") {

TEST_CASE("tabular embedding reproduces the explicit model exactly") {
  Mat k0(2, 2), k1(2, 2);
  k0 << 0.9, 0.1, 0.3, 0.7;
  k1 << 0.5, 0.5, 0.2, 0.8;
  Mat reward(2, 2);
  reward << 0.1, 0.8, 0.4, 0.0;
  Vec nu0(2);
  nu0 << 0.25, 0.75;
  const LinearMdp lin = tabular_to_linear({k0, k1}, reward, 0.9, nu0);
  CHECK(lin.dim() == 4);
  const TabularMdp back = lin.to_tabular();
  CHECK((back.reward - reward).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((back.kernel[0] - k0).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((back.kernel[1] - k1).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((back.nu0 - nu0).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("random mixture instances are valid and deterministic in the seed") {
  for (std::uint64_t seed : {1ULL, 7ULL, 99ULL}) {
    const LinearMdp a = random_mixture_linear_mdp(6, 8, 4, 0.9, seed);
    CHECK_NOTHROW(a.validate());
    const LinearMdp b = random_mixture_linear_mdp(6, 8, 4, 0.9, seed);
    CHECK((a.features.table - b.features.table).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.m_factor - b.m_factor).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.reward_weights - b.reward_weights).cwiseAbs().maxCoeff() == 0.0);
  }
  const LinearMdp c = random_mixture_linear_mdp(6, 8, 4, 0.9, 1);
  const LinearMdp d = random_mixture_linear_mdp(6, 8, 4, 0.9, 2);
  CHECK((c.features.table - d.features.table).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("reinforcement hard instance: closed forms match the exact oracle") {
  for (double gamma : {0.6, 0.9, 0.95}) {
    for (double frac : {0.0, 0.3, 1.0}) {
      const double eps = frac * (1.0 - gamma) / gamma;
      CAPTURE(gamma);
      CAPTURE(eps);
      const HardInstanceK inst = hard_instance_K(4, gamma, eps, 1);
      CHECK_NOTHROW(inst.mdp.validate());
      const TabularMdp tab = inst.mdp.to_tabular();

      const OccupancyMeasure mu_e = occupancy_measure(tab, inst.expert);
      CHECK(mu_e.state[0] == doctest::Approx(inst.nu_expert_x0).epsilon(1e-10));

      // Any policy that never plays a* has occupancy 2/3 at x0.
      const TabularPolicy bad = TabularPolicy::deterministic({0, 0}, 4);
      const OccupancyMeasure mu_b = occupancy_measure(tab, bad);
      CHECK(mu_b.state[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-10));

      const auto pv = policy_evaluation(tab, inst.expert);
      CHECK(pv.q(0, 1) == doctest::Approx(inst.q_expert_x0_star).epsilon(1e-10));

      // Action gap at x0 under the expert dominates the stated bound.
      if (eps > 0.0) {
        for (Index a = 0; a < 4; ++a) {
          if (a == inst.star) continue;
          CHECK(pv.q(0, inst.star) - pv.q(0, a) >= inst.gap_lower_bound - 1e-12);
        }
        // The expert is the unique optimal policy at x0.
        const OptimalSolution opt = optimal_policy(tab);
        CHECK(opt.policy.probs(0, inst.star) == 1.0);
      }
    }
  }
}

TEST_CASE("reinforcement hard instance: degenerate eps = 0 makes actions identical") {
  const HardInstanceK inst = hard_instance_K(3, 0.9, 0.0);
  const TabularMdp tab = inst.mdp.to_tabular();
  const auto pv = policy_evaluation(tab, TabularPolicy::uniform(2, 3));
  for (Index a = 1; a < 3; ++a) {
    CHECK(pv.q(0, a) == doctest::Approx(pv.q(0, 0)).epsilon(1e-12));
    CHECK(pv.q(1, a) == doctest::Approx(pv.q(1, 0)).epsilon(1e-12));
  }
}

TEST_CASE("hard instance parameter guards") {
  CHECK_THROWS_AS(hard_instance_K(4, 0.3, 0.01), ConfigError);      // gamma < 1/2
  CHECK_THROWS_AS(hard_instance_K(4, 0.9, 0.2), ConfigError);       // eps > (1-gamma)/gamma
  CHECK_THROWS_AS(hard_instance_K(1, 0.9, 0.01), ConfigError);      // single action
  CHECK_THROWS_AS(hard_instance_tau(4, 0.9, 0.01, 1.0, 2), ConfigError);  // bad variant
  CHECK_THROWS_AS(hard_instance_tau(4, 0.9, 0.01, -1.0, 0), ConfigError); // bad w_max
}

TEST_CASE("imitation hard instance: occupancy formula over a (gamma, eps) grid") {
  for (double gamma : {0.55, 0.8, 0.9}) {
    for (double frac : {0.1, 0.5, 0.9}) {
      const double eps = frac * (1.0 - gamma) / gamma;
      CAPTURE(gamma);
      CAPTURE(eps);
      for (int variant : {0, 1}) {
        const HardInstanceTau inst = hard_instance_tau(3, gamma, eps, 2.0, variant);
        CHECK_NOTHROW(inst.mdp.validate());
        const TabularMdp tab = inst.mdp.to_tabular();
        const OccupancyMeasure mu = occupancy_measure(tab, inst.expert);
        CHECK(mu.state[0] == doctest::Approx(inst.nu_expert_x0).epsilon(1e-10));
        if (variant == 1) CHECK(inst.nu_expert_x0 == doctest::Approx(0.5).epsilon(1e-12));
      }
      // General alpha formula against the exact solver.
      for (double alpha : {0.0, 0.25, 0.7, 1.0}) {
        const HardInstanceTau inst = hard_instance_tau(3, gamma, eps, 2.0, 0);
        TabularPolicy pi = TabularPolicy::uniform(2, 3);
        pi.probs.row(0) << alpha, (1.0 - alpha) / 2.0, (1.0 - alpha) / 2.0;
        const OccupancyMeasure mu = occupancy_measure(inst.mdp.to_tabular(), pi);
        CHECK(mu.state[0] == doctest::Approx(hard_tau_nu_x0(gamma, eps, alpha)).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("imitation hard instance: expert-vs-alpha suboptimality bound") {
  // nu(expert, x0) - nu(pi_alpha, x0) >= eps (1 - alpha) / (12 (1 - gamma))
  // ... times nothing else, on variant 0, for gamma >= 1/2.
  for (double gamma : {0.6, 0.85}) {
    const double eps = 0.6 * (1.0 - gamma) / gamma;
    for (double alpha : {0.0, 0.4, 0.9}) {
      const double diff = hard_tau_nu_x0(gamma, eps, 1.0) - hard_tau_nu_x0(gamma, eps, alpha);
      CHECK(diff >= eps * (1.0 - alpha) / (12.0 * (1.0 - gamma)) - 1e-12);
    }
  }
}

TEST_CASE("imitation hard instance: reward features are one-hot states") {
  const HardInstanceTau inst = hard_instance_tau(4, 0.9, 0.05, 1.5, 0, 2);
  CHECK(inst.phi_r.rows() == 8);
  CHECK(inst.phi_r.cols() == 2);
  for (Index x = 0; x < 2; ++x)
    for (Index a = 0; a < 4; ++a) {
      CHECK(inst.phi_r(x * 4 + a, x) == 1.0);
      CHECK(inst.phi_r(x * 4 + a, 1 - x) == 0.0);
    }
  // True reward reproduced by <phi_r, w_r_true>.
  const TabularMdp tab = inst.mdp.to_tabular();
  for (Index x = 0; x < 2; ++x)
    for (Index a = 0; a < 4; ++a)
      CHECK(inst.phi_r.row(x * 4 + a).dot(inst.w_r_true) ==
            doctest::Approx(tab.reward(x, a)).epsilon(1e-12));
}

TEST_CASE("combined reward/dynamics features preserve the model") {
  const HardInstanceTau inst = hard_instance_tau(3, 0.9, 0.05, 2.0, 0);
  const LinearMdp combined = concat_reward_features(inst.mdp, inst.phi_r, inst.w_r_true);
  CHECK(combined.dim() == 2 + inst.mdp.dim());
  const TabularMdp a = inst.mdp.to_tabular();
  const TabularMdp b = combined.to_tabular();
  CHECK((a.reward - b.reward).cwiseAbs().maxCoeff() < 1e-12);
  for (Index act = 0; act < 3; ++act)
    CHECK((a.kernel[act] - b.kernel[act]).cwiseAbs().maxCoeff() < 1e-12);
}

}  // TEST_SUITE
