#pragma once

#include <nlohmann/json_fwd.hpp>

#include "lmdp/learner.hpp"
#include "lmdp/mdp.hpp"

namespace lmdp {

using json = nlohmann::json;

/// Linear MDP as JSON with fields
/// {d, n_states, n_actions, gamma, r_max, nu0, features, m_factor, w};
/// matrices are nested row-major arrays.
json to_json(const LinearMdp& mdp);
/// Parse + validate; throws ConfigError naming the offending field.
LinearMdp linear_mdp_from_json(const json& j);

/// Learner checkpoint: hyperparameters, compact policy (theta_sum,
/// episode_count, anchor_inv), current theta, epoch counters, and dataset
/// length.  Enough to resume acting and to audit a run.
json checkpoint_json(const LearnerState& state);
/// Rebuild the playable compact policy from a checkpoint.
CompactPolicy policy_from_checkpoint(const json& j);

}  // namespace lmdp
