#include "lmdp/serialize.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace lmdp {

namespace {

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vec& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

const json& field(const json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end()) throw ConfigError(std::string("missing field '") + name + "'");
  return *it;
}

Mat matrix_from_json(const json& j, const char* name, Index rows, Index cols) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows)
    throw ConfigError(std::string("field '") + name + "' must be an array of " +
                      std::to_string(rows) + " rows");
  Mat m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw ConfigError(std::string("field '") + name + "' row " + std::to_string(r) +
                        " must have " + std::to_string(cols) + " entries");
    for (Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Vec vector_from_json(const json& j, const char* name, Index size) {
  if (!j.is_array() || static_cast<Index>(j.size()) != size)
    throw ConfigError(std::string("field '") + name + "' must be an array of length " +
                      std::to_string(size));
  Vec v(size);
  for (Index i = 0; i < size; ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

}  // namespace

json to_json(const LinearMdp& mdp) {
  json j;
  j["d"] = mdp.dim();
  j["n_states"] = mdp.n_states;
  j["n_actions"] = mdp.n_actions;
  j["gamma"] = mdp.gamma;
  j["r_max"] = mdp.r_max;
  j["nu0"] = vector_to_json(mdp.nu0);
  j["features"] = matrix_to_json(mdp.features.table);
  j["m_factor"] = matrix_to_json(mdp.m_factor);
  j["w"] = vector_to_json(mdp.reward_weights);
  return j;
}

LinearMdp linear_mdp_from_json(const json& j) {
  try {
    LinearMdp mdp;
    const Index d = field(j, "d").get<Index>();
    mdp.n_states = field(j, "n_states").get<Index>();
    mdp.n_actions = field(j, "n_actions").get<Index>();
    mdp.gamma = field(j, "gamma").get<double>();
    mdp.r_max = field(j, "r_max").get<double>();
    if (d < 1 || mdp.n_states < 1 || mdp.n_actions < 1)
      throw ConfigError("model dimensions must be positive");
    mdp.nu0 = vector_from_json(field(j, "nu0"), "nu0", mdp.n_states);
    mdp.features.n_states = mdp.n_states;
    mdp.features.n_actions = mdp.n_actions;
    mdp.features.table =
        matrix_from_json(field(j, "features"), "features", mdp.n_states * mdp.n_actions, d);
    mdp.m_factor = matrix_from_json(field(j, "m_factor"), "m_factor", mdp.n_states, d);
    mdp.reward_weights = vector_from_json(field(j, "w"), "w", d);
    double bound = 0.0;
    for (Index r = 0; r < mdp.features.table.rows(); ++r)
      bound = std::max(bound, mdp.features.table.row(r).norm());
    mdp.features.bound = std::max(bound, 1e-12);
    mdp.w_max = std::max(mdp.reward_weights.norm(), 1e-12);
    mdp.validate();
    return mdp;
  } catch (const ModelError& e) {
    throw ConfigError(std::string("invalid linear MDP: ") + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid linear MDP JSON: ") + e.what());
  }
}

json checkpoint_json(const LearnerState& state) {
  json j;
  j["hyperparams"] = {{"gamma", state.hp.gamma},   {"r_max", state.hp.r_max},
                      {"eta", state.hp.eta},       {"beta", state.hp.beta},
                      {"alpha", state.hp.alpha},   {"omega", state.hp.omega}};
  j["theta_sum"] = vector_to_json(state.policy.theta_sum);
  j["episode_count"] = state.policy.episode_count;
  j["theta"] = vector_to_json(state.value_fn.initial ? Vec::Zero(state.features.dim()).eval()
                                                     : state.value_fn.theta);
  j["anchor_inv"] = matrix_to_json(state.policy.anchor_inv);
  j["epoch"] = state.epoch;
  j["epoch_start_episode"] = state.epoch_start_episode;
  j["epoch_start_step"] = state.epoch_start_step;
  j["episode"] = state.episode;
  j["dataset_length"] = state.n_transitions;
  j["steps_total"] = state.steps_total;
  j["zero_bonus"] = state.zero_bonus;
  j["zero_ascension"] = state.zero_ascension;
  return j;
}

CompactPolicy policy_from_checkpoint(const json& j) {
  try {
    const json& hp = field(j, "hyperparams");
    CompactPolicy pi;
    pi.eta = field(hp, "eta").get<double>();
    pi.gamma = field(hp, "gamma").get<double>();
    pi.r_max = field(hp, "r_max").get<double>();
    pi.beta = field(hp, "beta").get<double>();
    pi.alpha = field(hp, "alpha").get<double>();
    pi.omega = field(hp, "omega").get<double>();
    const json& theta_sum = field(j, "theta_sum");
    const Index d = static_cast<Index>(theta_sum.size());
    if (d < 1) throw ConfigError("checkpoint: empty theta_sum");
    pi.theta_sum = vector_from_json(theta_sum, "theta_sum", d);
    pi.episode_count = field(j, "episode_count").get<long>();
    pi.anchor_inv = matrix_from_json(field(j, "anchor_inv"), "anchor_inv", d, d);
    pi.zero_bonus = j.value("zero_bonus", false);
    pi.zero_ascension = j.value("zero_ascension", false);
    return pi;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid checkpoint JSON: ") + e.what());
  }
}

}  // namespace lmdp
