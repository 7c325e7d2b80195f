#include "lmdp/harness.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "lmdp/augmented.hpp"
#include "lmdp/envsim.hpp"
#include "lmdp/imitation.hpp"
#include "lmdp/instances.hpp"
#include "lmdp/learner.hpp"
#include "lmdp/oracles.hpp"
#include "lmdp/serialize.hpp"

namespace lmdp {

namespace fs = std::filesystem;
using json = nlohmann::json;

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ConfigError("fit_loglog: length mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  if (lx.size() < 2) throw ConfigError("fit_loglog: need at least two positive samples");
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) throw ConfigError("fit_loglog: degenerate abscissae");
  SlopeFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double rss = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (fit.intercept + fit.slope * lx[i]);
    rss += e * e;
  }
  fit.residual = std::sqrt(rss / n);
  return fit;
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like key.path=value: " + assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json* node = &config;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigError("override has an empty path segment: " + assignment);
    parts.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = &((*node)[parts[i]]);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;  // plain string
  }
  (*node)[parts.back()] = std::move(value);
}

SlopeFit slope_from_csv(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open CSV file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV file: " + path);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  long col = -1, episode_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == column) col = static_cast<long>(i);
    if (header[i] == "episode") episode_col = static_cast<long>(i);
  }
  if (col < 0) throw ConfigError("CSV has no column named '" + column + "'");
  if (episode_col < 0) throw ConfigError("CSV has no 'episode' column");
  std::vector<double> xs, ys;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (static_cast<long>(cells.size()) <= std::max(col, episode_col))
      throw ConfigError("CSV row has too few columns");
    xs.push_back(std::stod(cells[static_cast<std::size_t>(episode_col)]));
    ys.push_back(std::stod(cells[static_cast<std::size_t>(col)]));
  }
  return fit_loglog(xs, ys);
}

namespace {

struct BuiltInstance {
  LinearMdp mdp;
  std::optional<HardInstanceTau> tau_inst;  // imitation extras
  std::optional<TabularPolicy> expert;
  std::string type;
};

const json& field(const json& j, const char* name, const char* where) {
  const auto it = j.find(name);
  if (it == j.end())
    throw ConfigError(std::string("config: missing '") + name + "' in " + where);
  return *it;
}

BuiltInstance build_instance(const json& cfg) {
  BuiltInstance out;
  out.type = field(cfg, "type", "instance").get<std::string>();
  if (out.type == "hard_k") {
    const HardInstanceK inst = hard_instance_K(
        field(cfg, "n_actions", "instance").get<Index>(),
        field(cfg, "gamma", "instance").get<double>(), field(cfg, "eps", "instance").get<double>(),
        cfg.value("star", 0));
    out.mdp = inst.mdp;
    out.expert = inst.expert;
  } else if (out.type == "hard_tau") {
    HardInstanceTau inst = hard_instance_tau(
        field(cfg, "n_actions", "instance").get<Index>(),
        field(cfg, "gamma", "instance").get<double>(), field(cfg, "eps", "instance").get<double>(),
        cfg.value("w_max", 1.0), cfg.value("variant", 0), cfg.value("star", 0));
    out.mdp = inst.mdp;
    out.expert = inst.expert;
    out.tau_inst = std::move(inst);
  } else if (out.type == "random_mixture") {
    out.mdp = random_mixture_linear_mdp(
        field(cfg, "d", "instance").get<Index>(), field(cfg, "n_states", "instance").get<Index>(),
        field(cfg, "n_actions", "instance").get<Index>(),
        field(cfg, "gamma", "instance").get<double>(), cfg.value("seed", 1));
  } else if (out.type == "file") {
    const std::string path = field(cfg, "path", "instance").get<std::string>();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file: " + path);
    json doc;
    try {
      in >> doc;
    } catch (const json::exception& e) {
      throw ConfigError(std::string("model file is not valid JSON: ") + e.what());
    }
    out.mdp = linear_mdp_from_json(doc);
  } else {
    throw ConfigError("unknown instance type: " + out.type);
  }
  return out;
}

struct LearnerSetup {
  Hyperparams hp;
  long K = 0;
  std::optional<long> episode_cap;
  bool exact_model = false;
  bool zero_bonus = false;
  bool zero_ascension = false;
  long refresh_period = 1000;
  double delta = 0.1;
};

LearnerSetup resolve_learner(const json& cfg, const LinearMdp& mdp) {
  LearnerSetup setup;
  setup.K = field(cfg, "K", "learner").get<long>();
  if (setup.K < 1) throw ConfigError("config: learner.K must be at least 1");
  setup.delta = cfg.value("delta", 0.1);
  setup.exact_model = cfg.value("exact_model", false);
  setup.zero_bonus = cfg.value("zero_bonus", false);
  setup.zero_ascension = cfg.value("zero_ascension", false);
  setup.refresh_period = cfg.value("refresh_period", 1000);
  if (cfg.contains("episode_cap") && !cfg["episode_cap"].is_null())
    setup.episode_cap = cfg["episode_cap"].get<long>();

  Hyperparams hp;
  hp.gamma = mdp.gamma;
  hp.r_max = mdp.r_max;
  const json params = cfg.value("params", json("theoretical"));
  TheoreticalHyperparams theory{};
  const bool have_theory = setup.K >= 2 && mdp.n_actions >= 2;
  if (have_theory)
    theory = theoretical_hyperparams(setup.K, mdp.gamma, mdp.dim(), mdp.features.bound,
                                     mdp.n_actions, mdp.w_max, setup.delta, mdp.r_max,
                                     cfg.value("C", 1.0));
  if (params.is_string() && params.get<std::string>() == "theoretical") {
    if (!have_theory) throw ConfigError("config: theoretical params need K >= 2 and |A| >= 2");
    hp.eta = theory.eta;
    hp.alpha = theory.alpha;
    hp.omega = theory.omega;
    hp.beta = theory.beta;
  } else if (params.is_object()) {
    hp.eta = field(params, "eta", "learner.params").get<double>();
    hp.alpha = params.contains("alpha") ? params["alpha"].get<double>() : theory.alpha;
    hp.omega = params.contains("omega") ? params["omega"].get<double>() : theory.omega;
    hp.beta = params.contains("beta") ? params["beta"].get<double>() : 1.0;
  } else {
    throw ConfigError("config: learner.params must be \"theoretical\" or an object");
  }
  const std::string beta_mode = cfg.value("beta_mode", "");
  if (beta_mode == "practical") {
    hp.beta = cfg.value("beta", 1.0);
  } else if (beta_mode == "theory") {
    if (!have_theory) throw ConfigError("config: beta_mode theory needs K >= 2");
    hp.beta = validity_beta(hp.q_max(), mdp.dim(), hp.alpha, mdp.w_max, mdp.r_max,
                            mdp.features.bound, theory.l_max, setup.K, setup.delta);
  } else if (!beta_mode.empty()) {
    throw ConfigError("config: beta_mode must be \"practical\" or \"theory\"");
  }
  hp.validate();
  setup.hp = hp;
  return setup;
}

LearnerState make_learner(const LearnerSetup& setup, const LinearMdp& mdp) {
  LearnerState state = LearnerState::init(setup.hp, mdp.features, setup.zero_bonus,
                                          setup.zero_ascension, setup.refresh_period);
  if (setup.exact_model) state.exact_m_factor = mdp.m_factor;
  return state;
}

std::vector<std::uint64_t> resolve_seeds(const json& cfg,
                                         std::optional<std::uint64_t> seed_override) {
  std::vector<std::uint64_t> seeds;
  if (cfg.is_array()) {
    for (const auto& s : cfg) seeds.push_back(s.get<std::uint64_t>());
  } else if (cfg.is_object()) {
    const std::uint64_t base = seed_override.value_or(field(cfg, "base", "seeds").get<std::uint64_t>());
    const long count = cfg.value("count", 1);
    if (count < 1) throw ConfigError("config: seeds.count must be at least 1");
    for (long i = 0; i < count; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
    return seeds;
  } else {
    throw ConfigError("config: seeds must be an array or {base, count}");
  }
  if (seeds.empty()) throw ConfigError("config: seed list is empty");
  if (seed_override) {
    const std::uint64_t base = *seed_override;
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = base + i;
  }
  return seeds;
}

std::unique_ptr<RewardAdversary> build_adversary(const json& cfg, const BuiltInstance& inst) {
  const std::string type = cfg.value("type", "fixed");
  if (type == "fixed") return std::make_unique<FixedAdversary>(inst.mdp.reward_weights);
  if (type == "cycling") {
    const json& lists = field(cfg, "weights", "adversary");
    std::vector<Vec> ws;
    for (const auto& lw : lists) {
      Vec w(inst.mdp.dim());
      if (static_cast<Index>(lw.size()) != w.size())
        throw ConfigError("config: adversary weight dimension mismatch");
      for (Index i = 0; i < w.size(); ++i) w[i] = lw[static_cast<std::size_t>(i)].get<double>();
      ws.push_back(std::move(w));
    }
    return std::make_unique<CyclingAdversary>(std::move(ws));
  }
  throw ConfigError("unknown adversary type: " + type);
}

struct SeedOutcome {
  std::uint64_t seed = 0;
  json summary;
};

SeedOutcome run_rl_seed(const json& config, const BuiltInstance& inst, const LearnerSetup& setup,
                        std::uint64_t seed, const fs::path& dir, const std::string& name) {
  const json adv_cfg = config.value("adversary", json{{"type", "fixed"}});
  auto adversary = build_adversary(adv_cfg, inst);
  TrainingOptions opt;
  opt.K = setup.K;
  opt.episode_cap = setup.episode_cap;
  TrainingResult result =
      run_training(inst.mdp, make_learner(setup, inst.mdp), *adversary, opt, RngStream(seed));

  // Comparator: optimal policy for fixed rewards; for reward sequences, the
  // optimal policy of the average weight vector (recorded in the summary).
  std::optional<TabularPolicy> comparator;
  std::string comparator_kind = "optimal-fixed";
  bool fixed = true;
  for (const Vec& w : result.weights)
    if (w != result.weights.front()) {
      fixed = false;
      break;
    }
  if (!fixed) {
    Vec mean = Vec::Zero(inst.mdp.dim());
    for (const Vec& w : result.weights) mean += w;
    mean /= static_cast<double>(result.weights.size());
    comparator = optimal_policy(inst.mdp.to_tabular(mean)).policy;
    comparator_kind = "optimal-average";
  }
  fill_regret(result.log, inst.mdp, result.weights, result.policies, comparator);

  const std::string run_id = name + "-s" + std::to_string(seed);
  std::ofstream csv(dir / (run_id + ".csv"));
  if (!csv) throw ConfigError("cannot write CSV in " + dir.string());
  write_csv(csv, run_id, result.log);

  SeedOutcome out;
  out.seed = seed;
  out.summary["seed"] = seed;
  out.summary["run_id"] = run_id;
  out.summary["regret_total"] = result.log.empty() ? 0.0 : result.log.back().regret_partial;
  out.summary["steps_total"] = result.state.steps_total;
  out.summary["dataset_length"] = result.state.n_transitions;
  out.summary["epochs"] = result.state.epoch;
  out.summary["final_logdet"] = result.state.cov.log_det;
  out.summary["output_index"] = result.output_index + 1;  // 1-based episode id
  out.summary["average_return"] = evaluate_output(inst.mdp, result.policies);
  out.summary["comparator"] = comparator_kind;
  return out;
}

SeedOutcome run_imitation_seed(const json& config, const BuiltInstance& inst,
                               const LearnerSetup& setup, std::uint64_t seed,
                               const fs::path& dir, const std::string& name) {
  if (!inst.tau_inst)
    throw ConfigError("imitation scenario requires an instance of type hard_tau");
  const HardInstanceTau& hard = *inst.tau_inst;
  const json adv_cfg = config.value("adversary", json::object());
  ImitationConfig icfg;
  icfg.K = setup.K;
  icfg.episode_cap = setup.episode_cap;
  if (adv_cfg.contains("tau") && !adv_cfg["tau"].is_null())
    icfg.tau = adv_cfg["tau"].get<long>();
  icfg.eta_r = adv_cfg.value("eta_r", 0.0);

  const LinearMdp combined = concat_reward_features(hard.mdp, hard.phi_r, hard.w_r_true);
  LearnerSetup combined_setup = setup;
  combined_setup.hp.r_max = combined.r_max;
  ImitationResult result = imitation_run(combined, hard.phi_r, hard.expert, icfg,
                                      make_learner(combined_setup, combined), RngStream(seed));

  const std::string run_id = name + "-s" + std::to_string(seed);
  std::ofstream csv(dir / (run_id + ".csv"));
  if (!csv) throw ConfigError("cannot write CSV in " + dir.string());
  write_csv(csv, run_id, result.log);

  SeedOutcome out;
  out.seed = seed;
  out.summary["seed"] = seed;
  out.summary["run_id"] = run_id;
  out.summary["subopt"] = result.suboptimality;
  out.summary["expert_return"] = result.expert_return;
  out.summary["average_return"] = result.average_return;
  out.summary["clip_events"] = result.clip_events;
  out.summary["tau_E"] = icfg.tau ? json(*icfg.tau) : json(nullptr);
  return out;
}

}  // namespace

int run_experiment(const json& config, long jobs,
                   std::optional<std::uint64_t> seed_override, std::ostream& out) {
  const std::string name = config.value("name", "run");
  const std::string scenario = field(config, "scenario", "config").get<std::string>();
  if (scenario == "invariant-suite") {
    const int failures = run_invariant_suite(out);
    return failures == 0 ? 0 : 1;
  }
  if (scenario != "rl-fixed" && scenario != "rl-adversarial" && scenario != "imitation")
    throw ConfigError("unknown scenario: " + scenario);

  const BuiltInstance inst = build_instance(field(config, "instance", "config"));
  const LearnerSetup setup = resolve_learner(field(config, "learner", "config"), inst.mdp);
  const std::vector<std::uint64_t> seeds =
      resolve_seeds(config.value("seeds", json{{"base", 1}, {"count", 1}}), seed_override);
  const fs::path dir = config.value("output", json::object()).value("dir", "out");
  fs::create_directories(dir);

  {
    std::ofstream snapshot(dir / (name + "-config.json"));
    snapshot << config.dump(2) << '\n';
  }

  std::vector<SeedOutcome> outcomes(seeds.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  const long n_threads = std::max(1L, std::min<long>(jobs, static_cast<long>(seeds.size())));
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= seeds.size()) return;
      try {
        outcomes[i] = scenario == "imitation"
                          ? run_imitation_seed(config, inst, setup, seeds[i], dir, name)
                          : run_rl_seed(config, inst, setup, seeds[i], dir, name);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (long i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  json summary;
  summary["name"] = name;
  summary["scenario"] = scenario;
  summary["seeds"] = seeds;
  summary["per_seed"] = json::array();
  for (const SeedOutcome& oc : outcomes) summary["per_seed"].push_back(oc.summary);
  if (scenario == "imitation") {
    double subopt = 0.0;
    long clip_events = 0;
    for (const SeedOutcome& oc : outcomes) {
      subopt += oc.summary["subopt"].get<double>();
      clip_events += oc.summary["clip_events"].get<long>();
    }
    json imitation_summary;
    imitation_summary["tau_E"] = outcomes.front().summary["tau_E"];
    imitation_summary["K"] = setup.K;
    imitation_summary["subopt"] = subopt / static_cast<double>(outcomes.size());
    imitation_summary["clip_events"] = clip_events;
    imitation_summary["seeds"] = seeds;
    summary["imitation"] = imitation_summary;
    std::ofstream ij(dir / (name + "-imitation.json"));
    ij << imitation_summary.dump(2) << '\n';
  } else {
    double total = 0.0;
    for (const SeedOutcome& oc : outcomes) total += oc.summary["regret_total"].get<double>();
    summary["aggregate"] = {{"regret_mean", total / static_cast<double>(outcomes.size())}};
  }
  std::ofstream sj(dir / (name + "-summary.json"));
  sj << summary.dump(2) << '\n';
  out << "wrote " << seeds.size() << " run(s) to " << dir.string() << "\n";
  return 0;
}

int run_invariant_suite(std::ostream& out) {
  int failures = 0;
  const auto check = [&](const char* label, bool ok) {
    out << (ok ? "[ok]   " : "[FAIL] ") << label << "\n";
    if (!ok) ++failures;
  };

  // Covariance updates against direct inversion.
  {
    RngStream rng(1);
    auto state = CovarianceState<double>::identity(5);
    Mat dense = Mat::Identity(5, 5);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      Vec phi(5);
      for (Index j = 0; j < 5; ++j) phi[j] = rng.normal() * 0.3;
      rank_one_update(state, phi);
      dense += phi * phi.transpose();
      worst = std::max(worst, (state.lambda_inv - dense.inverse()).cwiseAbs().maxCoeff());
    }
    check("numerics: rank-one updates track direct inversion", worst < 1e-9);
  }
  // Soft max two-point value.
  {
    Vec w = Vec::Constant(2, 0.5), v(2);
    v << 1.0, 0.0;
    const double got = weighted_logsumexp(w, v, 1.0);
    check("numerics: weighted soft max closed form",
          std::abs(got - std::log((std::exp(1.0) + 1.0) / 2.0)) < 1e-12);
  }
  // Flow residual + return identity on a random mixture.
  {
    const TabularMdp mdp = random_mixture_linear_mdp(4, 6, 3, 0.9, 7).to_tabular();
    const TabularPolicy pi = TabularPolicy::uniform(6, 3);
    const OccupancyMeasure mu = occupancy_measure(mdp, pi);
    const double lhs = return_of_policy(mdp, pi);
    const double rhs = (mu.state_action.array() * mdp.reward.array()).sum() / (1.0 - mdp.gamma);
    check("oracles: occupancy flow residual", flow_residual(mdp, mu) < 1e-10);
    check("oracles: return identity", std::abs(lhs - rhs) < 1e-9);
  }
  // Augmentation produces a valid model and raises every value.
  {
    const HardInstanceK inst = hard_instance_K(3, 0.9, 0.05);
    const TabularMdp base = inst.mdp.to_tabular();
    const Mat p = Mat::Constant(2, 3, 0.1);
    const AugmentedMdp aug = augment(base, p);
    bool ok = true;
    try {
      aug.tab.validate();
    } catch (const ModelError&) {
      ok = false;
    }
    check("augmentation: augmented model is structurally valid", ok);
    const TabularPolicy pi = TabularPolicy::uniform(2, 3);
    const Vec v_base = policy_evaluation(base, pi).v;
    const Vec v_aug = policy_evaluation(aug.tab, extend_policy(pi)).v;
    check("augmentation: values never decrease", (v_aug.head(2) - v_base).minCoeff() > -1e-10);
  }
  // Hard-instance closed forms.
  {
    const HardInstanceK inst = hard_instance_K(4, 0.9, 0.05);
    const OccupancyMeasure mu =
        occupancy_measure(inst.mdp.to_tabular(), TabularPolicy::deterministic({1, 1}, 4));
    check("instances: bad-policy occupancy equals 2/3",
          inst.star == 0 && std::abs(mu.state[0] - 2.0 / 3.0) < 1e-10);
  }
  // Learner: compact policy equals the explicit product representation.
  {
    const HardInstanceK inst = hard_instance_K(3, 0.9, 0.05);
    Hyperparams hp;
    hp.gamma = 0.9;
    hp.r_max = 1.0;
    hp.eta = 0.3;
    hp.beta = 0.5;
    hp.alpha = 4.0;
    hp.omega = 3.0;
    LearnerState state = LearnerState::init(hp, inst.mdp.features);
    FixedAdversary adv(inst.mdp.reward_weights);
    Mat explicit_pi = Mat::Constant(2, 3, 1.0 / 3.0);
    double worst = 0.0;
    TrainingOptions opt;
    opt.K = 60;
    opt.observer = [&](const LearnerState& s, const EpisodeUpdateInfo& info) {
      if (info.epoch_reset) explicit_pi.setConstant(1.0 / 3.0);
      Mat next(2, 3);
      for (Index x = 0; x < 2; ++x) {
        const Eigen::ArrayXd boost =
            (hp.eta *
             (info.q_table.row(x).transpose().array() - info.q_table.row(x).maxCoeff()))
                .exp();
        const Eigen::ArrayXd weights = explicit_pi.row(x).transpose().array() * boost;
        next.row(x) = (weights / weights.sum()).matrix().transpose();
      }
      explicit_pi = next;
      const TabularPolicy compact = policy_table(s.policy, s.features);
      worst = std::max(worst, (compact.probs - explicit_pi).cwiseAbs().maxCoeff());
    };
    (void)run_training(inst.mdp, std::move(state), adv, opt, RngStream(5));
    check("learner: compact softmax equals explicit product form", worst < 1e-9);
  }
  // Envsim determinism: identical seeds give identical logs.
  {
    const HardInstanceK inst = hard_instance_K(3, 0.9, 0.05);
    Hyperparams hp;
    hp.gamma = 0.9;
    hp.r_max = 1.0;
    hp.eta = 0.3;
    hp.beta = 0.5;
    hp.alpha = 4.0;
    hp.omega = 3.0;
    FixedAdversary adv(inst.mdp.reward_weights);
    TrainingOptions opt;
    opt.K = 40;
    auto run_once = [&]() {
      LearnerState st = LearnerState::init(hp, inst.mdp.features);
      TrainingResult r = run_training(inst.mdp, std::move(st), adv, opt, RngStream(11));
      std::ostringstream os;
      write_csv(os, "x", r.log);
      return os.str();
    };
    check("envsim: identical seeds produce identical logs", run_once() == run_once());
  }
  // Imitation: regret decomposition identity on a short run.
  {
    const HardInstanceTau hard = hard_instance_tau(3, 0.8, 0.2, 1.0, 0);
    const LinearMdp combined = concat_reward_features(hard.mdp, hard.phi_r, hard.w_r_true);
    Hyperparams hp;
    hp.gamma = 0.8;
    hp.r_max = 1.0;
    hp.eta = 0.3;
    hp.beta = 0.5;
    hp.alpha = 4.0;
    hp.omega = 3.0;
    ImitationConfig icfg;
    icfg.K = 30;
    const ImitationResult res = imitation_run(combined, hard.phi_r, hard.expert, icfg,
                                           LearnerState::init(hp, combined.features), RngStream(3));
    const TabularMdp tab = combined.to_tabular();
    const OccupancyMeasure mu_e = occupancy_measure(tab, hard.expert);
    const Vec lam_e = [&] {
      Vec v = Vec::Zero(2);
      for (Index x = 0; x < 2; ++x)
        for (Index a = 0; a < 3; ++a)
          v += mu_e.state_action(x, a) * hard.phi_r.row(x * 3 + a).transpose();
      return v;
    }();
    double lhs = 0.0, rhs = 0.0;
    for (long k = 0; k < icfg.K; ++k) {
      const OccupancyMeasure mu_k = occupancy_measure(tab, res.policies[k]);
      Vec lam_k = Vec::Zero(2);
      double true_gap = 0.0, wk_gap = 0.0;
      for (Index x = 0; x < 2; ++x)
        for (Index a = 0; a < 3; ++a) {
          const double diff = mu_e.state_action(x, a) - mu_k.state_action(x, a);
          const Vec phi = hard.phi_r.row(x * 3 + a).transpose();
          lam_k += mu_k.state_action(x, a) * phi;
          true_gap += diff * phi.dot(hard.w_r_true);
          wk_gap += diff * phi.dot(res.reward_iterates[k]);
        }
      lhs += true_gap;
      rhs += wk_gap + (lam_k - lam_e).dot(res.reward_iterates[k] - hard.w_r_true);
    }
    check("imitation: regret decomposition identity", std::abs(lhs - rhs) < 1e-8);
  }
  return failures;
}

}  // namespace lmdp
