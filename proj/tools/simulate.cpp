#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lmdp/harness.hpp"
#include "lmdp/types.hpp"

namespace {

std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv("SIM_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  try {
    return std::stoull(raw);
  } catch (const std::exception&) {
    throw lmdp::ConfigError(std::string("SIM_SEED is not an unsigned integer: ") + raw);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discounted linear-MDP learner simulator"};
  app.require_subcommand(1);

  std::string config_path;
  long jobs = 1;
  std::vector<std::string> overrides;
  CLI::App* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("config", config_path, "Path to the experiment config")->required();
  run->add_option("--jobs", jobs, "Parallel seed workers")->check(CLI::PositiveNumber);
  run->add_option("--override", overrides, "Config overrides, key.path=value");

  CLI::App* verify = app.add_subcommand("verify", "Run the fast invariant suite");

  std::string csv_path, column;
  CLI::App* slope = app.add_subcommand("slope", "Fit a log-log slope of a CSV column vs episode");
  slope->add_option("csv", csv_path, "CSV file written by `run`")->required();
  slope->add_option("column", column, "Column to fit")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      std::ifstream in(config_path);
      if (!in) throw lmdp::ConfigError("cannot open config file: " + config_path);
      nlohmann::json config;
      try {
        in >> config;
      } catch (const nlohmann::json::exception& e) {
        throw lmdp::ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
      for (const std::string& assignment : overrides) lmdp::apply_override(config, assignment);
      return lmdp::run_experiment(config, jobs, seed_from_env(), std::cout);
    }
    if (verify->parsed()) {
      const int failures = lmdp::run_invariant_suite(std::cout);
      if (failures != 0) {
        std::cout << failures << " invariant check(s) failed\n";
        return 1;
      }
      std::cout << "all invariant checks passed\n";
      return 0;
    }
    if (slope->parsed()) {
      const lmdp::SlopeFit fit = lmdp::slope_from_csv(csv_path, column);
      std::cout << "slope " << fit.slope << " intercept " << fit.intercept << " residual "
                << fit.residual << "\n";
      return 0;
    }
  } catch (const lmdp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
