#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lmdp/types.hpp"

namespace lmdp {

/// log-log least-squares fit y ~ c * x^slope.
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;  // log-space intercept
  double residual = 0.0;   // RMS residual in log space
};

/// Fit over strictly positive samples; throws ConfigError if fewer than two
/// usable points.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// Run one experiment described by a config document.  Writes per-seed CSV
/// logs, a summary JSON, and a config snapshot under the output directory.
/// The optional seed_override replaces the config's base seed (SIM_SEED).
/// Returns the process exit code (0 ok).
int run_experiment(const nlohmann::json& config, long jobs,
                   std::optional<std::uint64_t> seed_override, std::ostream& out);

/// Apply one `--override key.path=value` assignment to a config document.
/// Values parse as JSON when possible, else as strings.
void apply_override(nlohmann::json& config, const std::string& assignment);

/// Fast cross-module invariant sweep (the `verify` subcommand).  Prints one
/// line per check; returns the number of failures.
int run_invariant_suite(std::ostream& out);

/// log-log slope of a named CSV column against the episode column.
SlopeFit slope_from_csv(const std::string& path, const std::string& column);

}  // namespace lmdp
