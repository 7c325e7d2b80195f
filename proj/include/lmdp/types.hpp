#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace lmdp {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Invalid or inconsistent user-supplied configuration (bad JSON, missing
/// fields, parameter ranges).  Mapped to process exit code 2 by the CLI.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A model object violates its structural invariants (non-stochastic rows,
/// rewards out of range, norm bounds exceeded).
struct ModelError : std::runtime_error {
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure inside a linear-algebra kernel (non-finite input,
/// factorization breakdown).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lmdp
