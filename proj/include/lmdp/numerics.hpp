#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <limits>

#include "lmdp/types.hpp"

namespace lmdp {

/// Count of quadratic forms clamped to zero after losing positivity to
/// rounding.  Diagnostic only; never consulted by algorithms.
inline std::atomic<long>& elliptical_clamp_count() {
  static std::atomic<long> count{0};
  return count;
}

/// Numerically safe logistic function, branched on the sign of z so the
/// exponential never overflows.
template <typename Scalar>
Scalar sigmoid(Scalar z) {
  if (z >= Scalar(0)) {
    return Scalar(1) / (Scalar(1) + std::exp(-z));
  }
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

/// Elliptical norm sqrt(phi' * inv * phi).  A tiny negative quadratic form
/// (possible once inv has drifted from exact symmetry) is clamped to zero and
/// counted.
template <typename DerivedM, typename DerivedV>
typename DerivedM::Scalar elliptical_norm(const Eigen::MatrixBase<DerivedM>& inv,
                                          const Eigen::MatrixBase<DerivedV>& phi) {
  using Scalar = typename DerivedM::Scalar;
  const Scalar q = phi.dot(inv * phi.derived());
  if (q < Scalar(0)) {
    elliptical_clamp_count().fetch_add(1, std::memory_order_relaxed);
    return Scalar(0);
  }
  return std::sqrt(q);
}

/// Weighted soft maximum (1/eta) * log(sum_i w_i * exp(eta * v_i)) with the
/// max subtracted before exponentiation.  Weights must be non-negative and
/// sum to 1 (within 1e-9); zero-weight entries are ignored entirely so their
/// values may be arbitrary.  The result lies between the min and max of the
/// contributing values.
template <typename DerivedW, typename DerivedV, typename Scalar>
Scalar weighted_logsumexp(const Eigen::MatrixBase<DerivedW>& weights,
                          const Eigen::MatrixBase<DerivedV>& values, Scalar eta) {
  if (weights.size() != values.size() || weights.size() == 0)
    throw std::invalid_argument("weighted_logsumexp: size mismatch or empty input");
  Scalar wsum = Scalar(0);
  Scalar vmax = -std::numeric_limits<Scalar>::infinity();
  for (Index i = 0; i < weights.size(); ++i) {
    const Scalar w = weights(i);
    if (w < Scalar(0)) throw std::invalid_argument("weighted_logsumexp: negative weight");
    wsum += w;
    if (w > Scalar(0)) vmax = std::max(vmax, Scalar(values(i)));
  }
  if (wsum == Scalar(0)) throw std::invalid_argument("weighted_logsumexp: all weights zero");
  if (std::abs(wsum - Scalar(1)) > Scalar(1e-9))
    throw std::invalid_argument("weighted_logsumexp: weights must sum to 1");
  if (!(eta > Scalar(0))) throw std::invalid_argument("weighted_logsumexp: eta must be positive");
  Scalar s = Scalar(0);
  for (Index i = 0; i < weights.size(); ++i) {
    const Scalar w = weights(i);
    if (w > Scalar(0)) s += w * std::exp(eta * (Scalar(values(i)) - vmax));
  }
  return vmax + std::log(s) / eta;
}

/// Running regularized covariance Lambda = I + sum phi*phi', its inverse, and
/// log det, maintained by rank-one (Sherman-Morrison) updates with periodic
/// full Cholesky refreshes to bound drift.  Also holds a frozen "anchor"
/// snapshot of (inverse, log det), re-pinned by the caller at epoch
/// boundaries, against which exploration widths are measured.
template <typename Scalar>
struct CovarianceState {
  using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  MatX lambda;
  MatX lambda_inv;
  Scalar log_det = 0;
  MatX anchor_inv;
  Scalar anchor_log_det = 0;
  long updates_since_refresh = 0;
  long refresh_period = 1000;

  /// Freshly initialized state: Lambda = anchor = identity.
  static CovarianceState identity(Index dim, long refresh_period = 1000) {
    if (dim <= 0) throw std::invalid_argument("CovarianceState: dim must be positive");
    if (refresh_period <= 0) throw std::invalid_argument("CovarianceState: refresh period must be positive");
    CovarianceState s;
    s.lambda = MatX::Identity(dim, dim);
    s.lambda_inv = MatX::Identity(dim, dim);
    s.anchor_inv = MatX::Identity(dim, dim);
    s.refresh_period = refresh_period;
    return s;
  }

  Index dim() const { return lambda.rows(); }

  /// Re-pin the anchor to the current inverse / log det.
  void pin_anchor() {
    anchor_inv = lambda_inv;
    anchor_log_det = log_det;
  }
};

/// Recompute lambda_inv and log_det from lambda by Cholesky factorization.
/// Throws NumericError if lambda has lost positive definiteness.
template <typename Scalar>
void refresh_inverse(CovarianceState<Scalar>& state) {
  Eigen::LLT<typename CovarianceState<Scalar>::MatX> llt(state.lambda);
  if (llt.info() != Eigen::Success)
    throw NumericError("refresh_inverse: covariance is not positive definite");
  state.lambda_inv = llt.solve(CovarianceState<Scalar>::MatX::Identity(state.dim(), state.dim()));
  state.log_det = Scalar(2) * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  state.updates_since_refresh = 0;
}

/// Rank-one update Lambda += phi*phi' with Sherman-Morrison downdate of the
/// inverse and incremental log det += log(1 + phi' Lambda^-1 phi).  Inputs
/// must be finite.  Triggers a full refresh every refresh_period updates.
template <typename Scalar, typename Derived>
void rank_one_update(CovarianceState<Scalar>& state, const Eigen::MatrixBase<Derived>& phi) {
  if (phi.size() != state.dim()) throw std::invalid_argument("rank_one_update: dimension mismatch");
  if (!phi.allFinite()) throw NumericError("rank_one_update: non-finite feature vector");
  using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const VecX v = state.lambda_inv * phi.derived();
  const Scalar q = phi.dot(v);
  state.lambda.noalias() += phi.derived() * phi.derived().transpose();
  state.lambda_inv.noalias() -= (v * v.transpose()) / (Scalar(1) + q);
  // The exact increment log(1 + phi' Lambda^-1 phi) is >= 0; clamp away the
  // sub-drift negative values an inexact inverse can produce.
  state.log_det += std::log1p(std::max(q, Scalar(0)));
  if (++state.updates_since_refresh >= state.refresh_period) refresh_inverse(state);
}

}  // namespace lmdp
