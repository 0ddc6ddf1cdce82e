#pragma once

#include "lindyn/gaussian_model.hpp"

namespace lindyn {

struct ModeKL {
  VectorXd per_mode;
  double total = 0.0;
  int clamped = 0;  ///< variances raised to the 1e-12 floor
};

inline constexpr double variance_floor = 1e-12;

/// KL(N(mu1, U diag(l1) U^T) || N(mu2, U diag(l2) U^T)), split by mode.
[[nodiscard]] ModeKL kl_shared_basis(const VectorXd& lam1, const VectorXd& lam2, const VectorXd& mu1,
                                     const VectorXd& mu2, const MatrixXd& U);

/// E_s(tau) = sigma^-4 [db^2 e^{-4 eta tau} + sum_k (sigma^2 + lambda_k) |delta_k|^2 e^{-4 eta (sigma^2 + lambda_k) tau}],
/// delta_k = W(0) u_k - w*_k u_k, db = |b(0)|.
[[nodiscard]] double score_error(const VectorXd& lam, const VectorXd& delta_norms, double delta_b, double sigma,
                                 double eta, double tau);

/// Denoiser error E_x |(W - W*) x + b - b*|^2 for x = x0 + sigma z, zero-mean data.
[[nodiscard]] double denoiser_error(const MatrixXd& W, const VectorXd& b, double sigma, const CovarianceModeld& model);

/// delta_k = |W0 u_k - w*_k u_k| for each mode.
[[nodiscard]] VectorXd mode_deltas(const MatrixXd& W0, double sigma, const CovarianceModeld& model);

/// sigma^2 sum_k lambda_k / (sigma^2 + lambda_k).
[[nodiscard]] double loss_floor(double sigma, const CovarianceModeld& model);

/// Expected denoising loss E |W (x0 + sigma z) + b - x0|^2 = E_D + floor, zero-mean data.
[[nodiscard]] double training_loss(const MatrixXd& W, const VectorXd& b, double sigma, const CovarianceModeld& model);

}  // namespace lindyn
