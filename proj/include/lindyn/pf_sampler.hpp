#pragma once

#include "lindyn/gaussian_model.hpp"

#include <cstdint>
#include <functional>

namespace lindyn {

/// sigma_i = (smax^(1/rho) + i/(n-1) (smin^(1/rho) - smax^(1/rho)))^rho, i = 0..n-1, decreasing.
struct NoiseSchedule {
  double sigma_min = 0.002;
  double sigma_max = 80.0;
  double rho = 7.0;
  int num_steps = 20;  ///< number of grid points; num_steps - 1 Heun steps

  void validate() const;
  [[nodiscard]] std::vector<double> sigmas() const;
};

struct GeneratedDistribution {
  enum class Basis { Eigen, Fourier };
  Basis basis_tag = Basis::Eigen;
  VectorXd mode_variances;
  VectorXd mean_modes;
};

/// Per-mode integrating factor Phi(sigma) = exp(-int (psi(sigma) - 1) / sigma dsigma).
struct PhiFactor {
  enum class Case { OneLayer, TwoLayerSymmetric, Converged, FullWidthConv, Numeric };
  Case case_tag = Case::OneLayer;
  double lambda = 1.0;  ///< lambda_k, or the Fourier mode variance for FullWidthConv
  double Q = 0.0;
  double eta = 1.0;
  double tau = 0.0;
  Index N = 1;  ///< FullWidthConv signal length
  std::function<double(double)> psi;  ///< Numeric: psi(sigma)

  static PhiFactor one_layer(double lam, double Q, double eta, double tau) {
    return {Case::OneLayer, lam, Q, eta, tau, 1, {}};
  }
  static PhiFactor two_layer(double lam, double Q, double eta, double tau) {
    return {Case::TwoLayerSymmetric, lam, Q, eta, tau, 1, {}};
  }
  static PhiFactor converged(double lam) { return {Case::Converged, lam, 0.0, 1.0, 0.0, 1, {}}; }
  static PhiFactor full_width_conv(double mode_var, double Q, double eta, double tau, Index N) {
    return {Case::FullWidthConv, mode_var, Q, eta, tau, N, {}};
  }
  static PhiFactor numeric(std::function<double(double)> psi) {
    return {Case::Numeric, 0.0, 0.0, 1.0, 0.0, 1, std::move(psi)};
  }
};

/// Closed-form Phi for the one-layer case at tau > 0.
[[nodiscard]] double phi_one_layer(double sigma, double tau, double lam, double Q, double eta);
/// Closed-form Phi for the symmetric two-layer case.
[[nodiscard]] double phi_two_layer(double sigma, double tau, double lam, double Q, double eta);

/// ln Phi(a) - ln Phi(b); finite at tau = 0 where Phi itself is not.
[[nodiscard]] double log_phi_ratio(const PhiFactor& phi, double a, double b);

/// lambda~ = sigma_T^2 Phi(sigma_min)^2 / Phi(sigma_max)^2.
[[nodiscard]] double generated_variance(const PhiFactor& phi, const NoiseSchedule& schedule);

using ModeFn = std::function<VectorXd(double)>;
using MatrixFn = std::function<MatrixXd(double)>;

/// Heun integration of dx/dsigma = -[(psi(sigma) - 1) x + b(sigma)] / sigma, per mode.
[[nodiscard]] VectorXd pf_ode_numeric(const ModeFn& weight_fn, const ModeFn& bias_fn, const NoiseSchedule& schedule,
                                      const VectorXd& x_T);
/// Same ODE with dense weights W(sigma) (no commuting assumption).
[[nodiscard]] VectorXd pf_ode_numeric_dense(const MatrixFn& weight_fn, const ModeFn& bias_fn,
                                            const NoiseSchedule& schedule, const VectorXd& x_T);

struct QuadratureResult {
  double value;
  double error_estimate;
};

/// Adaptive Simpson in u on [a, b].
[[nodiscard]] QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                                double tol, int max_depth = 30);

/// B_k = int_{sigma_T}^{sigma_0} -(b(s)/s) Phi(sigma_0)/Phi(s) ds, by adaptive Simpson in ln s.
[[nodiscard]] double mean_transport(const std::function<double(double)>& bias, const PhiFactor& phi,
                                    const NoiseSchedule& schedule, double tol = 1e-9);

/// Samples of N(U mean_modes, U diag(lambda~) U^T).
[[nodiscard]] MatrixXd sample_generated(const GeneratedDistribution& dist, const MatrixXd& basis, Index n,
                                        std::uint64_t seed);

}  // namespace lindyn
