#pragma once

// Brute-force reference implementations. Nothing here calls the closed-form modules.

#include "lindyn/closed_form.hpp"
#include "lindyn/gaussian_model.hpp"
#include "lindyn/ode.hpp"

#include <cstdint>

namespace lindyn::oracle {

/// Second moments of (input x, target y) for x = A x0 + B e, y = C x0 + D e.
struct LossMoments {
  MatrixXd Exx, Eyx;
  VectorXd Ex, Ey;
  double Eyy = 0.0;
};

/// Input/target coefficients (A, B, C, D) for a loss variant at s (sigma for EDM, t otherwise).
[[nodiscard]] Eigen::Vector4d variant_coefficients(const LossVariant& v, double s);

[[nodiscard]] LossMoments loss_moments(const DataMomentsd& m, const LossVariant& v, double s);

/// E |W x + b - y|^2.
[[nodiscard]] double loss_value(const LossMoments& lm, const MatrixXd& W, const VectorXd& b);

struct Gradient {
  MatrixXd W;
  VectorXd b;
};
[[nodiscard]] Gradient loss_gradient(const LossMoments& lm, const MatrixXd& W, const VectorXd& b);

/// Central finite differences of loss_value.
[[nodiscard]] Gradient fd_gradient(const LossMoments& lm, const MatrixXd& W, const VectorXd& b, double h = 1e-5);

struct Parametrization {
  enum class Kind { OneLayer, TwoLayerSymmetric, Residual, Circulant, DeepLinear };
  Kind kind = Kind::OneLayer;
  double c_skip = 0.0;
  double c_out = 1.0;
  Index half_width = 0;  ///< Circulant: filter half-width r
  int depth = 1;

  static Parametrization one_layer() { return {}; }
  static Parametrization two_layer() { return {Kind::TwoLayerSymmetric}; }
  static Parametrization residual(double cs, double co) { return {Kind::Residual, cs, co}; }
  static Parametrization circulant(Index r) { return {Kind::Circulant, 0.0, 1.0, r}; }
  static Parametrization deep(int L) { return {Kind::DeepLinear, 0.0, 1.0, 0, L}; }
};

/// Effective weight matrix of the parameters. Circulant params are a K x 1 tap column;
/// DeepLinear params are the layers W_1..W_L (applied first to last).
[[nodiscard]] MatrixXd effective_weight(const Parametrization& p, const std::vector<MatrixXd>& params, Index d);

struct FlowSeries {
  std::vector<double> tau;
  std::vector<MatrixXd> W;
  std::vector<VectorXd> b;
  std::vector<std::vector<MatrixXd>> params;
};

/// Full-batch gradient flow d theta/d tau = -eta grad L on raw matrices.
[[nodiscard]] FlowSeries gradient_flow_full(const DataMomentsd& moments, double s, double eta,
                                            const std::vector<MatrixXd>& params0, const VectorXd& b0,
                                            const std::vector<double>& tau_grid, const LossVariant& variant,
                                            const Parametrization& param, const OdeSolveConfig& ode = {});

/// Plain matrix gradient descent W <- W - eta grad W, b <- b - eta grad b.
[[nodiscard]] std::vector<MatrixXd> discrete_gd_full(const LossMoments& lm, MatrixXd W, VectorXd b, double eta,
                                                     long steps);

struct MCEstimate {
  double mean;
  double std_error;
};

/// Monte Carlo E |W (x0 + sigma z) + b - x0|^2 with x0 ~ N(mu, Sigma).
[[nodiscard]] MCEstimate mc_dsm_loss(const MatrixXd& W, const VectorXd& b, const DataMomentsd& moments, double sigma,
                                     Index n, std::uint64_t seed);

/// Monte Carlo E |s(x) - s*(x)|^2, s = (W x + b - x)/sigma^2, s* from the optimal affine denoiser.
[[nodiscard]] MCEstimate mc_score_error(const MatrixXd& W, const VectorXd& b, const DataMomentsd& moments,
                                        double sigma, Index n, std::uint64_t seed);

/// Dense unitary DFT matrix F_jk = exp(-2 pi i j k / N) / sqrt(N).
[[nodiscard]] MatrixXcd dft_matrix(Index N);

/// diag(F* Sigma F) by explicit complex products; N <= 512.
[[nodiscard]] VectorXd dense_dft_diag(const MatrixXd& sigma);

/// KL(N(mu1, S1) || N(mu2, S2)) with dense log-determinants.
[[nodiscard]] double dense_gaussian_kl(const VectorXd& mu1, const MatrixXd& S1, const VectorXd& mu2,
                                       const MatrixXd& S2);

/// Ei(x) = gamma + ln|x| + sum x^n / (n n!) summed in quad precision; |x| <= 40.
[[nodiscard]] double ei_series(double x);
/// erf(x) = 2/sqrt(pi) sum (-1)^n x^(2n+1) / (n! (2n+1)) in quad precision; |x| <= 8.
[[nodiscard]] double erf_series(double x);

/// Draws x0 ~ N(mu, Sigma) through a symmetric square root.
[[nodiscard]] MatrixXd draw_gaussian(const DataMomentsd& moments, Index n, std::mt19937_64& rng);

}  // namespace lindyn::oracle
