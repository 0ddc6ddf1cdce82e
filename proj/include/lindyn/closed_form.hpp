#pragma once

#include "lindyn/gaussian_model.hpp"
#include "lindyn/ode.hpp"

#include <functional>
#include <optional>

namespace lindyn {

/// Training objective. `s` is sigma for EDM and the diffusion/flow time t otherwise.
struct LossVariant {
  enum class Tag { EDM, XPred, EpsPred, VPred, FlowMatch };
  Tag tag = Tag::EDM;
  std::function<double(double)> alpha;  ///< alpha_t; defaults to cos(pi t / 2)
  std::function<double(double)> sigma;  ///< sigma_t; defaults to sin(pi t / 2)

  static LossVariant edm() { return {}; }
  static LossVariant make(Tag tag) { return LossVariant{tag, {}, {}}; }
  [[nodiscard]] double alpha_at(double t) const;
  [[nodiscard]] double sigma_at(double t) const;
};

[[nodiscard]] const char* to_string(LossVariant::Tag tag);

/// Per-mode quadratic structure of a loss: Sxx = a Sigma + c I, Syx = p Sigma + q I.
struct ModeQuadratic {
  double a, c, p, q;
  [[nodiscard]] double rate(double lam) const { return a * lam + c; }
  [[nodiscard]] double cross(double lam) const { return p * lam + q; }
};

[[nodiscard]] ModeQuadratic mode_quadratic(const LossVariant& v, double s);

/// w*_k for the given variant.
[[nodiscard]] double optimal_mode_weight(const LossVariant& v, double lam, double s);
/// 1/tau*_k; each mode relaxes as exp(-2 eta tau / tau*).
[[nodiscard]] double convergence_rate(const LossVariant& v, double lam, double s);

struct Architecture {
  enum class Kind { OneLayer, TwoLayerSymmetric, DeepLinear, Residual, DiscreteGD };
  Kind kind = Kind::OneLayer;
  int depth = 1;
  double c_skip = 0.0;
  double c_out = 1.0;
  double step = 0.0;  ///< DiscreteGD learning rate; 0 means use eta

  static Architecture one_layer() { return {}; }
  static Architecture two_layer() { return {Kind::TwoLayerSymmetric}; }
  static Architecture deep(int L) { return {Kind::DeepLinear, L}; }
  static Architecture residual(double cs, double co) { return {Kind::Residual, 1, cs, co}; }
  static Architecture discrete(double step) { return {Kind::DiscreteGD, 1, 0.0, 1.0, step}; }
};

struct DynamicsConfig {
  double eta = 1.0;
  std::vector<double> tau_grid;
  VectorXd init_Q;
  double sigma = 1.0;
  Architecture arch;

  void validate(Index dim) const;
};

struct ModeTrajectory {
  Index mode = 0;
  VectorXd tau;
  VectorXd values;
  double target = 0.0;
};

// Scalar closed forms.

template <typename Scalar>
[[nodiscard]] Scalar one_layer_target(Scalar lam, Scalar sigma) {
  return lam / (lam + sigma * sigma);
}

/// psi(tau) = w* + (Q - w*) exp(-2 eta tau (sigma^2 + lambda)).
template <typename Scalar>
[[nodiscard]] Scalar one_layer_weight(Scalar tau, Scalar lam, Scalar sigma, Scalar Q, Scalar eta) {
  using std::exp;
  const Scalar w = one_layer_target(lam, sigma);
  return w + (Q - w) * exp(-2 * eta * tau * (sigma * sigma + lam));
}

/// psi(tau) = psi* Q / ((psi* - Q) exp(-8 eta lambda tau) + Q), psi = |q_k|^2.
template <typename Scalar>
[[nodiscard]] Scalar two_layer_weight(Scalar tau, Scalar lam, Scalar sigma, Scalar Q, Scalar eta) {
  using std::exp;
  if (Q < 0) throw DomainError("two_layer_weight: Q must be >= 0 (squared norm)");
  if (Q == 0) return Scalar(0);
  const Scalar w = one_layer_target(lam, sigma);
  if (Q == w) return Q;
  return w * Q / ((w - Q) * exp(-8 * eta * lam * tau) + Q);
}

/// Discrete GD iterate t: w* + (Q - w*) (1 - 2 eta (sigma^2 + lambda))^t.
template <typename Scalar>
[[nodiscard]] Scalar discrete_gd_weight(long t, Scalar lam, Scalar sigma, Scalar Q, Scalar eta) {
  using std::pow;
  const Scalar w = one_layer_target(lam, sigma);
  return w + (Q - w) * pow(1 - 2 * eta * (sigma * sigma + lam), Scalar(t));
}

[[nodiscard]] VectorXd one_layer_bias(const VectorXd& b0, double eta, double tau);

[[nodiscard]] std::vector<ModeTrajectory> one_layer_trajectory(const DynamicsConfig& cfg,
                                                               const CovarianceModeld& model);
[[nodiscard]] std::vector<ModeTrajectory> two_layer_trajectory(const DynamicsConfig& cfg,
                                                               const CovarianceModeld& model);
/// Full-matrix weights of the residual model W = c_skip I + c_out W'; init_Q holds W'(0) per mode.
[[nodiscard]] std::vector<ModeTrajectory> residual_reparam_trajectory(const DynamicsConfig& cfg,
                                                                      const CovarianceModeld& model);

struct DiscreteGDResult {
  std::vector<ModeTrajectory> modes;  ///< tau holds the iteration index
  std::vector<bool> diverged;         ///< |1 - 2 eta (sigma^2 + lambda)| >= 1
};
[[nodiscard]] DiscreteGDResult discrete_gd_trajectory(const DynamicsConfig& cfg, const CovarianceModeld& model,
                                                      long steps);

/// Rank-one-plus-diagonal coupling of weights and bias under a nonzero mean.
struct MeanCovCoupling {
  VectorXd overlaps;  ///< m_k = u_k^T mu
  MatrixXd dynamics_matrix;  ///< (d+1)x(d+1) M~
  VectorXd diag;  ///< D
  VectorXd q;  ///< [m_1..m_d, 1]
};

[[nodiscard]] MeanCovCoupling mean_cov_coupling(const CovarianceModeld& model, const VectorXd& mu, double sigma);

struct MeanCoupledResult {
  MeanCovCoupling coupling;
  CovarianceModeld model;
  std::vector<double> tau;
  std::vector<MatrixXd> W;
  std::vector<VectorXd> b;
  MatrixXd W_star;
  VectorXd b_star;
};

/// Weights and bias under a nonzero data mean. W0 defaults to U diag(init_Q) U^T, b0 to zero.
[[nodiscard]] MeanCoupledResult mean_coupled_trajectory(const DataMomentsd& moments, const DynamicsConfig& cfg,
                                                        const std::optional<MatrixXd>& W0 = std::nullopt,
                                                        const std::optional<VectorXd>& b0 = std::nullopt);

struct DeepModeResult {
  VectorXd tau;
  VectorXd values;
  bool stalled = false;
};

/// dc/dtau = eta L [lambda - (sigma^2 + lambda) c] c^(2 - 2/L), integrated numerically.
/// Gradient flow with learning rate h on L balanced layers maps to eta = 2 h (L only enters via the prefactor).
[[nodiscard]] DeepModeResult deep_linear_mode(int L, double lam, double sigma, double c0, double eta,
                                              const std::vector<double>& tau_grid);

/// Overlap matrix O_km = q_k^T q_m of the symmetric two-layer net, rows of q_init are q_k^T.
[[nodiscard]] std::vector<MatrixXd> two_layer_overlap_simulation(const CovarianceModeld& model, double sigma,
                                                                 double eta, const MatrixXd& q_init,
                                                                 const std::vector<double>& tau_grid,
                                                                 const OdeSolveConfig& ode = {});

struct FGTrajectory {
  VectorXd tau, f, g;
  double conserved = 0.0;  ///< f^2 - g^2
};
/// General two-layer mode: f' = A g - B g^2 f, g' = A f - B f^2 g with A = eta lambda,
/// B = eta (sigma^2 + lambda).
[[nodiscard]] FGTrajectory two_layer_fg_mode(double lam, double sigma, double eta, double f0, double g0,
                                            const std::vector<double>& tau_grid);

/// Aligned weight matrix U diag(values) U^T.
[[nodiscard]] MatrixXd aligned_matrix(const CovarianceModeld& model, const VectorXd& values);

}  // namespace lindyn
