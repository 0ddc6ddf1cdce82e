#pragma once

#include "lindyn/types.hpp"

namespace lindyn {

struct FlowConfig {
  std::vector<double> t_grid;
  double eta = 1.0;
  VectorXd init_Q;
  std::vector<double> tau_grid;

  void validate() const;
};

/// Optimal flow-matching velocity weight (t lambda - (1 - t)) / (t^2 lambda + (1 - t)^2).
[[nodiscard]] double fm_target(double t, double lam);
[[nodiscard]] double fm_rate(double t, double lam);

/// psi(tau) = w* + (Q - w*) exp(-2 eta tau (t^2 lambda + (1 - t)^2)).
[[nodiscard]] double fm_one_layer_weight(double tau, double t, double lam, double Q, double eta);

/// c(t)/c(0) = sqrt(t^2 lambda + (1 - t)^2) under the optimal velocity field.
[[nodiscard]] double fm_sampling_converged(double lam, double t);

/// lambda~/lambda after integrating the flow t: 0 -> 1 with the one-layer weights at training time tau.
[[nodiscard]] double fm_generated_variance_ratio(double tau, double lam, double Q, double eta);

struct FMTwoLayerValue {
  double value;
  bool attainable;  ///< false when t < 1/(lambda + 1): the squared-norm weight cannot reach a negative target
};

/// |q|^2(tau) of the symmetric two-layer velocity net W = P P^T under gradient flow with rate eta:
/// Q* Q / (Q + (Q* - Q) exp(-8 eta tau (t lambda - (1 - t)))).
[[nodiscard]] FMTwoLayerValue fm_two_layer_weight(double tau, double t, double lam, double Q, double eta);

}  // namespace lindyn
