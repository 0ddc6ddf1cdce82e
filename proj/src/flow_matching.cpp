#include "lindyn/flow_matching.hpp"

#include "lindyn/closed_form.hpp"
#include "lindyn/special_fn.hpp"

#include <cmath>

namespace lindyn {

void FlowConfig::validate() const {
  if (!(eta > 0)) throw ParameterError("flow.eta must be > 0");
  for (double t : t_grid)
    if (!(t > 0 && t < 1)) throw ParameterError("flow.t_grid must lie in (0, 1)");
  for (std::size_t i = 1; i < tau_grid.size(); ++i)
    if (!(tau_grid[i] > tau_grid[i - 1])) throw ParameterError("flow.tau_grid must be strictly increasing");
}

namespace {
const LossVariant& fm_variant() {
  static const LossVariant v = LossVariant::make(LossVariant::Tag::FlowMatch);
  return v;
}
}  // namespace

double fm_target(double t, double lam) { return optimal_mode_weight(fm_variant(), lam, t); }
double fm_rate(double t, double lam) { return convergence_rate(fm_variant(), lam, t); }

double fm_one_layer_weight(double tau, double t, double lam, double Q, double eta) {
  if (!(t >= 0 && t <= 1)) throw DomainError("fm_one_layer_weight: t must be in [0, 1]");
  const double w = fm_target(t, lam);
  return w + (Q - w) * std::exp(-2 * eta * tau * fm_rate(t, lam));
}

double fm_sampling_converged(double lam, double t) {
  if (lam < 0) throw DomainError("fm_sampling_converged: lambda must be >= 0");
  return std::sqrt(t * t * lam + (1 - t) * (1 - t));
}

double fm_generated_variance_ratio(double tau, double lam, double Q, double eta) {
  if (!(lam > 0)) throw DomainError("fm_generated_variance_ratio: lambda must be > 0");
  if (tau < 0) throw DomainError("fm_generated_variance_ratio: tau must be >= 0");
  const double k = 2 * eta * tau;
  // Ei(-k) - Ei(-k lambda); at k = 0 only the -ln(lambda) piece survives.
  const double ei_part = k == 0.0 ? -std::log(lam) : ei_neg_diff(k, k * lam);
  const double s = std::sqrt(k / (lam + 1));
  const double erf_part = Q * std::exp(-k * lam / (lam + 1)) / (lam + 1) * (erf_over_x(s) + lam * erf_over_x(lam * s));
  return std::exp(ei_part + erf_part);
}

FMTwoLayerValue fm_two_layer_weight(double tau, double t, double lam, double Q, double eta) {
  if (!(Q > 0)) throw DomainError("fm_two_layer_weight: Q must be > 0");
  const double A = t * lam - (1 - t);
  const double r = fm_rate(t, lam);
  if (A == 0.0) return {Q / (1 + 8 * eta * r * Q * tau), false};
  const double qs = A / r;
  return {qs * Q / (Q + (qs - Q) * std::exp(-8 * eta * tau * A)), A > 0};
}

}  // namespace lindyn
