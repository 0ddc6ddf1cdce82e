#pragma once

namespace lindyn {

struct ToleranceConfig {
  double abs_tol = 1e-15;
  double rel_tol = 1e-15;
  int max_terms = 200;
};

/// Exponential integral Ei(x). Throws DomainError at x = 0.
[[nodiscard]] double expint_ei(double x);

[[nodiscard]] double erf(double x);

/// Entire part of Ei(-x): g(x) = Ei(-x) - ln x - gamma = sum_{n>=1} (-x)^n / (n n!).
/// Defined (and exact) at x = 0, which lets callers difference Ei values near the
/// logarithmic singularity without cancellation.
[[nodiscard]] double ei_entire(double x, const ToleranceConfig& tol = {});

/// Ei(-a) - Ei(-b) for a, b > 0.
[[nodiscard]] double ei_neg_diff(double a, double b);

/// sqrt(pi) * erf(z) / z, with the z -> 0 limit 2.
[[nodiscard]] double erf_over_x(double z);

inline constexpr double euler_gamma = 0.57721566490153286060651209008240243;

}  // namespace lindyn
