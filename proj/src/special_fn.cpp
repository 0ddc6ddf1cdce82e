#include "lindyn/special_fn.hpp"

#include "lindyn/types.hpp"

#include <cmath>
#include <numbers>

#if !defined(__STDCPP_MATH_SPEC_FUNCS__) && !defined(__GLIBCXX__)
#error "std::expint (C++17 mathematical special functions) is required"
#endif

namespace lindyn {

double expint_ei(double x) {
  if (x == 0.0) throw DomainError("expint_ei: logarithmic singularity at x = 0");
  if (x < -700.0) return 0.0;
  return std::expint(x);
}

double erf(double x) { return std::erf(x); }

double ei_entire(double x, const ToleranceConfig& tol) {
  if (x < 0) throw DomainError("ei_entire: x must be >= 0");
  if (x == 0.0) return 0.0;
  if (x > 2.0) return expint_ei(-x) - std::log(x) - euler_gamma;
  double term = 1.0, sum = 0.0;
  for (int n = 1; n <= tol.max_terms; ++n) {
    term *= -x / n;
    const double add = term / n;
    sum += add;
    if (std::abs(add) <= tol.abs_tol + tol.rel_tol * std::abs(sum)) break;
  }
  return sum;
}

double ei_neg_diff(double a, double b) {
  if (!(a > 0 && b > 0)) throw DomainError("ei_neg_diff: arguments must be positive");
  if (a > 2.0 && b > 2.0) return expint_ei(-a) - expint_ei(-b);
  return std::log(a / b) + ei_entire(a) - ei_entire(b);
}

double erf_over_x(double z) {
  const double az = std::abs(z);
  if (az < 1e-4) {
    const double z2 = z * z;
    return 2.0 * (1.0 - z2 / 3.0 + z2 * z2 / 10.0);
  }
  return std::sqrt(std::numbers::pi) * std::erf(z) / z;
}

}  // namespace lindyn
