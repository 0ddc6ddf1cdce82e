#include "lindyn/pf_sampler.hpp"

#include "lindyn/special_fn.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace lindyn {

void NoiseSchedule::validate() const {
  if (!(sigma_min > 0 && sigma_max > sigma_min)) throw ParameterError("schedule: need 0 < sigma_min < sigma_max");
  if (!(rho > 0)) throw ParameterError("schedule: rho must be > 0");
  if (num_steps < 2) throw ParameterError("schedule: num_steps must be >= 2");
}

std::vector<double> NoiseSchedule::sigmas() const {
  validate();
  std::vector<double> s(num_steps);
  const double a = std::pow(sigma_max, 1.0 / rho), b = std::pow(sigma_min, 1.0 / rho);
  for (int i = 0; i < num_steps; ++i) s[i] = std::pow(a + double(i) / (num_steps - 1) * (b - a), rho);
  s.front() = sigma_max;
  s.back() = sigma_min;
  return s;
}

double phi_one_layer(double sigma, double tau, double lam, double Q, double eta) {
  if (!(sigma > 0)) throw DomainError("phi_one_layer: sigma must be > 0");
  if (!(tau > 0)) throw DomainError("phi_one_layer: tau must be > 0 (use log_phi_ratio for tau = 0)");
  const double s2 = sigma * sigma;
  const double e = std::exp(-2 * eta * tau * lam);
  return std::sqrt(lam + s2) *
         std::exp(0.5 * (1 - Q) * expint_ei(-2 * eta * tau * s2) * e - 0.5 * expint_ei(-2 * eta * tau * (s2 + lam)));
}

double phi_two_layer(double sigma, double tau, double lam, double Q, double eta) {
  if (!(sigma > 0)) throw DomainError("phi_two_layer: sigma must be > 0");
  if (!(Q > 0)) throw DomainError("phi_two_layer: Q must be > 0 (zero is an unstable fixed point)");
  if (lam == 0.0) return std::pow(sigma, 1 - Q);
  const double e = std::exp(-8 * eta * tau * lam);
  const double den = Q + (1 - Q) * e;
  const double D = lam * e + Q * (1 - e) * (lam + sigma * sigma);
  return std::pow(sigma, (1 - Q) * e / den) * std::pow(D, Q / (2 * den));
}

namespace {

// ln Phi(a) - ln Phi(b), one-layer. The gamma and ln(2 eta tau) pieces of Ei cancel in the
// ratio, leaving the entire part of Ei, so tau -> 0 is exact.
double log_ratio_one_layer(double lam, double Q, double eta, double tau, double a, double b) {
  const double a2 = a * a, b2 = b * b;
  if (tau == 0.0 || eta * tau * std::max(a2, b2) < 1e-12) return (1 - Q) * std::log(a / b);
  const double k = 2 * eta * tau;
  if (eta * tau * std::min(a2, b2) > 50.0) return 0.5 * std::log((lam + a2) / (lam + b2));
  const double e = std::exp(-k * lam);
  return (1 - Q) * e * std::log(a / b) + 0.5 * (1 - Q) * e * (ei_entire(k * a2) - ei_entire(k * b2)) -
         0.5 * (ei_entire(k * (a2 + lam)) - ei_entire(k * (b2 + lam)));
}

double log_ratio_two_layer(double lam, double Q, double eta, double tau, double a, double b) {
  if (!(Q > 0)) throw DomainError("phi_two_layer: Q must be > 0 (zero is an unstable fixed point)");
  if (lam == 0.0) return (1 - Q) * std::log(a / b);
  const double e = std::exp(-8 * eta * tau * lam);
  const double den = Q + (1 - Q) * e;
  auto D = [&](double s) { return lam * e + Q * (1 - e) * (lam + s * s); };
  return (1 - Q) * e / den * std::log(a / b) + Q / (2 * den) * std::log(D(a) / D(b));
}

}  // namespace

double log_phi_ratio(const PhiFactor& phi, double a, double b) {
  if (!(a > 0 && b > 0)) throw DomainError("log_phi_ratio: sigma must be > 0");
  if (phi.tau < 0) throw DomainError("log_phi_ratio: tau must be >= 0");
  switch (phi.case_tag) {
    case PhiFactor::Case::OneLayer:
      return log_ratio_one_layer(phi.lambda, phi.Q, phi.eta, phi.tau, a, b);
    case PhiFactor::Case::FullWidthConv:
      return log_ratio_one_layer(phi.lambda, phi.Q, double(phi.N) * phi.eta, phi.tau, a, b);
    case PhiFactor::Case::TwoLayerSymmetric:
      return log_ratio_two_layer(phi.lambda, phi.Q, phi.eta, phi.tau, a, b);
    case PhiFactor::Case::Converged:
      return 0.5 * std::log((phi.lambda + a * a) / (phi.lambda + b * b));
    case PhiFactor::Case::Numeric: {
      if (!phi.psi) throw ParameterError("numeric PhiFactor needs psi");
      // ln Phi(a) - ln Phi(b) = -int_{ln b}^{ln a} (psi(e^u) - 1) du
      auto f = [&](double u) { return -(phi.psi(std::exp(u)) - 1.0); };
      return adaptive_simpson(f, std::log(b), std::log(a), 1e-12).value;
    }
  }
  throw DomainError("unknown PhiFactor case");
}

double generated_variance(const PhiFactor& phi, const NoiseSchedule& schedule) {
  schedule.validate();
  const double sT = schedule.sigma_max;
  return sT * sT * std::exp(2 * log_phi_ratio(phi, schedule.sigma_min, sT));
}

namespace {
template <typename Drift>
VectorXd heun(const Drift& drift, const NoiseSchedule& schedule, const VectorXd& x_T) {
  const auto s = schedule.sigmas();
  VectorXd x = x_T;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double h = s[i + 1] - s[i];
    const VectorXd d0 = drift(s[i], x);
    const VectorXd xe = x + h * d0;
    const VectorXd d1 = drift(s[i + 1], xe);
    x += 0.5 * h * (d0 + d1);
  }
  return x;
}

void check_finite(const VectorXd& v, double sigma) {
  if (!v.allFinite()) {
    std::ostringstream os;
    os << "pf_ode_numeric: non-finite weight at sigma=" << sigma;
    throw IntegrationError(os.str());
  }
}
}  // namespace

VectorXd pf_ode_numeric(const ModeFn& weight_fn, const ModeFn& bias_fn, const NoiseSchedule& schedule,
                        const VectorXd& x_T) {
  auto drift = [&](double sg, const VectorXd& x) -> VectorXd {
    const VectorXd psi = weight_fn(sg);
    check_finite(psi, sg);
    VectorXd d = (psi.array() - 1.0) * x.array();
    if (bias_fn) {
      const VectorXd b = bias_fn(sg);
      check_finite(b, sg);
      d += b;
    }
    return -d / sg;
  };
  return heun(drift, schedule, x_T);
}

VectorXd pf_ode_numeric_dense(const MatrixFn& weight_fn, const ModeFn& bias_fn, const NoiseSchedule& schedule,
                              const VectorXd& x_T) {
  auto drift = [&](double sg, const VectorXd& x) -> VectorXd {
    const MatrixXd W = weight_fn(sg);
    if (!W.allFinite()) check_finite(VectorXd::Constant(1, NAN), sg);
    VectorXd d = W * x - x;
    if (bias_fn) {
      const VectorXd b = bias_fn(sg);
      check_finite(b, sg);
      d += b;
    }
    return -d / sg;
  };
  return heun(drift, schedule, x_T);
}

namespace {
double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth, double& err) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0) {
    err += std::abs(delta) / 15;
    return left + right + delta / 15;
  }
  if (std::abs(delta) <= 15 * std::max(tol, 1e-15 * std::abs(left + right))) return left + right + delta / 15;
  return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1, err) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1, err);
}
}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                                  int max_depth) {
  if (a == b) return {0.0, 0.0};
  // Split into a few panels first so narrow features are not missed by the initial estimate.
  constexpr int panels = 16;
  double total = 0.0, err = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + (b - a) * p / panels, hi = a + (b - a) * (p + 1) / panels;
    const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6 * (fa + 4 * fm + fb);
    total += simpson_rec(f, lo, hi, fa, fm, fb, whole, tol / panels, max_depth, err);
  }
  if (!std::isfinite(total)) throw IntegrationError("adaptive_simpson: non-finite integrand");
  if (err > tol) {
    std::ostringstream os;
    os << "adaptive_simpson: did not converge, achieved error estimate " << err;
    throw IntegrationError(os.str());
  }
  return {total, err};
}

double mean_transport(const std::function<double(double)>& bias, const PhiFactor& phi,
                      const NoiseSchedule& schedule, double tol) {
  schedule.validate();
  const double s0 = schedule.sigma_min, sT = schedule.sigma_max;
  if (!bias) return 0.0;
  // With u = ln s: B = int_{ln s0}^{ln sT} b(e^u) Phi(s0)/Phi(e^u) du.
  auto f = [&](double u) {
    const double s = std::exp(u);
    const double b = bias(s);
    if (b == 0.0) return 0.0;
    return b * std::exp(log_phi_ratio(phi, s0, s));
  };
  return adaptive_simpson(f, std::log(s0), std::log(sT), tol).value;
}

MatrixXd sample_generated(const GeneratedDistribution& dist, const MatrixXd& basis, Index n, std::uint64_t seed) {
  const Index d = dist.mode_variances.size();
  if (basis.rows() != d || basis.cols() != d) throw SizeError("sample_generated: basis shape mismatch");
  if ((dist.mode_variances.array() < 0).any()) throw DomainError("sample_generated: negative variance");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  MatrixXd z = MatrixXd::NullaryExpr(n, d, [&]() { return nd(rng); });
  MatrixXd x = z * dist.mode_variances.cwiseSqrt().asDiagonal() * basis.transpose();
  const VectorXd mu = dist.mean_modes.size() == d ? VectorXd(basis * dist.mean_modes) : VectorXd::Zero(d);
  x.rowwise() += mu.transpose();
  return x;
}

}  // namespace lindyn
