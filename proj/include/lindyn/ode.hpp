#pragma once

#include "lindyn/types.hpp"

#include <cmath>
#include <cstddef>
#include <string>

namespace lindyn {

struct OdeSolveConfig {
  enum class Method { RK4Fixed, RK45Adaptive };
  Method method = Method::RK45Adaptive;
  /// RK4Fixed: substeps per output interval. RK45Adaptive: unused.
  int substeps = 64;
  double rtol = 1e-12;
  double atol = 1e-14;
  std::size_t max_steps = 10'000'000;
  double min_step = 1e-300;
};

namespace detail {
inline double err_norm(double e, double y0, double y1, double atol, double rtol) {
  const double s = atol + rtol * std::max(std::abs(y0), std::abs(y1));
  return std::abs(e) / s;
}
template <typename Derived>
double err_norm(const Eigen::MatrixBase<Derived>& e, const Eigen::MatrixBase<Derived>& y0,
                const Eigen::MatrixBase<Derived>& y1, double atol, double rtol) {
  const auto s = (atol + rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array()).eval();
  return (e.array().abs() / s).maxCoeff();
}
inline bool all_finite(double y) { return std::isfinite(y); }
template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& y) {
  return y.allFinite();
}
}  // namespace detail

/// One classical RK4 step.
template <typename State, typename F>
State rk4_step(F&& f, double t, const State& y, double h) {
  const State k1 = f(t, y);
  const State k2 = f(t + 0.5 * h, State(y + 0.5 * h * k1));
  const State k3 = f(t + 0.5 * h, State(y + 0.5 * h * k2));
  const State k4 = f(t + h, State(y + h * k3));
  return State(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Dormand-Prince 5(4) with PI-free step control, integrating y from t0 to t1.
/// `h` is the trial step carried between calls.
template <typename State, typename F>
State dopri5(F&& f, double t0, double t1, State y, double& h, const OdeSolveConfig& cfg,
             std::size_t& steps) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;
  double t = t0;
  if (t1 <= t0) return y;
  if (!(h > 0)) h = (t1 - t0) * 1e-3;
  State k1 = f(t, y);
  while (t < t1) {
    if (++steps > cfg.max_steps) throw IntegrationError("dopri5: max_steps exceeded at t=" + std::to_string(t));
    bool last = false;
    double hs = h;
    if (t + hs >= t1) {
      hs = t1 - t;
      last = true;
    }
    const State k2 = f(t + c2 * hs, State(y + hs * (a21 * k1)));
    const State k3 = f(t + c3 * hs, State(y + hs * (a31 * k1 + a32 * k2)));
    const State k4 = f(t + c4 * hs, State(y + hs * (a41 * k1 + a42 * k2 + a43 * k3)));
    const State k5 = f(t + c5 * hs, State(y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    const State k6 = f(t + hs, State(y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    const State y5 = State(y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6));
    const State k7 = f(t + hs, y5);
    const State err = State(hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));
    double en = detail::err_norm(err, y, y5, cfg.atol, cfg.rtol);
    if (!std::isfinite(en)) en = 1e10;
    if (en <= 1.0) {
      t = last ? t1 : t + hs;
      y = y5;
      k1 = k7;
      const double fac = en == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(en, -0.2)));
      if (!last) h = hs * fac;
    } else {
      h = hs * std::max(0.1, 0.9 * std::pow(en, -0.2));
      if (h < cfg.min_step) throw IntegrationError("dopri5: step size underflow at t=" + std::to_string(t));
    }
  }
  return y;
}

/// Integrates dy/dt = f(t, y) and returns y at each point of `grid` (grid[0] is the initial time).
template <typename State, typename F>
std::vector<State> integrate_on_grid(F&& f, const State& y0, const std::vector<double>& grid,
                                     const OdeSolveConfig& cfg = {}) {
  std::vector<State> out;
  out.reserve(grid.size());
  if (grid.empty()) return out;
  State y = y0;
  out.push_back(y);
  double h = 0;
  std::size_t steps = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double a = grid[i - 1], b = grid[i];
    if (!(b >= a)) throw ParameterError("integrate_on_grid: grid must be nondecreasing");
    if (cfg.method == OdeSolveConfig::Method::RK4Fixed) {
      const double hh = (b - a) / cfg.substeps;
      for (int s = 0; s < cfg.substeps; ++s) y = rk4_step<State>(f, a + s * hh, y, hh);
    } else {
      y = dopri5<State>(f, a, b, y, h, cfg, steps);
    }
    if (!detail::all_finite(y)) throw IntegrationError("integrate_on_grid: non-finite state at t=" + std::to_string(b));
    out.push_back(y);
  }
  return out;
}

}  // namespace lindyn
