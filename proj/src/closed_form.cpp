#include "lindyn/closed_form.hpp"

#include <cmath>
#include <numbers>

namespace lindyn {

double LossVariant::alpha_at(double t) const {
  return alpha ? alpha(t) : std::cos(0.5 * std::numbers::pi * t);
}
double LossVariant::sigma_at(double t) const {
  return sigma ? sigma(t) : std::sin(0.5 * std::numbers::pi * t);
}

const char* to_string(LossVariant::Tag tag) {
  switch (tag) {
    case LossVariant::Tag::EDM: return "EDM";
    case LossVariant::Tag::XPred: return "XPred";
    case LossVariant::Tag::EpsPred: return "EpsPred";
    case LossVariant::Tag::VPred: return "VPred";
    case LossVariant::Tag::FlowMatch: return "FlowMatch";
  }
  return "?";
}

ModeQuadratic mode_quadratic(const LossVariant& v, double s) {
  using T = LossVariant::Tag;
  if (v.tag == T::EDM) return {1.0, s * s, 1.0, 0.0};
  if (v.tag == T::FlowMatch) return {s * s, (1 - s) * (1 - s), s, -(1 - s)};
  const double a = v.alpha_at(s), sg = v.sigma_at(s);
  if (!std::isfinite(a) || !std::isfinite(sg)) throw DomainError("loss schedule not finite at t");
  switch (v.tag) {
    case T::XPred: return {a * a, sg * sg, a, 0.0};
    case T::EpsPred: return {a * a, sg * sg, 0.0, sg};
    case T::VPred: return {a * a, sg * sg, -a * sg, a * sg};
    default: break;
  }
  throw DomainError("unknown loss variant");
}

double optimal_mode_weight(const LossVariant& v, double lam, double s) {
  const ModeQuadratic m = mode_quadratic(v, s);
  const double den = m.rate(lam);
  if (!(den > 0)) throw DomainError("optimal_mode_weight: zero denominator");
  return m.cross(lam) / den;
}

double convergence_rate(const LossVariant& v, double lam, double s) {
  return mode_quadratic(v, s).rate(lam);
}

void DynamicsConfig::validate(Index dim) const {
  if (!(eta > 0)) throw ParameterError("dynamics.eta must be > 0");
  for (std::size_t i = 1; i < tau_grid.size(); ++i)
    if (!(tau_grid[i] > tau_grid[i - 1])) throw ParameterError("dynamics.tau grid must be strictly increasing");
  if (!tau_grid.empty() && tau_grid.front() < 0) throw ParameterError("dynamics.tau grid must be nonnegative");
  if (init_Q.size() != dim) throw ParameterError("dynamics.init_Q length must equal dim");
  if (!(sigma > 0)) throw ParameterError("dynamics.sigma must be > 0");
  if (arch.kind == Architecture::Kind::TwoLayerSymmetric && (init_Q.array() < 0).any())
    throw ParameterError("dynamics.init_Q must be >= 0 for the symmetric two-layer net");
}

VectorXd one_layer_bias(const VectorXd& b0, double eta, double tau) { return b0 * std::exp(-2 * eta * tau); }

namespace {
VectorXd grid_vec(const std::vector<double>& g) {
  return Eigen::Map<const VectorXd>(g.data(), Index(g.size()));
}
}  // namespace

std::vector<ModeTrajectory> one_layer_trajectory(const DynamicsConfig& cfg, const CovarianceModeld& model) {
  cfg.validate(model.dim());
  std::vector<ModeTrajectory> out;
  const VectorXd tau = grid_vec(cfg.tau_grid);
  for (Index k = 0; k < model.dim(); ++k) {
    ModeTrajectory tr{k, tau, VectorXd(tau.size()), one_layer_target(model.spectrum(k), cfg.sigma)};
    for (Index i = 0; i < tau.size(); ++i)
      tr.values(i) = one_layer_weight(tau(i), model.spectrum(k), cfg.sigma, cfg.init_Q(k), cfg.eta);
    out.push_back(std::move(tr));
  }
  return out;
}

std::vector<ModeTrajectory> two_layer_trajectory(const DynamicsConfig& cfg, const CovarianceModeld& model) {
  cfg.validate(model.dim());
  if ((cfg.init_Q.array() < 0).any()) throw DomainError("two_layer_trajectory: Q_k must be >= 0");
  std::vector<ModeTrajectory> out;
  const VectorXd tau = grid_vec(cfg.tau_grid);
  for (Index k = 0; k < model.dim(); ++k) {
    ModeTrajectory tr{k, tau, VectorXd(tau.size()), one_layer_target(model.spectrum(k), cfg.sigma)};
    for (Index i = 0; i < tau.size(); ++i)
      tr.values(i) = two_layer_weight(tau(i), model.spectrum(k), cfg.sigma, cfg.init_Q(k), cfg.eta);
    out.push_back(std::move(tr));
  }
  return out;
}

std::vector<ModeTrajectory> residual_reparam_trajectory(const DynamicsConfig& cfg, const CovarianceModeld& model) {
  cfg.validate(model.dim());
  const double cs = cfg.arch.c_skip, co = cfg.arch.c_out;
  if (co == 0.0) throw ParameterError("residual: c_out must be nonzero");
  DynamicsConfig eff = cfg;
  eff.eta = co * co * cfg.eta;
  eff.init_Q = (cs + co * cfg.init_Q.array()).matrix();
  eff.arch = Architecture::one_layer();
  return one_layer_trajectory(eff, model);
}

DiscreteGDResult discrete_gd_trajectory(const DynamicsConfig& cfg, const CovarianceModeld& model, long steps) {
  if (steps < 0) throw ParameterError("discrete_gd_trajectory: steps must be >= 0");
  const double eta = cfg.arch.step > 0 ? cfg.arch.step : cfg.eta;
  if (!(eta > 0)) throw ParameterError("discrete_gd_trajectory: step must be > 0");
  if (cfg.init_Q.size() != model.dim()) throw ParameterError("dynamics.init_Q length must equal dim");
  DiscreteGDResult res;
  const VectorXd it = VectorXd::LinSpaced(steps + 1, 0.0, double(steps));
  for (Index k = 0; k < model.dim(); ++k) {
    const double lam = model.spectrum(k);
    ModeTrajectory tr{k, it, VectorXd(steps + 1), one_layer_target(lam, cfg.sigma)};
    for (long t = 0; t <= steps; ++t) tr.values(t) = discrete_gd_weight(t, lam, cfg.sigma, cfg.init_Q(k), eta);
    res.diverged.push_back(std::abs(1 - 2 * eta * (cfg.sigma * cfg.sigma + lam)) >= 1.0);
    res.modes.push_back(std::move(tr));
  }
  return res;
}

MatrixXd aligned_matrix(const CovarianceModeld& model, const VectorXd& values) {
  return model.basis * values.asDiagonal() * model.basis.transpose();
}

MeanCovCoupling mean_cov_coupling(const CovarianceModeld& model, const VectorXd& mu, double sigma) {
  const Index d = model.dim();
  if (mu.size() != d) throw SizeError("mean_cov_coupling: mean length != dim");
  MeanCovCoupling c;
  c.overlaps = model.basis.transpose() * mu;
  c.diag = VectorXd::Zero(d + 1);
  c.diag.head(d) = model.spectrum.array() + sigma * sigma;
  c.q = VectorXd::Ones(d + 1);
  c.q.head(d) = c.overlaps;
  c.dynamics_matrix = c.diag.asDiagonal();
  c.dynamics_matrix += c.q * c.q.transpose();
  return c;
}

MeanCoupledResult mean_coupled_trajectory(const DataMomentsd& moments, const DynamicsConfig& cfg,
                                          const std::optional<MatrixXd>& W0, const std::optional<VectorXd>& b0) {
  MeanCoupledResult r;
  r.model = model_from_covariance(moments.covariance);
  const Index d = r.model.dim();
  cfg.validate(d);
  const MatrixXd& U = r.model.basis;
  r.coupling = mean_cov_coupling(r.model, moments.mean, cfg.sigma);

  // X = [W u_1, ..., W u_d, b - mu] obeys dX/dtau = -2 eta X M~ + 2 eta R.
  MatrixXd R = MatrixXd::Zero(d, d + 1);
  R.leftCols(d) = U * r.model.spectrum.asDiagonal();
  const MatrixXd Wi = W0 ? *W0 : aligned_matrix(r.model, cfg.init_Q);
  const VectorXd bi = b0 ? *b0 : VectorXd::Zero(d);
  MatrixXd X0(d, d + 1);
  X0.leftCols(d) = Wi * U;
  X0.col(d) = bi - moments.mean;

  Eigen::SelfAdjointEigenSolver<MatrixXd> es(r.coupling.dynamics_matrix);
  const MatrixXd& V = es.eigenvectors();
  const VectorXd& kap = es.eigenvalues();
  if (kap.minCoeff() <= 0) throw DomainError("mean_coupled_trajectory: coupling matrix not positive definite");
  const MatrixXd Xs = R * V * kap.cwiseInverse().asDiagonal() * V.transpose();
  const MatrixXd D0 = (X0 - Xs) * V;

  auto unpack = [&](const MatrixXd& X, MatrixXd& W, VectorXd& b) {
    W = X.leftCols(d) * U.transpose();
    b = X.col(d) + moments.mean;
  };
  unpack(Xs, r.W_star, r.b_star);
  for (double tau : cfg.tau_grid) {
    const VectorXd decay = (-2 * cfg.eta * tau * kap.array()).exp();
    const MatrixXd X = Xs + D0 * decay.asDiagonal() * V.transpose();
    MatrixXd W;
    VectorXd b;
    unpack(X, W, b);
    r.tau.push_back(tau);
    r.W.push_back(std::move(W));
    r.b.push_back(std::move(b));
  }
  return r;
}

DeepModeResult deep_linear_mode(int L, double lam, double sigma, double c0, double eta,
                                const std::vector<double>& tau_grid) {
  if (L < 1) throw ParameterError("deep_linear_mode: L must be >= 1");
  if (L >= 2 && !(c0 > 0)) throw DomainError("deep_linear_mode: c0 must be > 0 for L >= 2");
  const double expo = 2.0 - 2.0 / L;
  const double s2 = sigma * sigma;
  auto f = [&](double, double c) {
    const double base = L == 1 ? 1.0 : std::pow(std::max(c, 0.0), expo);
    return eta * L * (lam - (s2 + lam) * c) * base;
  };
  DeepModeResult r;
  r.tau = grid_vec(tau_grid);
  r.values = VectorXd::Constant(r.tau.size(), c0);
  if (tau_grid.empty()) return r;
  std::vector<double> grid;
  const bool prepend = tau_grid.front() > 0;
  if (prepend) grid.push_back(0.0);
  grid.insert(grid.end(), tau_grid.begin(), tau_grid.end());
  OdeSolveConfig ode;
  ode.rtol = 1e-12;
  ode.atol = 1e-15;
  const double target = lam / (lam + s2);
  try {
    double c = c0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      const double dev = c - target;
      if (std::abs(dev) <= 1e-8 * target) {
        // linearised tail, exact to O(dev^2); explicit steps are stability-bound here
        const double k = eta * L * (s2 + lam) * (L == 1 ? 1.0 : std::pow(target, expo));
        c = target + dev * std::exp(-k * (grid[i + 1] - grid[i]));
      } else {
        c = integrate_on_grid<double>(f, c, {grid[i], grid[i + 1]}, ode).back();
      }
      const Index j = Index(i) + (prepend ? 0 : 1);
      if (j < r.tau.size()) r.values(j) = c;
    }
  } catch (const IntegrationError&) {
    r.stalled = true;
    return r;
  }
  if (L >= 3 && c0 != target && std::abs(r.values(r.values.size() - 1) - c0) <= 1e-12 * std::max(1.0, std::abs(c0)))
    r.stalled = true;
  return r;
}

std::vector<MatrixXd> two_layer_overlap_simulation(const CovarianceModeld& model, double sigma, double eta,
                                                   const MatrixXd& q_init, const std::vector<double>& tau_grid,
                                                   const OdeSolveConfig& ode) {
  const Index d = model.dim();
  if (q_init.rows() != d) throw SizeError("two_layer_overlap_simulation: q_init must have d rows");
  const VectorXd& lam = model.spectrum;
  const VectorXd lam2 = lam.array() + 2 * sigma * sigma;
  auto f = [&](double, const MatrixXd& O) -> MatrixXd {
    const MatrixXd O2 = O * O;
    MatrixXd dO = lam.asDiagonal() * O + O * lam.asDiagonal();
    dO -= O * lam2.asDiagonal() * O;
    dO -= 0.5 * (lam.asDiagonal() * O2 + O2 * lam.asDiagonal());
    return 4 * eta * dO;
  };
  std::vector<double> grid;
  const bool prepend = tau_grid.empty() || tau_grid.front() > 0;
  if (prepend) grid.push_back(0.0);
  grid.insert(grid.end(), tau_grid.begin(), tau_grid.end());
  MatrixXd O0 = q_init * q_init.transpose();
  auto ys = integrate_on_grid<MatrixXd>(f, O0, grid, ode);
  if (prepend) ys.erase(ys.begin());
  return ys;
}

FGTrajectory two_layer_fg_mode(double lam, double sigma, double eta, double f0, double g0,
                               const std::vector<double>& tau_grid) {
  const double A = eta * lam, B = eta * (sigma * sigma + lam);
  using V2 = Eigen::Vector2d;
  auto rhs = [&](double, const V2& y) -> V2 {
    return V2(A * y(1) - B * y(1) * y(1) * y(0), A * y(0) - B * y(0) * y(0) * y(1));
  };
  std::vector<double> grid;
  const bool prepend = tau_grid.empty() || tau_grid.front() > 0;
  if (prepend) grid.push_back(0.0);
  grid.insert(grid.end(), tau_grid.begin(), tau_grid.end());
  const auto ys = integrate_on_grid<V2>(rhs, V2(f0, g0), grid);
  FGTrajectory r;
  r.tau = grid_vec(tau_grid);
  r.f.resize(r.tau.size());
  r.g.resize(r.tau.size());
  for (Index i = 0; i < r.tau.size(); ++i) {
    r.f(i) = ys[i + (prepend ? 1 : 0)](0);
    r.g(i) = ys[i + (prepend ? 1 : 0)](1);
  }
  r.conserved = f0 * f0 - g0 * g0;
  return r;
}

}  // namespace lindyn
