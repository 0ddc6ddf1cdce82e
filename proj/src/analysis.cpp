#include "lindyn/analysis.hpp"

#include <cmath>

namespace lindyn {

double EmergenceCriterion::threshold(double v0, double v_inf) const {
  if (kind == Kind::GeometricMean) return std::sqrt(v0 * v_inf);
  return 2 * v0 * v_inf / (v0 + v_inf);
}

void GrayZone::validate() const {
  if (!(lower > 0 && lower < 1)) throw ValidationError("analysis.gray_zone.lower must lie in (0, 1)");
  if (!(upper > 1)) throw ValidationError("analysis.gray_zone.upper must be > 1");
}

const char* to_string(PowerLawFit::Branch b) {
  switch (b) {
    case PowerLawFit::Branch::Increasing: return "increasing";
    case PowerLawFit::Branch::Decreasing: return "decreasing";
    case PowerLawFit::Branch::Pooled: return "pooled";
  }
  return "?";
}

std::optional<double> emergence_time(const VectorXd& tau, const VectorXd& v, double v0, double v_inf,
                                     const EmergenceCriterion& crit) {
  if (tau.size() != v.size()) throw SizeError("emergence_time: shape mismatch");
  if (tau.size() < 2) throw InsufficientDataError("emergence_time: need at least two points");
  if (v0 == v_inf) return std::nullopt;
  const double thr = crit.threshold(v0, v_inf);
  const double dir = v_inf > v0 ? 1.0 : -1.0;
  auto crossed = [&](double x) { return dir * (x - thr) >= 0; };
  for (Index i = 0; i < tau.size(); ++i) {
    if (!crossed(v(i))) continue;
    if (i == 0) return tau(0);
    const double ta = tau(i - 1), tb = tau(i), va = v(i - 1), vb = v(i);
    const bool log_t = ta > 0 && tb > 0;
    const bool log_v = va > 0 && vb > 0 && thr > 0;
    const double xa = log_t ? std::log(ta) : ta, xb = log_t ? std::log(tb) : tb;
    const double ya = log_v ? std::log(va) : va, yb = log_v ? std::log(vb) : vb;
    const double yt = log_v ? std::log(thr) : thr;
    const double frac = yb == ya ? 1.0 : (yt - ya) / (yb - ya);
    const double x = xa + frac * (xb - xa);
    return log_t ? std::exp(x) : x;
  }
  return std::nullopt;
}

namespace {
bool in_gray_zone(double v0, double target, const GrayZone& gz) {
  const double r = v0 / target;
  return r >= gz.lower && r <= gz.upper;
}

std::optional<PowerLawFit> fit_points(const std::vector<double>& x, const std::vector<double>& y,
                                      PowerLawFit::Branch branch) {
  const int n = int(x.size());
  if (n < 2) return std::nullopt;
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) return std::nullopt;
  PowerLawFit f;
  const double slope = sxy / sxx;
  f.alpha = -slope;
  f.intercept = my - slope * mx;
  double ssr = 0;
  for (int i = 0; i < n; ++i) {
    const double e = y[i] - (f.intercept + slope * x[i]);
    ssr += e * e;
  }
  f.r_squared = syy == 0 ? 1.0 : std::clamp(1.0 - ssr / syy, 0.0, 1.0);
  f.n_used = n;
  f.branch = branch;
  return f;
}

void collect(const VectorXd& lambdas, const VectorXd& taus, const GrayZone& gz, const VectorXd& v0s,
             const VectorXd& targets, PowerLawFit::Branch branch, std::vector<double>& x, std::vector<double>& y,
             std::vector<bool>* excluded) {
  const Index n = lambdas.size();
  if (taus.size() != n || v0s.size() != n || targets.size() != n) throw SizeError("power_law_fit: shape mismatch");
  for (Index i = 0; i < n; ++i) {
    const bool inc = targets(i) > v0s(i);
    const bool skip = in_gray_zone(v0s(i), targets(i), gz) || !(taus(i) > 0) || !std::isfinite(taus(i)) ||
                      !(lambdas(i) > 0) || targets(i) == v0s(i);
    if (excluded) (*excluded)[i] = skip;
    if (skip) continue;
    if (branch == PowerLawFit::Branch::Increasing && !inc) continue;
    if (branch == PowerLawFit::Branch::Decreasing && inc) continue;
    x.push_back(std::log(lambdas(i)));
    y.push_back(std::log(taus(i)));
  }
}
}  // namespace

PowerLawFit power_law_fit_branch(const VectorXd& lambdas, const VectorXd& taus, const GrayZone& gz,
                                 const VectorXd& v0s, const VectorXd& targets, PowerLawFit::Branch branch) {
  gz.validate();
  std::vector<double> x, y;
  collect(lambdas, taus, gz, v0s, targets, branch, x, y, nullptr);
  auto f = fit_points(x, y, branch);
  if (!f) throw InsufficientDataError(std::string("power_law_fit: fewer than 2 usable points in branch ") + to_string(branch));
  return *f;
}

PowerLawResult power_law_fit(const VectorXd& lambdas, const VectorXd& taus, const GrayZone& gz, const VectorXd& v0s,
                             const VectorXd& targets) {
  gz.validate();
  PowerLawResult r;
  r.excluded.assign(lambdas.size(), false);
  using B = PowerLawFit::Branch;
  for (B b : {B::Increasing, B::Decreasing, B::Pooled}) {
    std::vector<double> x, y;
    collect(lambdas, taus, gz, v0s, targets, b, x, y, b == B::Pooled ? &r.excluded : nullptr);
    auto f = fit_points(x, y, b);
    if (b == B::Increasing) r.increasing = f;
    if (b == B::Decreasing) r.decreasing = f;
    if (b == B::Pooled) r.pooled = f;
  }
  if (!r.increasing && !r.decreasing && !r.pooled)
    throw InsufficientDataError("power_law_fit: fewer than 2 usable points in every branch");
  return r;
}

double alignment_score(const MatrixXd& sigma_sample, const MatrixXd& U) {
  const MatrixXd M = U.transpose() * sigma_sample * U;
  const double all = M.squaredNorm();
  if (all == 0) throw DomainError("alignment_score: zero matrix");
  return M.diagonal().squaredNorm() / all;
}

}  // namespace lindyn
