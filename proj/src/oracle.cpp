#include "lindyn/oracle.hpp"

#include <quadmath.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

namespace lindyn::oracle {

Eigen::Vector4d variant_coefficients(const LossVariant& v, double s) {
  using T = LossVariant::Tag;
  switch (v.tag) {
    case T::EDM: return {1.0, s, 1.0, 0.0};
    case T::FlowMatch: return {s, 1.0 - s, 1.0, -1.0};
    default: break;
  }
  const double a = v.alpha_at(s), sg = v.sigma_at(s);
  switch (v.tag) {
    case T::XPred: return {a, sg, 1.0, 0.0};
    case T::EpsPred: return {a, sg, 0.0, 1.0};
    case T::VPred: return {a, sg, -sg, a};
    default: break;
  }
  throw DomainError("variant_coefficients: unknown variant");
}

LossMoments loss_moments(const DataMomentsd& m, const LossVariant& v, double s) {
  const Eigen::Vector4d c = variant_coefficients(v, s);
  const double A = c(0), B = c(1), C = c(2), D = c(3);
  const Index d = m.mean.size();
  const MatrixXd second = m.covariance + m.mean * m.mean.transpose();
  const MatrixXd I = MatrixXd::Identity(d, d);
  LossMoments lm;
  lm.Exx = A * A * second + B * B * I;
  lm.Eyx = C * A * second + D * B * I;
  lm.Ex = A * m.mean;
  lm.Ey = C * m.mean;
  lm.Eyy = C * C * second.trace() + D * D * double(d);
  return lm;
}

double loss_value(const LossMoments& lm, const MatrixXd& W, const VectorXd& b) {
  return (W * lm.Exx * W.transpose()).trace() + 2.0 * b.dot(W * lm.Ex) + b.squaredNorm() -
         2.0 * (W * lm.Eyx.transpose()).trace() - 2.0 * b.dot(lm.Ey) + lm.Eyy;
}

Gradient loss_gradient(const LossMoments& lm, const MatrixXd& W, const VectorXd& b) {
  return {2.0 * (W * lm.Exx + b * lm.Ex.transpose() - lm.Eyx), 2.0 * (W * lm.Ex + b - lm.Ey)};
}

Gradient fd_gradient(const LossMoments& lm, const MatrixXd& W, const VectorXd& b, double h) {
  Gradient g{MatrixXd(W.rows(), W.cols()), VectorXd(b.size())};
  for (Index i = 0; i < W.rows(); ++i)
    for (Index j = 0; j < W.cols(); ++j) {
      MatrixXd Wp = W, Wm = W;
      Wp(i, j) += h;
      Wm(i, j) -= h;
      g.W(i, j) = (loss_value(lm, Wp, b) - loss_value(lm, Wm, b)) / (2 * h);
    }
  for (Index i = 0; i < b.size(); ++i) {
    VectorXd bp = b, bm = b;
    bp(i) += h;
    bm(i) -= h;
    g.b(i) = (loss_value(lm, W, bp) - loss_value(lm, W, bm)) / (2 * h);
  }
  return g;
}

namespace {
Index wrap(Index i, Index N) { return ((i % N) + N) % N; }

MatrixXd chain(const std::vector<MatrixXd>& layers, int from, int to, Index d) {
  // Product W_to ... W_from (1-based inclusive); identity when empty.
  MatrixXd M = MatrixXd::Identity(d, d);
  for (int l = from; l <= to; ++l) M = layers[l - 1] * M;
  return M;
}
}  // namespace

MatrixXd effective_weight(const Parametrization& p, const std::vector<MatrixXd>& params, Index d) {
  using K = Parametrization::Kind;
  switch (p.kind) {
    case K::OneLayer: return params.at(0);
    case K::TwoLayerSymmetric: return params.at(0) * params.at(0).transpose();
    case K::Residual: return p.c_skip * MatrixXd::Identity(d, d) + p.c_out * params.at(0);
    case K::Circulant: {
      const MatrixXd& w = params.at(0);
      const Index r = p.half_width;
      MatrixXd W = MatrixXd::Zero(d, d);
      for (Index i = 0; i < d; ++i)
        for (Index o = -r; o <= r; ++o) W(i, wrap(i + o, d)) += w(o + r, 0);
      return W;
    }
    case K::DeepLinear: return chain(params, 1, int(params.size()), d);
  }
  throw DomainError("effective_weight: unknown parametrization");
}

FlowSeries gradient_flow_full(const DataMomentsd& moments, double s, double eta, const std::vector<MatrixXd>& params0,
                              const VectorXd& b0, const std::vector<double>& tau_grid, const LossVariant& variant,
                              const Parametrization& param, const OdeSolveConfig& ode) {
  const Index d = moments.mean.size();
  if (b0.size() != d) throw SizeError("gradient_flow_full: b0 length != d");
  using K = Parametrization::Kind;
  if (param.kind == K::DeepLinear && int(params0.size()) != param.depth)
    throw SizeError("gradient_flow_full: need one matrix per layer");
  if (param.kind == K::Circulant && (params0.at(0).rows() != 2 * param.half_width + 1 || params0.at(0).cols() != 1))
    throw SizeError("gradient_flow_full: circulant params must be a K x 1 column");
  const LossMoments lm = loss_moments(moments, variant, s);

  std::vector<std::pair<Index, Index>> shapes;
  Index total = 0;
  for (const auto& p : params0) {
    shapes.emplace_back(p.rows(), p.cols());
    total += p.size();
  }
  auto unpack = [&](const VectorXd& y, std::vector<MatrixXd>& ps, VectorXd& b) {
    ps.clear();
    Index off = 0;
    for (auto [r, c] : shapes) {
      ps.push_back(Eigen::Map<const MatrixXd>(y.data() + off, r, c));
      off += r * c;
    }
    b = y.segment(off, d);
  };
  VectorXd y0(total + d);
  {
    Index off = 0;
    for (const auto& p : params0) {
      y0.segment(off, p.size()) = Eigen::Map<const VectorXd>(p.data(), p.size());
      off += p.size();
    }
    y0.segment(off, d) = b0;
  }

  auto rhs = [&](double, const VectorXd& y) -> VectorXd {
    std::vector<MatrixXd> ps;
    VectorXd b;
    unpack(y, ps, b);
    const MatrixXd W = effective_weight(param, ps, d);
    const Gradient g = loss_gradient(lm, W, b);
    std::vector<MatrixXd> gp;
    switch (param.kind) {
      case K::OneLayer: gp.push_back(g.W); break;
      case K::TwoLayerSymmetric: gp.push_back((g.W + g.W.transpose()) * ps[0]); break;
      case K::Residual: gp.push_back(param.c_out * g.W); break;
      case K::Circulant: {
        const Index r = param.half_width;
        MatrixXd gw = MatrixXd::Zero(2 * r + 1, 1);
        for (Index o = -r; o <= r; ++o)
          for (Index i = 0; i < d; ++i) gw(o + r, 0) += g.W(i, wrap(i + o, d));
        gp.push_back(gw);
        break;
      }
      case K::DeepLinear: {
        const int L = int(ps.size());
        for (int l = 1; l <= L; ++l)
          gp.push_back(chain(ps, l + 1, L, d).transpose() * g.W * chain(ps, 1, l - 1, d).transpose());
        break;
      }
    }
    VectorXd dy(y.size());
    Index off = 0;
    for (const auto& m : gp) {
      dy.segment(off, m.size()) = -eta * Eigen::Map<const VectorXd>(m.data(), m.size());
      off += m.size();
    }
    dy.segment(off, d) = -eta * g.b;
    return dy;
  };

  std::vector<double> grid;
  const bool prepend = tau_grid.empty() || tau_grid.front() > 0;
  if (prepend) grid.push_back(0.0);
  grid.insert(grid.end(), tau_grid.begin(), tau_grid.end());
  auto ys = integrate_on_grid<VectorXd>(rhs, y0, grid, ode);
  if (prepend) ys.erase(ys.begin());

  FlowSeries out;
  out.tau = tau_grid;
  for (const auto& y : ys) {
    std::vector<MatrixXd> ps;
    VectorXd b;
    unpack(y, ps, b);
    out.W.push_back(effective_weight(param, ps, d));
    out.b.push_back(b);
    out.params.push_back(std::move(ps));
  }
  return out;
}

std::vector<MatrixXd> discrete_gd_full(const LossMoments& lm, MatrixXd W, VectorXd b, double eta, long steps) {
  std::vector<MatrixXd> out{W};
  for (long t = 0; t < steps; ++t) {
    const Gradient g = loss_gradient(lm, W, b);
    W -= eta * g.W;
    b -= eta * g.b;
    out.push_back(W);
  }
  return out;
}

MatrixXd draw_gaussian(const DataMomentsd& moments, Index n, std::mt19937_64& rng) {
  const Index d = moments.mean.size();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(moments.covariance);
  const MatrixXd root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  std::normal_distribution<double> nd;
  MatrixXd z = MatrixXd::NullaryExpr(n, d, [&]() { return nd(rng); });
  MatrixXd x = z * root.transpose();
  x.rowwise() += moments.mean.transpose();
  return x;
}

namespace {
MCEstimate summarize(const VectorXd& v) {
  const double n = double(v.size());
  const double mean = v.mean();
  const double var = (v.array() - mean).square().sum() / (n - 1);
  return {mean, std::sqrt(var / n)};
}
}  // namespace

MCEstimate mc_dsm_loss(const MatrixXd& W, const VectorXd& b, const DataMomentsd& moments, double sigma, Index n,
                       std::uint64_t seed) {
  if (n < 2) throw ParameterError("mc_dsm_loss: n must be >= 2");
  std::mt19937_64 rng(seed);
  const Index d = moments.mean.size();
  const MatrixXd x0 = draw_gaussian(moments, n, rng);
  std::normal_distribution<double> nd;
  const MatrixXd z = MatrixXd::NullaryExpr(n, d, [&]() { return nd(rng); });
  MatrixXd r = (x0 + sigma * z) * W.transpose() - x0;
  r.rowwise() += b.transpose();
  return summarize(r.rowwise().squaredNorm());
}

MCEstimate mc_score_error(const MatrixXd& W, const VectorXd& b, const DataMomentsd& moments, double sigma, Index n,
                          std::uint64_t seed) {
  if (n < 2) throw ParameterError("mc_score_error: n must be >= 2");
  const Index d = moments.mean.size();
  const MatrixXd I = MatrixXd::Identity(d, d);
  // Optimal affine denoiser: W* = Sigma (Sigma + sigma^2 I)^{-1}, b* = (I - W*) mu.
  const MatrixXd Ws = (moments.covariance + sigma * sigma * I).ldlt().solve(moments.covariance).transpose();
  const VectorXd bs = (I - Ws) * moments.mean;
  std::mt19937_64 rng(seed);
  const MatrixXd x0 = draw_gaussian(moments, n, rng);
  std::normal_distribution<double> nd;
  const MatrixXd z = MatrixXd::NullaryExpr(n, d, [&]() { return nd(rng); });
  const MatrixXd x = x0 + sigma * z;
  MatrixXd diff = x * (W - Ws).transpose();
  diff.rowwise() += (b - bs).transpose();
  return summarize(diff.rowwise().squaredNorm() / std::pow(sigma, 4));
}

MatrixXcd dft_matrix(Index N) {
  MatrixXcd F(N, N);
  for (Index j = 0; j < N; ++j)
    for (Index k = 0; k < N; ++k)
      F(j, k) = std::polar(1.0 / std::sqrt(double(N)), -2.0 * std::numbers::pi * double((j * k) % N) / double(N));
  return F;
}

VectorXd dense_dft_diag(const MatrixXd& sigma) {
  const Index N = sigma.rows();
  if (N > 512) throw SizeError("dense_dft_diag: N exceeds the dense guard (512)");
  const MatrixXcd F = dft_matrix(N);
  const MatrixXcd M = F.adjoint() * sigma.cast<std::complex<double>>() * F;
  return M.diagonal().real();
}

double dense_gaussian_kl(const VectorXd& mu1, const MatrixXd& S1, const VectorXd& mu2, const MatrixXd& S2) {
  const Index d = mu1.size();
  Eigen::LDLT<MatrixXd> l2(S2), l1(S1);
  const double logdet1 = l1.vectorD().array().log().sum();
  const double logdet2 = l2.vectorD().array().log().sum();
  const VectorXd dm = mu2 - mu1;
  return 0.5 * (logdet2 - logdet1 - double(d) + l2.solve(S1).trace() + dm.dot(l2.solve(dm)));
}

double ei_series(double x) {
  if (x == 0.0 || std::abs(x) > 40) throw DomainError("ei_series: need 0 < |x| <= 40");
  const __float128 g = strtoflt128("0.57721566490153286060651209008240243104215933593992", nullptr);
  const __float128 xq = x;
  __float128 s = 0, t = 1;
  for (int n = 1; n < 4000; ++n) {
    t *= xq / n;
    const __float128 term = t / n;
    s += term;
    if (n > 5 && fabsq(term) < (__float128)1e-40 * fabsq(s)) break;
  }
  return double(g + logq(fabsq(xq)) + s);
}

double erf_series(double x) {
  if (std::abs(x) > 8) throw DomainError("erf_series: need |x| <= 8");
  const __float128 xq = x, x2 = xq * xq;
  __float128 s = 0, t = xq;  // t = (-1)^n x^(2n+1) / n!
  for (int n = 0; n < 4000; ++n) {
    const __float128 term = t / (2 * n + 1);
    s += term;
    if (n > 3 && fabsq(term) < (__float128)1e-40 * fabsq(s)) break;
    t *= -x2 / (n + 1);
  }
  return double(2 / sqrtq(M_PIq) * s);
}

}  // namespace lindyn::oracle
