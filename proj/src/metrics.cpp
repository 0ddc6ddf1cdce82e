#include "lindyn/metrics.hpp"

#include <cmath>

namespace lindyn {

ModeKL kl_shared_basis(const VectorXd& lam1, const VectorXd& lam2, const VectorXd& mu1, const VectorXd& mu2,
                       const MatrixXd& U) {
  const Index d = lam1.size();
  if (lam2.size() != d || mu1.size() != U.rows() || mu2.size() != U.rows() || U.cols() != d)
    throw SizeError("kl_shared_basis: shape mismatch");
  ModeKL r;
  r.per_mode.resize(d);
  const VectorXd dm = U.transpose() * (mu2 - mu1);
  for (Index k = 0; k < d; ++k) {
    double a = lam1(k), b = lam2(k);
    if (!(a > 0 && b > 0)) throw DomainError("kl_shared_basis: variances must be > 0");
    if (a < variance_floor) { a = variance_floor; ++r.clamped; }
    if (b < variance_floor) { b = variance_floor; ++r.clamped; }
    const double rho = a / b;
    r.per_mode(k) = 0.5 * (rho - std::log(rho) - 1.0) + dm(k) * dm(k) / (2 * b);
  }
  r.total = r.per_mode.sum();
  return r;
}

double score_error(const VectorXd& lam, const VectorXd& delta_norms, double delta_b, double sigma, double eta,
                   double tau) {
  if (lam.size() != delta_norms.size()) throw SizeError("score_error: shape mismatch");
  const double s2 = sigma * sigma;
  double e = delta_b * delta_b * std::exp(-4 * eta * tau);
  for (Index k = 0; k < lam.size(); ++k)
    e += (s2 + lam(k)) * delta_norms(k) * delta_norms(k) * std::exp(-4 * eta * (s2 + lam(k)) * tau);
  return e / (s2 * s2);
}

double denoiser_error(const MatrixXd& W, const VectorXd& b, double sigma, const CovarianceModeld& model) {
  const Index d = model.dim();
  const VectorXd wstar = model.spectrum.array() / (model.spectrum.array() + sigma * sigma);
  const MatrixXd dW = W - model.basis * wstar.asDiagonal() * model.basis.transpose();
  const MatrixXd C = model.covariance() + sigma * sigma * MatrixXd::Identity(d, d);
  return (dW * C * dW.transpose()).trace() + b.squaredNorm();
}

VectorXd mode_deltas(const MatrixXd& W0, double sigma, const CovarianceModeld& model) {
  VectorXd out(model.dim());
  for (Index k = 0; k < model.dim(); ++k) {
    const double w = model.spectrum(k) / (model.spectrum(k) + sigma * sigma);
    out(k) = (W0 * model.u(k) - w * model.u(k)).norm();
  }
  return out;
}

double loss_floor(double sigma, const CovarianceModeld& model) {
  const double s2 = sigma * sigma;
  return s2 * (model.spectrum.array() / (model.spectrum.array() + s2)).sum();
}

double training_loss(const MatrixXd& W, const VectorXd& b, double sigma, const CovarianceModeld& model) {
  return denoiser_error(W, b, sigma, model) + loss_floor(sigma, model);
}

}  // namespace lindyn
