#include "lindyn/gaussian_model.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <functional>

namespace lindyn {

MatrixXd random_orthogonal(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  MatrixXd g = MatrixXd::NullaryExpr(dim, dim, [&]() { return nd(rng); });
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ();
  fix_eigvec_signs(q);
  return q;
}

VectorXd make_spectrum(const SpectrumSpec& spec, Index dim, std::mt19937_64& rng) {
  if (dim < 1) throw ParameterError("make_spectrum: dim must be >= 1");
  VectorXd lam(dim);
  switch (spec.kind) {
    case SpectrumSpec::Kind::LogNormal: {
      const double mu = spec.params.size() > 0 ? spec.params[0] : 0.0;
      const double s = spec.params.size() > 1 ? spec.params[1] : 1.0;
      if (!(s >= 0) || !std::isfinite(mu)) throw ParameterError("log-normal spectrum: need s >= 0");
      std::normal_distribution<double> nd(mu, s);
      for (Index i = 0; i < dim; ++i) lam(i) = std::exp(nd(rng));
      break;
    }
    case SpectrumSpec::Kind::LogSpaced: {
      if (spec.params.size() != 2) throw ParameterError("log-spaced spectrum: need {lo, hi}");
      const double lo = spec.params[0], hi = spec.params[1];
      if (!(lo > 0 && hi >= lo)) throw ParameterError("log-spaced spectrum: need 0 < lo <= hi");
      if (dim == 1) {
        lam(0) = hi;
      } else {
        for (Index i = 0; i < dim; ++i)
          lam(i) = std::exp(std::log(hi) + (std::log(lo) - std::log(hi)) * double(i) / double(dim - 1));
        lam(0) = hi;
        lam(dim - 1) = lo;
      }
      break;
    }
    case SpectrumSpec::Kind::Explicit: {
      if (Index(spec.params.size()) != dim) throw ParameterError("explicit spectrum: length != dim");
      for (Index i = 0; i < dim; ++i) {
        if (!(spec.params[i] >= 0)) throw ParameterError("explicit spectrum: negative value");
        lam(i) = spec.params[i];
      }
      break;
    }
  }
  std::sort(lam.begin(), lam.end(), std::greater<>());
  if (spec.normalize_mean_to_one) {
    const double m = lam.mean();
    if (!(m > 0)) throw ParameterError("cannot normalize a zero spectrum");
    lam /= m;
  }
  return lam;
}

CovarianceModeld make_covariance(const SpectrumSpec& spec, Index dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  CovarianceModeld m;
  m.spectrum = make_spectrum(spec, dim, rng);
  m.basis = random_orthogonal(dim, rng);
  return m;
}

CovarianceModeld model_from_covariance(const MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols()) throw SizeError("model_from_covariance: matrix not square");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (sigma + sigma.transpose()));
  const Index d = sigma.rows();
  CovarianceModeld m;
  m.spectrum = es.eigenvalues().reverse();
  m.basis = es.eigenvectors().rowwise().reverse();
  for (Index i = 0; i < d; ++i) m.spectrum(i) = std::max(m.spectrum(i), 0.0);
  fix_eigvec_signs(m.basis);
  return m;
}

MatrixXd sample_gaussian(const CovarianceModeld& model, const VectorXd& mean, Index n, std::mt19937_64& rng) {
  const Index d = model.dim();
  if (mean.size() != d) throw SizeError("sample_gaussian: mean length != dim");
  if (n < 1) throw ParameterError("sample_gaussian: n must be >= 1");
  std::normal_distribution<double> nd;
  MatrixXd z = MatrixXd::NullaryExpr(n, d, [&]() { return nd(rng); });
  const VectorXd sd = model.spectrum.cwiseMax(0.0).cwiseSqrt();
  MatrixXd x = z * sd.asDiagonal() * model.basis.transpose();
  x.rowwise() += mean.transpose();
  return x;
}

MatrixXd sample_gaussian(const CovarianceModeld& model, const VectorXd& mean, Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_gaussian(model, mean, n, rng);
}

DataMomentsd empirical_moments(const MatrixXd& samples) {
  const Index n = samples.rows();
  if (n < 2) throw InsufficientDataError("empirical_moments: need at least 2 samples");
  DataMomentsd m;
  m.mean = samples.colwise().mean().transpose();
  const MatrixXd c = samples.rowwise() - m.mean.transpose();
  m.covariance = (c.transpose() * c) / double(n - 1);
  m.covariance = 0.5 * (m.covariance + m.covariance.transpose()).eval();
  return m;
}

}  // namespace lindyn
