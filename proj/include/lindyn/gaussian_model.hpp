#pragma once

#include "lindyn/types.hpp"

#include <cstdint>
#include <random>

namespace lindyn {

/// Sigma = U diag(lambda) U^T with orthonormal U and descending lambda.
template <typename Scalar>
struct CovarianceModel {
  Mat<Scalar> basis;
  Vec<Scalar> spectrum;

  [[nodiscard]] Index dim() const { return spectrum.size(); }
  [[nodiscard]] Mat<Scalar> covariance() const {
    return basis * spectrum.asDiagonal() * basis.transpose();
  }
  [[nodiscard]] auto u(Index k) const { return basis.col(k); }
};

template <typename Scalar>
struct DataMoments {
  Vec<Scalar> mean;
  Mat<Scalar> covariance;
};

using CovarianceModeld = CovarianceModel<double>;
using DataMomentsd = DataMoments<double>;

struct SpectrumSpec {
  enum class Kind { LogNormal, LogSpaced, Explicit };
  Kind kind = Kind::LogNormal;
  /// LogNormal: {mu, s} of the exponent; LogSpaced: {lo, hi}; Explicit: the values.
  std::vector<double> params;
  bool normalize_mean_to_one = false;
};

/// Flip each column so its largest-magnitude entry is positive.
template <typename Derived>
void fix_eigvec_signs(Eigen::MatrixBase<Derived>& U) {
  for (Index k = 0; k < U.cols(); ++k) {
    Index i;
    U.col(k).cwiseAbs().maxCoeff(&i);
    if (U(i, k) < 0) U.col(k) *= -1;
  }
}

/// Orthonormal matrix from the QR factor of an i.i.d. normal matrix.
[[nodiscard]] MatrixXd random_orthogonal(Index dim, std::mt19937_64& rng);

[[nodiscard]] VectorXd make_spectrum(const SpectrumSpec& spec, Index dim, std::mt19937_64& rng);

[[nodiscard]] CovarianceModeld make_covariance(const SpectrumSpec& spec, Index dim, std::uint64_t seed);

/// Eigendecomposition of a symmetric matrix into a CovarianceModel (descending, sign-fixed).
[[nodiscard]] CovarianceModeld model_from_covariance(const MatrixXd& sigma);

[[nodiscard]] MatrixXd sample_gaussian(const CovarianceModeld& model, const VectorXd& mean, Index n,
                                       std::mt19937_64& rng);
[[nodiscard]] MatrixXd sample_gaussian(const CovarianceModeld& model, const VectorXd& mean, Index n,
                                       std::uint64_t seed);

[[nodiscard]] DataMomentsd empirical_moments(const MatrixXd& samples);

/// lambda~_k = u_k^T Sigma_hat u_k.
template <typename Derived, typename Scalar>
[[nodiscard]] Vec<Scalar> project_variances(const Eigen::MatrixBase<Derived>& sigma_hat,
                                            const CovarianceModel<Scalar>& model) {
  if (sigma_hat.rows() != model.dim() || sigma_hat.cols() != model.dim())
    throw SizeError("project_variances: shape mismatch");
  return (model.basis.transpose() * sigma_hat * model.basis).diagonal();
}

}  // namespace lindyn
