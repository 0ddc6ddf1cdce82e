#pragma once

#include "lindyn/types.hpp"

namespace lindyn {

/// Filter of odd width K = 2r + 1 acting circularly on length-N signals.
/// taps(j) is the weight at offset j - r.
struct CirculantDenoiser {
  Index signal_len;
  Index half_width;
  VectorXd taps;
  double noise_scale = 1.0;

  CirculantDenoiser(Index N, VectorXd w, double sigma = 1.0);
  [[nodiscard]] Index width() const { return taps.size(); }
  /// W_ij = w_{(j - i) mod N}.
  [[nodiscard]] MatrixXd matrix() const;
};

struct FourierModeSet {
  VectorXcd gammas;
  VectorXd mode_vars;
};

struct PatchCovariance {
  Index size;
  MatrixXd matrix;
};

/// Circulant matrix with first-row kernel c (length N): C_ij = c[(j - i) mod N].
[[nodiscard]] MatrixXd circulant_from_kernel(const VectorXd& c);

/// diag(F* Sigma F) via FFTs of the rows of Sigma.
[[nodiscard]] VectorXd dft_mode_variance(const MatrixXd& sigma);

/// gamma_l = sum_k exp(-2 pi i k l / N) w_k over the nonzero taps.
[[nodiscard]] FourierModeSet filter_to_gammas(const CirculantDenoiser& cd);

/// Inverse of filter_to_gammas for a full-width (K = N) filter.
[[nodiscard]] VectorXd gammas_to_filter(const VectorXcd& gammas);

/// gamma(tau) = gamma* + (gamma0 - gamma*) exp(-2 N eta (sigma^2 + S) tau), gamma* = S / (sigma^2 + S).
template <typename Scalar>
[[nodiscard]] Scalar full_width_gamma(Scalar mode_var, Scalar gamma0, Scalar sigma, Scalar eta, Index N,
                                      Scalar tau) {
  using std::exp;
  const Scalar g = mode_var / (sigma * sigma + mode_var);
  return g + (gamma0 - g) * exp(-2 * Scalar(N) * eta * (sigma * sigma + mode_var) * tau);
}

/// (Sigma_patch)_ab = (1/N) sum_i Sigma_{i+a, i+b}, a, b in [-r, r], indices mod N.
[[nodiscard]] PatchCovariance patch_covariance(const MatrixXd& sigma, Index r);

struct PatchTrajectory {
  std::vector<double> tau;
  std::vector<VectorXd> w;
  VectorXd w_star;
};

/// w(tau) = w* + exp(-2 N eta tau (sigma^2 I + Sigma_patch)) (w0 - w*).
[[nodiscard]] PatchTrajectory patch_filter_trajectory(const PatchCovariance& pc, double sigma, double eta, Index N,
                                                      const VectorXd& w0, const std::vector<double>& tau);

/// Fixed point T^{-1} R of a banded Toeplitz (non-circular, shift-matrix) filter of half-width r,
/// T[k,m] = tr(S_k^T S_m (sigma^2 I + Sigma)), R[k] = tr(S_k^T Sigma).
[[nodiscard]] VectorXd shift_toeplitz_fixed_point(const MatrixXd& sigma_mat, double sigma, Index r);

/// Banded shift matrix with ones at (i, i + k), no wrap.
[[nodiscard]] MatrixXd shift_matrix(Index N, Index k);

/// Number of times each Fourier index k <= N/2 appears among the N modes (1 for DC/Nyquist, else 2).
[[nodiscard]] Eigen::VectorXi fourier_multiplicity(Index N);

/// Real orthonormal Fourier basis (columns: DC, cos/sin pairs, Nyquist) spanning the same
/// eigenspaces as the complex DFT; column j has the variance of Fourier index fourier_index(N)(j).
[[nodiscard]] MatrixXd real_fourier_basis(Index N);
[[nodiscard]] Eigen::VectorXi fourier_index(Index N);

}  // namespace lindyn
