#include "lindyn/conv.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>

namespace lindyn {

namespace {
Index wrap(Index i, Index N) { return ((i % N) + N) % N; }
}  // namespace

CirculantDenoiser::CirculantDenoiser(Index N, VectorXd w, double sigma)
    : signal_len(N), half_width((w.size() - 1) / 2), taps(std::move(w)), noise_scale(sigma) {
  if (taps.size() % 2 == 0) throw ParameterError("CirculantDenoiser: filter width must be odd");
  if (taps.size() > N) throw ParameterError("CirculantDenoiser: filter width exceeds signal length");
}

MatrixXd CirculantDenoiser::matrix() const {
  const Index N = signal_len, r = half_width;
  MatrixXd W = MatrixXd::Zero(N, N);
  for (Index i = 0; i < N; ++i)
    for (Index o = -r; o <= r; ++o) W(i, wrap(i + o, N)) += taps(o + r);
  return W;
}

MatrixXd circulant_from_kernel(const VectorXd& c) {
  const Index N = c.size();
  MatrixXd C(N, N);
  for (Index i = 0; i < N; ++i)
    for (Index j = 0; j < N; ++j) C(i, j) = c(wrap(j - i, N));
  return C;
}

VectorXd dft_mode_variance(const MatrixXd& sigma) {
  const Index N = sigma.rows();
  if (sigma.cols() != N) throw ValidationError("dft_mode_variance: matrix not square");
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw ValidationError("dft_mode_variance: matrix not symmetric");
  Eigen::FFT<double> fft;
  // A(m, j) = sum_n Sigma_mn e^{-2 pi i j n / N}; result_j = (1/N) sum_m e^{+2 pi i j m / N} A(m, j).
  MatrixXcd A(N, N);
  std::vector<double> row(N);
  std::vector<std::complex<double>> spec;
  for (Index m = 0; m < N; ++m) {
    for (Index n = 0; n < N; ++n) row[n] = sigma(m, n);
    fft.fwd(spec, row);
    for (Index j = 0; j < N; ++j) A(m, j) = spec[j];
  }
  std::vector<std::complex<double>> col(N), back;
  VectorXd out(N);
  double imag_max = 0.0;
  for (Index j = 0; j < N; ++j) {
    // inverse FFT along m gives (1/N) sum_m A(m, j) e^{+2 pi i m l / N}; take l = j.
    for (Index m = 0; m < N; ++m) col[m] = A(m, j);
    fft.inv(back, col);
    out(j) = back[j].real();
    imag_max = std::max(imag_max, std::abs(back[j].imag()));
  }
  if (imag_max > 1e-10 * scale) throw ValidationError("dft_mode_variance: imaginary residue too large");
  return out;
}

FourierModeSet filter_to_gammas(const CirculantDenoiser& cd) {
  const Index N = cd.signal_len, r = cd.half_width;
  std::vector<double> a(N, 0.0);
  for (Index o = -r; o <= r; ++o) a[wrap(o, N)] += cd.taps(o + r);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> g;
  fft.fwd(g, a);
  FourierModeSet fs;
  fs.gammas = Eigen::Map<VectorXcd>(g.data(), N);
  return fs;
}

VectorXd gammas_to_filter(const VectorXcd& gammas) {
  const Index N = gammas.size();
  if (N % 2 == 0) throw ParameterError("gammas_to_filter: full-width filter needs odd N");
  std::vector<std::complex<double>> g(gammas.data(), gammas.data() + N);
  std::vector<std::complex<double>> a;
  Eigen::FFT<double> fft;
  fft.inv(a, g);
  const Index r = (N - 1) / 2;
  VectorXd w(N);
  for (Index o = -r; o <= r; ++o) w(o + r) = a[wrap(o, N)].real();
  return w;
}

PatchCovariance patch_covariance(const MatrixXd& sigma, Index r) {
  const Index N = sigma.rows(), K = 2 * r + 1;
  if (r < 0 || K > N) throw ParameterError("patch_covariance: need 2r + 1 <= N");
  PatchCovariance pc{K, MatrixXd(K, K)};
  for (Index a = -r; a <= r; ++a)
    for (Index b = -r; b <= r; ++b) {
      double s = 0.0;
      for (Index i = 0; i < N; ++i) s += sigma(wrap(i + a, N), wrap(i + b, N));
      pc.matrix(a + r, b + r) = s / double(N);
    }
  pc.matrix = 0.5 * (pc.matrix + pc.matrix.transpose()).eval();
  return pc;
}

PatchTrajectory patch_filter_trajectory(const PatchCovariance& pc, double sigma, double eta, Index N,
                                        const VectorXd& w0, const std::vector<double>& tau) {
  const Index K = pc.size;
  if (K % 2 == 0) throw ParameterError("patch_filter_trajectory: K must be odd");
  if (w0.size() != K) throw SizeError("patch_filter_trajectory: w0 length != K");
  const MatrixXd A = pc.matrix + sigma * sigma * MatrixXd::Identity(K, K);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(A);
  const MatrixXd& V = es.eigenvectors();
  const VectorXd& kap = es.eigenvalues();
  PatchTrajectory tr;
  const VectorXd rhs = pc.matrix.col((K - 1) / 2);
  tr.w_star = V * (V.transpose() * rhs).cwiseQuotient(kap);
  const VectorXd c0 = V.transpose() * (w0 - tr.w_star);
  for (double t : tau) {
    const VectorXd decay = (-2.0 * double(N) * eta * t * kap.array()).exp();
    tr.tau.push_back(t);
    tr.w.push_back(tr.w_star + V * c0.cwiseProduct(decay));
  }
  return tr;
}

MatrixXd shift_matrix(Index N, Index k) {
  MatrixXd S = MatrixXd::Zero(N, N);
  for (Index i = 0; i < N; ++i)
    if (i + k >= 0 && i + k < N) S(i, i + k) = 1.0;
  return S;
}

VectorXd shift_toeplitz_fixed_point(const MatrixXd& sigma_mat, double sigma, Index r) {
  const Index N = sigma_mat.rows(), K = 2 * r + 1;
  if (K > N) throw ParameterError("shift_toeplitz_fixed_point: need 2r + 1 <= N");
  const MatrixXd A = sigma_mat + sigma * sigma * MatrixXd::Identity(N, N);
  MatrixXd T(K, K);
  VectorXd R(K);
  std::vector<MatrixXd> S;
  for (Index k = -r; k <= r; ++k) S.push_back(shift_matrix(N, k));
  for (Index k = 0; k < K; ++k) {
    R(k) = (S[k].transpose() * sigma_mat).trace();
    for (Index m = 0; m < K; ++m) T(k, m) = (S[k].transpose() * S[m] * A).trace();
  }
  return T.ldlt().solve(R);
}

Eigen::VectorXi fourier_multiplicity(Index N) {
  Eigen::VectorXi m(N / 2 + 1);
  for (Index k = 0; k <= N / 2; ++k) m(k) = (k == 0 || (N % 2 == 0 && k == N / 2)) ? 1 : 2;
  return m;
}

Eigen::VectorXi fourier_index(Index N) {
  Eigen::VectorXi idx(N);
  Index c = 0;
  idx(c++) = 0;
  for (Index k = 1; 2 * k < N; ++k) {
    idx(c++) = int(k);
    idx(c++) = int(k);
  }
  if (N % 2 == 0) idx(c++) = int(N / 2);
  return idx;
}

MatrixXd real_fourier_basis(Index N) {
  MatrixXd B(N, N);
  Index c = 0;
  B.col(c++).setConstant(1.0 / std::sqrt(double(N)));
  for (Index k = 1; 2 * k < N; ++k) {
    for (Index n = 0; n < N; ++n) {
      const double ph = 2.0 * std::numbers::pi * double(k * n) / double(N);
      B(n, c) = std::sqrt(2.0 / N) * std::cos(ph);
      B(n, c + 1) = std::sqrt(2.0 / N) * std::sin(ph);
    }
    c += 2;
  }
  if (N % 2 == 0)
    for (Index n = 0; n < N; ++n) B(n, c) = (n % 2 == 0 ? 1.0 : -1.0) / std::sqrt(double(N));
  return B;
}

}  // namespace lindyn
