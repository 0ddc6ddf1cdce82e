#include "helpers.hpp"
#include "lindyn/closed_form.hpp"
#include "lindyn/conv.hpp"
#include "lindyn/oracle.hpp"

#include <numbers>

using namespace lindyn;

namespace {

MatrixXd stationary(Index N) {
  VectorXd c(N);
  for (Index j = 0; j < N; ++j) {
    const double d = double(std::min(j, N - j));
    c(j) = std::exp(-d / 2.0) + (j == 0 ? 0.1 : 0.0);
  }
  return circulant_from_kernel(c);
}

}  // namespace

TEST_CASE("circulant matrices commute") {
  std::mt19937_64 rng(41);
  for (Index N : {9, 15}) {
    const MatrixXd A = CirculantDenoiser(N, lt::randn(N, 1, rng).col(0)).matrix();
    const MatrixXd B = CirculantDenoiser(N, lt::randn(3, 1, rng).col(0)).matrix();
    CHECK((A * B - B * A).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("circulant layout and validation") {
  VectorXd w(3);
  w << 1, 2, 3;  // offsets -1, 0, 1
  const MatrixXd W = CirculantDenoiser(6, w).matrix();
  CHECK(W(0, 0) == 2);
  CHECK(W(0, 1) == 3);
  CHECK(W(0, 5) == 1);
  CHECK(W(0, 3) == 0);
  CHECK(W(2, 3) == 3);
  CHECK_THROWS((void)CirculantDenoiser(6, VectorXd::Ones(4)));
  CHECK_THROWS((void)CirculantDenoiser(3, VectorXd::Ones(5)));
}

TEST_CASE("Fourier bookkeeping") {
  std::mt19937_64 rng(42);
  const Index N = 10;
  const auto g = filter_to_gammas(CirculantDenoiser(N, lt::randn(5, 1, rng).col(0))).gammas;
  for (Index k = 1; k < N; ++k) CHECK(std::abs(g(k) - std::conj(g(N - k))) < 1e-12);
  const MatrixXd S = stationary(N);
  const VectorXd mv = dft_mode_variance(S);
  CHECK((mv - oracle::dense_dft_diag(S)).cwiseAbs().maxCoeff() < 1e-12);
  for (Index k = 1; k < N; ++k) CHECK(std::abs(mv(k) - mv(N - k)) < 1e-12);
  CHECK(mv.minCoeff() >= 0);
  CHECK(fourier_multiplicity(N).sum() == N);
  CHECK(fourier_multiplicity(N)(0) == 1);
  CHECK(fourier_multiplicity(N)(5) == 1);
  const MatrixXd F = real_fourier_basis(N);
  CHECK((F.transpose() * F - MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff() < 1e-12);
  const VectorXd proj = (F.transpose() * S * F).diagonal();
  const auto idx = fourier_index(N);
  for (Index j = 0; j < N; ++j) CHECK(std::abs(proj(j) - mv(idx(j))) < 1e-12);
}

TEST_CASE("full-width filter round trip and fixed point") {
  std::mt19937_64 rng(43);
  const Index N = 9;
  const VectorXd w = lt::randn(N, 1, rng).col(0);
  const auto g = filter_to_gammas(CirculantDenoiser(N, w)).gammas;
  CHECK((gammas_to_filter(g) - w).cwiseAbs().maxCoeff() < 1e-12);

  const MatrixXd S = stationary(N);
  const VectorXd mv = dft_mode_variance(S);
  const double sigma = 0.6;
  const MatrixXd Wstar = (S + sigma * sigma * MatrixXd::Identity(N, N)).ldlt().solve(S);
  // a circulant optimum: read the filter off its first row, taps at offsets -r..r
  const Index r = (N - 1) / 2;
  VectorXd taps(N);
  for (Index j = 0; j < N; ++j) taps(j) = Wstar(0, (j - r + N) % N);
  const auto gs = filter_to_gammas(CirculantDenoiser(N, taps, sigma)).gammas;
  for (Index k = 0; k < N; ++k) CHECK(std::abs(gs(k) - mv(k) / (sigma * sigma + mv(k))) < 1e-8);
}

TEST_CASE("full-width law is the fully connected one with N eta") {
  for (double tau : {0.0, 1e-3, 0.2, 5.0})
    CHECK(full_width_gamma(0.7, 0.1, 0.5, 0.02, 16, tau) == one_layer_weight(tau, 0.7, 0.5, 0.1, 16 * 0.02));
}

TEST_CASE("patch covariance and fixed point") {
  const MatrixXd S = stationary(12);
  const auto pc = patch_covariance(S, 2);
  CHECK(pc.size == 5);
  CHECK((pc.matrix - pc.matrix.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(Eigen::SelfAdjointEigenSolver<MatrixXd>(pc.matrix).eigenvalues().minCoeff() > -1e-10);
  for (Index a = 0; a + 1 < 5; ++a)
    for (Index b = 0; b + 1 < 5; ++b) CHECK(std::abs(pc.matrix(a, b) - pc.matrix(a + 1, b + 1)) < 1e-14);
  const auto t = patch_filter_trajectory(pc, 0.5, 0.1, 12, VectorXd::Zero(5), {0.0, 1.0, 1e4});
  const MatrixXd A = pc.matrix + 0.25 * MatrixXd::Identity(5, 5);
  CHECK((t.w_star - A.ldlt().solve(pc.matrix.col(2))).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((A.ldlt().solve(pc.matrix)).col(2).isApprox(t.w_star, 1e-12));
  CHECK(t.w.front().isZero());
  CHECK((t.w.back() - t.w_star).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("patch trajectory matches the tap-space gradient flow") {
  const Index N = 16, r = 1;
  const MatrixXd S = stationary(N);
  const auto pc = patch_covariance(S, r);
  const auto grid = log_grid(1e-3, 1e2, 20);
  const double sigma = 0.5, eta = 0.05;
  const auto pt = patch_filter_trajectory(pc, sigma, eta, N, VectorXd::Zero(3), grid);
  const auto fl = oracle::gradient_flow_full({VectorXd::Zero(N), S}, sigma, eta, {MatrixXd::Zero(3, 1)},
                                             VectorXd::Zero(N), grid, LossVariant::edm(),
                                             oracle::Parametrization::circulant(r));
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK((fl.params[i][0].col(0) - pt.w[i]).cwiseAbs().maxCoeff() < 1e-6 * pt.w[i].cwiseAbs().maxCoeff());
}

TEST_CASE("shift matrices") {
  const MatrixXd S1 = shift_matrix(4, 1);
  CHECK(S1(0, 1) == 1);
  CHECK(S1(3, 0) == 0);
  CHECK(S1.sum() == 3);
  CHECK(shift_matrix(4, 0) == MatrixXd::Identity(4, 4));
}
