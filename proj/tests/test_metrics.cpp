#include "helpers.hpp"
#include "lindyn/closed_form.hpp"
#include "lindyn/metrics.hpp"
#include "lindyn/oracle.hpp"

using namespace lindyn;

TEST_CASE("KL per mode, frozen value") {
  // 0.5 (2 - 1 - ln 2) + 0.5 * 1^2 / 1
  const VectorXd l1 = VectorXd::Constant(1, 2.0), l2 = VectorXd::Constant(1, 1.0);
  const auto kl = kl_shared_basis(l1, l2, VectorXd::Constant(1, 1.0), VectorXd::Zero(1), MatrixXd::Identity(1, 1));
  CHECK(kl.total == doctest::Approx(0.5 * (1 - std::log(2.0)) + 0.5).epsilon(1e-14));
}

TEST_CASE("KL is minimised at equal variances") {
  double prev = 1e300;
  bool decreasing = true;
  for (int i = 0; i <= 40; ++i) {
    const double rho = std::pow(10.0, -1 + 2.0 * i / 40);
    const auto kl = kl_shared_basis(VectorXd::Constant(1, rho), VectorXd::Ones(1), VectorXd::Zero(1),
                                    VectorXd::Zero(1), MatrixXd::Identity(1, 1));
    CHECK(kl.total >= 0);
    if (i == 20) CHECK(kl.total == doctest::Approx(0.0).epsilon(1e-15));
    if (i <= 20) decreasing = decreasing && kl.total <= prev;
    else CHECK(kl.total > prev);
    prev = kl.total;
  }
  CHECK(decreasing);
}

TEST_CASE("mode-split KL equals dense KL and sums per mode") {
  const auto m = lt::logspaced(6, 0.01, 3.0, 71);
  std::mt19937_64 rng(71);
  const VectorXd a = m.spectrum.array() * 1.3, b = m.spectrum;
  const VectorXd mu1 = lt::randn(6, 1, rng).col(0), mu2 = lt::randn(6, 1, rng).col(0);
  const auto kl = kl_shared_basis(a, b, mu1, mu2, m.basis);
  CHECK(kl.total == doctest::Approx(kl.per_mode.sum()));
  const double dense = oracle::dense_gaussian_kl(mu1, m.basis * a.asDiagonal() * m.basis.transpose(), mu2,
                                                 m.basis * b.asDiagonal() * m.basis.transpose());
  CHECK(std::abs(dense - kl.total) < 1e-9);
}

TEST_CASE("variance floor is reported") {
  VectorXd a(2);
  a << 1e-20, 1.0;
  const auto kl = kl_shared_basis(a, VectorXd::Ones(2), VectorXd::Zero(2), VectorXd::Zero(2), MatrixXd::Identity(2, 2));
  CHECK(kl.clamped == 1);
  CHECK(std::isfinite(kl.total));
}

TEST_CASE("score error times sigma^4 is the denoiser error") {
  const auto m = lt::logspaced(5, 0.05, 4.0, 72);
  std::mt19937_64 rng(72);
  const MatrixXd W0 = lt::randn(5, 5, rng);
  const VectorXd b0 = lt::randn(5, 1, rng).col(0);
  const double s = 0.8, eta = 0.5;
  for (double tau : {0.0, 0.1, 1.0}) {
    VectorXd ws(5), dec(5);
    for (Index k = 0; k < 5; ++k) {
      ws(k) = one_layer_target(m.spectrum(k), s);
      dec(k) = std::exp(-2 * eta * tau * (s * s + m.spectrum(k)));
    }
    const MatrixXd Wst = aligned_matrix(m, ws);
    const MatrixXd W = Wst + (W0 - Wst) * aligned_matrix(m, dec);
    const double ed = denoiser_error(W, b0 * std::exp(-2 * eta * tau), s, m);
    CHECK(rel_diff(ed, std::pow(s, 4) * score_error(m.spectrum, mode_deltas(W0, s, m), b0.norm(), s, eta, tau)) < 1e-12);
  }
}

TEST_CASE("training loss = denoiser error + floor") {
  const auto m = lt::logspaced(4, 0.1, 2.0, 73);
  std::mt19937_64 rng(73);
  const MatrixXd W = lt::randn(4, 4, rng);
  const VectorXd b = lt::randn(4, 1, rng).col(0);
  CHECK(rel_diff(training_loss(W, b, 0.5, m), denoiser_error(W, b, 0.5, m) + loss_floor(0.5, m)) < 1e-12);
  const auto lm = oracle::loss_moments(lt::zero_mean(m), LossVariant::edm(), 0.5);
  CHECK(rel_diff(training_loss(W, b, 0.5, m), oracle::loss_value(lm, W, b)) < 1e-12);
}
