#include "helpers.hpp"
#include "lindyn/oracle.hpp"

using namespace lindyn;
using Tag = LossVariant::Tag;

TEST_CASE("analytic gradients match finite differences at 20 random points") {
  const auto m = lt::logspaced(4, 0.05, 3.0, 91);
  std::mt19937_64 rng(91);
  const DataMomentsd mom{lt::randn(4, 1, rng).col(0), m.covariance()};
  for (Tag tag : {Tag::EDM, Tag::XPred, Tag::EpsPred, Tag::VPred, Tag::FlowMatch}) {
    const LossVariant v = LossVariant::make(tag);
    const double s = tag == Tag::EDM ? 0.9 : 0.4;
    const auto lm = oracle::loss_moments(mom, v, s);
    for (int i = 0; i < 20; ++i) {
      const MatrixXd W = lt::randn(4, 4, rng);
      const VectorXd b = lt::randn(4, 1, rng).col(0);
      const auto g = oracle::loss_gradient(lm, W, b);
      const auto f = oracle::fd_gradient(lm, W, b);
      CHECK((g.W - f.W).norm() / g.W.norm() < 1e-5);
      CHECK((g.b - f.b).norm() / std::max(g.b.norm(), 1e-8) < 1e-5);
    }
  }
}

TEST_CASE("loss moments agree with Monte Carlo for EDM") {
  const auto m = lt::logspaced(3, 0.1, 2.0, 92);
  const DataMomentsd mom{VectorXd::Constant(3, 0.5), m.covariance()};
  std::mt19937_64 rng(92);
  const MatrixXd W = 0.3 * lt::randn(3, 3, rng);
  const VectorXd b = VectorXd::Constant(3, 0.1);
  const auto lm = oracle::loss_moments(mom, LossVariant::edm(), 0.7);
  const auto mc = oracle::mc_dsm_loss(W, b, mom, 0.7, 400000, 93);
  CHECK(std::abs(mc.mean - oracle::loss_value(lm, W, b)) < 4 * mc.std_error);
}

TEST_CASE("energy descent along the gradient flow") {
  const auto m = lt::logspaced(5, 1e-2, 5.0, 94);
  std::mt19937_64 rng(94);
  const DataMomentsd mom{lt::randn(5, 1, rng).col(0), m.covariance()};
  const auto grid = log_grid(1e-3, 1e2, 40);
  struct P { oracle::Parametrization p; std::vector<MatrixXd> init; };
  const MatrixXd R = 0.2 * lt::randn(5, 5, rng);
  for (const P& c : {P{oracle::Parametrization::one_layer(), {R}}, P{oracle::Parametrization::two_layer(), {R}},
                     P{oracle::Parametrization::residual(0.3, 0.9), {R}},
                     P{oracle::Parametrization::deep(3), {MatrixXd::Identity(5, 5) + R, MatrixXd::Identity(5, 5), 0.5 * MatrixXd::Identity(5, 5)}}}) {
    const auto lm = oracle::loss_moments(mom, LossVariant::edm(), 0.8);
    const auto fl = oracle::gradient_flow_full(mom, 0.8, 0.5, c.init, VectorXd::Zero(5), grid, LossVariant::edm(), c.p);
    double prev = oracle::loss_value(lm, fl.W.front(), fl.b.front());
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double cur = oracle::loss_value(lm, fl.W[i], fl.b[i]);
      CHECK(cur <= prev + 1e-10);
      prev = cur;
    }
  }
}

TEST_CASE("effective weights of the parametrizations") {
  std::mt19937_64 rng(95);
  const MatrixXd A = lt::randn(3, 3, rng), B = lt::randn(3, 3, rng);
  CHECK(oracle::effective_weight(oracle::Parametrization::two_layer(), {A}, 3).isApprox(A * A.transpose()));
  CHECK(oracle::effective_weight(oracle::Parametrization::residual(0.5, 2.0), {A}, 3)
            .isApprox(0.5 * MatrixXd::Identity(3, 3) + 2.0 * A));
  CHECK(oracle::effective_weight(oracle::Parametrization::deep(2), {A, B}, 3).isApprox(B * A));
}

TEST_CASE("dense DFT matrix is unitary") {
  const MatrixXcd F = oracle::dft_matrix(7);
  CHECK((F.adjoint() * F - MatrixXcd::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("dense KL of identical Gaussians is zero") {
  const auto m = lt::logspaced(4, 0.1, 2.0, 96);
  CHECK(std::abs(oracle::dense_gaussian_kl(VectorXd::Zero(4), m.covariance(), VectorXd::Zero(4), m.covariance())) < 1e-13);
}
