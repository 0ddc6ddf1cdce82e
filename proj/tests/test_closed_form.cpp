#include "helpers.hpp"
#include "lindyn/closed_form.hpp"
#include "lindyn/oracle.hpp"

using namespace lindyn;

namespace {

double worst_mode_dev(const CovarianceModeld& model, const std::vector<MatrixXd>& W,
                      const std::vector<ModeTrajectory>& modes) {
  double worst = 0;
  for (std::size_t i = 0; i < W.size(); ++i) {
    const MatrixXd M = model.basis.transpose() * W[i] * model.basis;
    for (Index k = 0; k < model.dim(); ++k)
      worst = std::max(worst, rel_diff(M(k, k), modes[std::size_t(k)].values(Index(i))));
  }
  return worst;
}

}  // namespace

TEST_CASE("scalar closed forms, frozen values") {
  // w* = 2 / 2.5 = 0.8, exponent 2 * 0.5 * 2.5
  CHECK(one_layer_weight(0.5, 2.0, std::sqrt(0.5), 0.1, 1.0) ==
        doctest::Approx(0.8 - 0.7 * std::exp(-2.5)).epsilon(1e-14));
  // w* Q / ((w* - Q) e^{-8 eta lambda tau} + Q), lambda = 1, sigma = 1
  CHECK(two_layer_weight(0.1, 1.0, 1.0, 0.01, 1.0) ==
        doctest::Approx(0.005 / (0.49 * std::exp(-0.8) + 0.01)).epsilon(1e-14));
  CHECK(discrete_gd_weight(3, 1.0, 1.0, 0.0, 0.1) == doctest::Approx(0.5 * (1 - 0.6 * 0.6 * 0.6)));
  CHECK(two_layer_weight(1.0, 1.0, 1.0, 0.5, 1.0) == 0.5);
  CHECK(two_layer_weight(1.0, 1.0, 1.0, 0.0, 1.0) == 0.0);
  CHECK_THROWS_AS((void)two_layer_weight(1.0, 1.0, 1.0, -0.1, 1.0), DomainError);
}

TEST_CASE("every architecture matches the gradient-flow oracle") {
  const auto model = lt::logspaced(16, 1e-3, 10.0, 31);
  const auto mom = lt::zero_mean(model);
  const auto grid = log_grid(1e-3, 1e2, 20);
  for (double s : {0.1, 1.0, 10.0}) {
    CAPTURE(s);
    DynamicsConfig c1{1.0, grid, VectorXd::Constant(16, 0.1), s, Architecture::one_layer()};
    auto fl = oracle::gradient_flow_full(mom, s, 1.0, {0.1 * MatrixXd::Identity(16, 16)}, VectorXd::Zero(16), grid,
                                         LossVariant::edm(), oracle::Parametrization::one_layer());
    CHECK(worst_mode_dev(model, fl.W, one_layer_trajectory(c1, model)) < 1e-6);

    DynamicsConfig c2{1.0, grid, VectorXd::Constant(16, 0.1), s, Architecture::two_layer()};
    fl = oracle::gradient_flow_full(mom, s, 1.0, {std::sqrt(0.1) * MatrixXd::Identity(16, 16)}, VectorXd::Zero(16),
                                    grid, LossVariant::edm(), oracle::Parametrization::two_layer());
    CHECK(worst_mode_dev(model, fl.W, two_layer_trajectory(c2, model)) < 1e-6);

    DynamicsConfig c3{1.0, grid, VectorXd::Constant(16, 0.2), s, Architecture::residual(0.5, 0.8)};
    fl = oracle::gradient_flow_full(mom, s, 1.0, {0.2 * MatrixXd::Identity(16, 16)}, VectorXd::Zero(16), grid,
                                    LossVariant::edm(), oracle::Parametrization::residual(0.5, 0.8));
    CHECK(worst_mode_dev(model, fl.W, residual_reparam_trajectory(c3, model)) < 1e-6);
  }
}

TEST_CASE("deep linear modes match the layered gradient flow") {
  const auto model = lt::logspaced(6, 1e-2, 5.0, 32);
  const auto grid = log_grid(1e-3, 1e2, 20);
  for (int L : {2, 3, 4}) {
    const double Q = 0.1, s = 1.0, h = 0.5;
    std::vector<MatrixXd> p0(std::size_t(L), std::pow(Q, 1.0 / L) * MatrixXd::Identity(6, 6));
    const auto fl = oracle::gradient_flow_full(lt::zero_mean(model), s, h, p0, VectorXd::Zero(6), grid,
                                               LossVariant::edm(), oracle::Parametrization::deep(L));
    for (Index k = 0; k < 6; ++k) {
      const auto r = deep_linear_mode(L, model.spectrum(k), s, Q, 2 * h, grid);
      CHECK_FALSE(r.stalled);
      for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(rel_diff(model.u(k).dot(fl.W[i] * model.u(k)), r.values(Index(i))) < 1e-6);
    }
  }
}

TEST_CASE("deep_linear_mode at L = 1 is the one-layer law with eta -> 2 eta") {
  const auto g = log_grid(1e-2, 10.0, 15);
  const auto r = deep_linear_mode(1, 0.7, 0.5, 0.2, 2.0, g);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(rel_diff(r.values(Index(i)), one_layer_weight(g[i], 0.7, 0.5, 0.2, 1.0)) < 1e-9);
  // stiff tail out to 1e6 reaches the fixed point without stalling
  const auto t = deep_linear_mode(3, 10.0, 0.1, 0.1, 2.0, log_grid(1e-4, 1e6, 41));
  CHECK_FALSE(t.stalled);
  CHECK(rel_diff(t.values(40), 10.0 / 10.01) < 1e-12);
}

TEST_CASE("ordering: larger lambda closes its relative gap faster") {
  const double s = 0.8;
  for (double tau : {1e-3, 0.1, 1.0, 5.0}) {
    double prev = 0;
    for (double lam : {0.01, 0.1, 1.0, 10.0}) {
      const double w = one_layer_target(lam, s);
      const double gap = std::abs(one_layer_weight(tau, lam, s, 0.0, 1.0) - w) / w;
      if (prev > 0) CHECK(gap < prev);
      prev = gap;
    }
  }
}

TEST_CASE("two-layer values stay between Q and the target") {
  for (double lam : {1e-3, 0.1, 10.0})
    for (double Q : {1e-4, 0.3, 2.0}) {
      const double w = one_layer_target(lam, 1.0);
      for (double tau : log_grid(1e-3, 1e5, 30)) {
        const double v = two_layer_weight(tau, lam, 1.0, Q, 1.0);
        CHECK(v >= std::min(Q, w) * (1 - 1e-14));
        CHECK(v <= std::max(Q, w) * (1 + 1e-14));
      }
    }
}

TEST_CASE("mean coupling at zero mean equals the decoupled solution") {
  const auto model = lt::logspaced(5, 0.01, 3.0, 33);
  const auto grid = log_grid(1e-2, 1e2, 12);
  DynamicsConfig cfg{1.0, grid, VectorXd::Constant(5, 0.1), 0.6, Architecture::one_layer()};
  const auto coupled = mean_coupled_trajectory(lt::zero_mean(model), cfg);
  const auto modes = one_layer_trajectory(cfg, model);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    VectorXd v(5);
    for (Index k = 0; k < 5; ++k) v(k) = modes[std::size_t(k)].values(Index(i));
    CHECK((coupled.W[i] - aligned_matrix(model, v)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(coupled.b[i].cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("mean coupling matrix is D + q q^T") {
  const auto model = lt::logspaced(4, 0.1, 2.0, 34);
  const VectorXd mu = VectorXd::LinSpaced(4, -1, 2);
  const auto c = mean_cov_coupling(model, mu, 0.5);
  CHECK((c.dynamics_matrix - c.dynamics_matrix.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const MatrixXd rebuilt = MatrixXd(c.diag.asDiagonal()) + c.q * c.q.transpose();
  CHECK((rebuilt - c.dynamics_matrix).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(c.q(4) == 1.0);
}

TEST_CASE("discrete GD flags divergence instead of throwing") {
  const auto model = lt::explicit_model({4.0, 0.1}, 35);
  DynamicsConfig cfg{0.3, {}, VectorXd::Zero(2), 1.0, Architecture::discrete(0.3)};
  const auto r = discrete_gd_trajectory(cfg, model, 20);
  // |1 - 0.6 * 5| = 2 diverges, |1 - 0.6 * 1.1| = 0.34 converges
  CHECK(r.diverged[0]);
  CHECK_FALSE(r.diverged[1]);
  const auto lm = oracle::loss_moments(lt::zero_mean(model), LossVariant::edm(), 1.0);
  const auto Ws = oracle::discrete_gd_full(lm, MatrixXd::Zero(2, 2), VectorXd::Zero(2), 0.3, 20);
  CHECK(rel_diff(model.u(1).dot(Ws.back() * model.u(1)), r.modes[1].values(r.modes[1].values.size() - 1)) < 1e-10);
}

TEST_CASE("two-layer overlaps: orthogonal init stays diagonal") {
  const auto model = lt::explicit_model({1.0, 0.1, 0.01}, 36);
  const MatrixXd q0 = 0.1 * MatrixXd::Identity(3, 3);
  const auto O = two_layer_overlap_simulation(model, 0.5, 1.0, q0, log_grid(1e-2, 1e3, 20));
  for (const auto& o : O) CHECK((o - MatrixXd(o.diagonal().asDiagonal())).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("two-layer overlaps: small tilt rises then decays") {
  const auto model = lt::explicit_model({1.0, 0.1}, 37);
  MatrixXd q0(2, 2);
  q0 << 0.01, 0.002, 0.001, 0.01;
  const auto grid = log_grid(1e-2, 1e3, 400);
  const auto O = two_layer_overlap_simulation(model, 0.5, 1.0, q0, grid);
  int maxima = 0;
  for (std::size_t i = 1; i + 1 < O.size(); ++i) {
    const double a = std::abs(O[i - 1](0, 1)), b = std::abs(O[i](0, 1)), c = std::abs(O[i + 1](0, 1));
    if (b > a && b > c) ++maxima;
  }
  CHECK(maxima == 1);
  CHECK(std::abs(O.back()(0, 1)) < 1e-3 * std::abs(O[0](0, 1)));
}

TEST_CASE("general two-layer f-g system conserves f^2 - g^2") {
  const auto r = two_layer_fg_mode(0.8, 0.5, 1.0, 0.3, 0.1, log_grid(1e-2, 1e2, 30));
  for (Index i = 0; i < r.f.size(); ++i) CHECK(std::abs(r.f(i) * r.f(i) - r.g(i) * r.g(i) - 0.08) < 1e-8);
  // product converges to the one-layer target
  CHECK(rel_diff(r.f(r.f.size() - 1) * r.g(r.g.size() - 1), one_layer_target(0.8, 0.5)) < 1e-8);
}

TEST_CASE("bias decays as exp(-2 eta tau)") {
  const VectorXd b0 = VectorXd::LinSpaced(3, 1, 3);
  CHECK((one_layer_bias(b0, 0.5, 2.0) - b0 * std::exp(-2.0)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("config validation") {
  DynamicsConfig c{-1.0, {0.0, 1.0}, VectorXd::Zero(2), 1.0, Architecture::one_layer()};
  CHECK_THROWS_AS(c.validate(2), ParameterError);
  c.eta = 1.0;
  c.tau_grid = {1.0, 0.5};
  CHECK_THROWS_AS(c.validate(2), ParameterError);
  c.tau_grid = {0.0, 1.0};
  c.arch = Architecture::two_layer();
  c.init_Q = VectorXd::Constant(2, -0.1);
  CHECK_THROWS_AS(c.validate(2), ParameterError);
}
