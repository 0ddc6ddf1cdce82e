#include "helpers.hpp"
#include "lindyn/closed_form.hpp"
#include "lindyn/pf_sampler.hpp"

using namespace lindyn;

namespace {
const NoiseSchedule kEdm{0.002, 80.0, 7.0, 81};
}

// reference: sigma_T^2 exp(2 int (psi - 1)/s ds) by 40-digit mpmath quadrature
TEST_CASE("generated variance frozen values, one layer") {
  struct R { double lam, Q, tau, v; };
  for (R r : {R{1, 0.1, 0.01, 2.6137593723472671e-5}, R{0.01, 0.1, 1, 1.5194652098225978e-5},
              R{5, 0, 0.3, 2.7351796470399897}, R{0.3, 0.5, 10, 0.29682200136778806}}) {
    CAPTURE(r.lam);
    CAPTURE(r.tau);
    CHECK(rel_diff(generated_variance(PhiFactor::one_layer(r.lam, r.Q, 1.0, r.tau), kEdm), r.v) < 1e-10);
  }
}

TEST_CASE("generated variance frozen values, two layer") {
  struct R { double lam, Q, tau, v; };
  for (R r : {R{1, 0.1, 0.01, 2.5403583375283154e-5}, R{0.01, 0.1, 10, 2.9270275119442231e-5},
              R{5, 0.2, 0.3, 4.9945307574369527}}) {
    CAPTURE(r.lam);
    CHECK(rel_diff(generated_variance(PhiFactor::two_layer(r.lam, r.Q, 1.0, r.tau), kEdm), r.v) < 1e-10);
  }
}

TEST_CASE("numeric Phi agrees with the closed forms") {
  for (double tau : {0.01, 1.0}) {
    const auto phi = PhiFactor::numeric([=](double s) { return one_layer_weight(tau, 0.5, s, 0.1, 1.0); });
    CHECK(rel_diff(generated_variance(phi, kEdm), generated_variance(PhiFactor::one_layer(0.5, 0.1, 1.0, tau), kEdm)) < 1e-7);
  }
}

TEST_CASE("schedule grid") {
  const auto s = kEdm.sigmas();
  CHECK(s.size() == 81);
  CHECK(s.front() == doctest::Approx(80.0).epsilon(1e-14));
  CHECK(s.back() == doctest::Approx(0.002).epsilon(1e-14));
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] < s[i - 1]);
  CHECK_THROWS_AS((NoiseSchedule{1.0, 0.5, 7.0, 10}.validate()), ParameterError);
}

TEST_CASE("limits in tau") {
  const double s0 = 0.002, sT = 80.0;
  for (double lam : {1e-3, 0.1, 10.0}) {
    const double inf_ref = sT * sT * (lam + s0 * s0) / (lam + sT * sT);
    CHECK(rel_diff(generated_variance(PhiFactor::one_layer(lam, 0.1, 1.0, 1e6), kEdm), inf_ref) < 1e-6);
    CHECK(rel_diff(generated_variance(PhiFactor::one_layer(lam, 0.1, 1.0, 0.0), kEdm),
                   sT * sT * std::pow(s0 / sT, 2 * 0.9)) < 1e-6);
  }
}

TEST_CASE("Phi is positive") {
  for (double s : {0.002, 0.1, 1.0, 80.0}) {
    CHECK(phi_one_layer(s, 0.5, 0.3, 0.1, 1.0) > 0);
    CHECK(phi_two_layer(s, 0.5, 0.3, 0.1, 1.0) > 0);
  }
}

TEST_CASE("aligned weights: full ODE factorizes into scalar modes") {
  const auto model = lt::logspaced(6, 0.01, 5.0, 51);
  const double tau = 0.3;
  auto modes = [&](double s) {
    VectorXd p(6);
    for (Index k = 0; k < 6; ++k) p(k) = one_layer_weight(tau, model.spectrum(k), s, 0.1, 1.0);
    return p;
  };
  const NoiseSchedule sch{0.002, 80.0, 7.0, 41};
  std::mt19937_64 rng(52);
  const VectorXd xT = lt::randn(6, 1, rng).col(0);
  const VectorXd dense = pf_ode_numeric_dense([&](double s) { return aligned_matrix(model, modes(s)); }, {}, sch, xT);
  const VectorXd per = pf_ode_numeric(modes, {}, sch, model.basis.transpose() * xT);
  CHECK((model.basis.transpose() * dense - per).cwiseAbs().maxCoeff() < 1e-8 * per.cwiseAbs().maxCoeff());
}

TEST_CASE("Heun error shrinks about four-fold per step doubling") {
  auto w = [](double s) { return VectorXd::Constant(1, one_layer_weight(1.0, 0.5, s, 0.1, 1.0)); };
  const double an = generated_variance(PhiFactor::one_layer(0.5, 0.1, 1.0, 1.0), kEdm);
  double prev = 0;
  for (int n : {161, 321, 641}) {
    const double x = pf_ode_numeric(w, {}, NoiseSchedule{0.002, 80.0, 7.0, n}, VectorXd::Ones(1))(0);
    const double e = rel_diff(6400 * x * x, an);
    if (prev > 0) CHECK(prev / e > 3.0);
    prev = e;
  }
}

TEST_CASE("quadrature") {
  const auto q = adaptive_simpson([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-12);
  CHECK(std::abs(q.value - (std::exp(1.0) - 1)) < 1e-11);
  // converged weights and a constant bias: transport of a unit offset
  const double m = mean_transport([](double) { return 0.0; }, PhiFactor::converged(1.0), kEdm);
  CHECK(m == 0.0);
}

TEST_CASE("sampling from the generated distribution") {
  const auto model = lt::logspaced(3, 0.1, 2.0, 53);
  GeneratedDistribution g{GeneratedDistribution::Basis::Eigen, model.spectrum, VectorXd::Zero(3)};
  const MatrixXd X = sample_generated(g, model.basis, 200000, 54);
  CHECK(X == sample_generated(g, model.basis, 200000, 54));
  CHECK((empirical_moments(X).covariance - model.covariance()).cwiseAbs().maxCoeff() < 0.03);
}
