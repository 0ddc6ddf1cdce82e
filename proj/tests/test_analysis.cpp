#include "helpers.hpp"
#include "lindyn/analysis.hpp"

using namespace lindyn;

namespace {
const EmergenceCriterion kGeo{EmergenceCriterion::Kind::GeometricMean};
const EmergenceCriterion kHarm{EmergenceCriterion::Kind::HarmonicMean};
}

TEST_CASE("thresholds") {
  CHECK(kGeo.threshold(1.0, 4.0) == doctest::Approx(2.0));
  CHECK(kHarm.threshold(1.0, 4.0) == doctest::Approx(1.6));
  for (double a : {1e-3, 0.5, 7.0})
    for (double b : {2e-3, 0.6, 9.0})
      if (a != b)
        for (const auto& c : {kGeo, kHarm}) {
          const double t = c.threshold(a, b);
          CHECK(t > std::min(a, b));
          CHECK(t < std::max(a, b));
        }
}

TEST_CASE("emergence time: exact on a power law and scale invariant") {
  const auto g = log_grid(1e-3, 1e3, 61);
  VectorXd tau = Eigen::Map<const VectorXd>(g.data(), Index(g.size()));
  // v = tau on the grid: threshold sqrt(v0 v_inf) is hit where tau equals it
  const VectorXd v = tau;
  const auto t = emergence_time(tau, v, 1e-3, 1e3, kGeo);
  REQUIRE(t);
  CHECK(*t == doctest::Approx(1.0).epsilon(1e-12));
  for (double c : {1e-4, 3.0, 1e5}) {
    const auto s = emergence_time(tau, VectorXd(c * v), c * 1e-3, c * 1e3, kGeo);
    REQUIRE(s);
    CHECK(*s == *t);
  }
  // decreasing branch
  const auto d = emergence_time(tau, VectorXd(v.cwiseInverse()), 1e3, 1e-3, kHarm);
  REQUIRE(d);
  CHECK(*d > 0);
  // never crosses
  CHECK_FALSE(emergence_time(tau, VectorXd::Ones(tau.size()), 1.0, 2.0, kGeo));
}

TEST_CASE("power-law fit recovers the exponent") {
  const VectorXd lam = VectorXd::LinSpaced(12, -3, 1).array().exp();
  for (double a0 : {0.5, 1.0, 2.0}) {
    const VectorXd tau = lam.array().pow(-a0) * 3.0;
    const VectorXd v0 = VectorXd::Constant(12, 0.01), tg = VectorXd::Constant(12, 1.0);
    const auto fit = power_law_fit(lam, tau, GrayZone{}, v0, tg);
    REQUIRE(fit.increasing);
    CHECK(std::abs(fit.increasing->alpha - a0) < 1e-10);
    CHECK(fit.increasing->r_squared == doctest::Approx(1.0));
    CHECK(fit.increasing->n_used == 12);
    CHECK_FALSE(fit.decreasing);
  }
}

TEST_CASE("gray zone excludes modes whose target barely moves") {
  const VectorXd lam = VectorXd::LinSpaced(4, 0.1, 1.0);
  const VectorXd tau = lam.cwiseInverse();
  VectorXd v0(4), tg(4);
  v0 << 0.01, 0.9, 10.0, 0.01;
  tg << 1.0, 1.0, 1.0, 1.0;
  const auto fit = power_law_fit(lam, tau, GrayZone{}, v0, tg);
  CHECK(fit.excluded[1]);
  CHECK_FALSE(fit.excluded[0]);
  REQUIRE(fit.increasing);
  CHECK(fit.increasing->n_used == 2);
  CHECK_FALSE(fit.decreasing);
  CHECK_THROWS_AS((void)power_law_fit_branch(lam, tau, GrayZone{}, v0, tg, PowerLawFit::Branch::Decreasing),
                  InsufficientDataError);
}

TEST_CASE("gray zone validation") {
  CHECK_THROWS_AS((GrayZone{1.5, 2.0}.validate()), ValidationError);
  CHECK_THROWS_AS((GrayZone{0.5, 0.9}.validate()), ValidationError);
  CHECK_NOTHROW(GrayZone{}.validate());
}

TEST_CASE("alignment score invariances") {
  const auto m = lt::logspaced(5, 0.1, 3.0, 81);
  const MatrixXd S = m.covariance();
  CHECK(alignment_score(S, m.basis) == doctest::Approx(1.0));
  std::mt19937_64 rng(81);
  const MatrixXd S2 = S + 0.1 * lt::randn(5, 5, rng);
  const double base = alignment_score(S2, m.basis);
  MatrixXd U = m.basis;
  U.col(1) *= -1;
  U.col(0).swap(U.col(3));
  CHECK(alignment_score(S2, U) == doctest::Approx(base).epsilon(1e-14));
  CHECK(base < 1.0);
}
