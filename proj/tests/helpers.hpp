#pragma once

#include "lindyn/gaussian_model.hpp"

#include <doctest.h>

namespace lt {

using namespace lindyn;

inline CovarianceModeld logspaced(Index n, double lo, double hi, std::uint64_t seed) {
  return make_covariance(SpectrumSpec{SpectrumSpec::Kind::LogSpaced, {lo, hi}, false}, n, seed);
}

inline CovarianceModeld explicit_model(const std::vector<double>& lam, std::uint64_t seed) {
  return make_covariance(SpectrumSpec{SpectrumSpec::Kind::Explicit, lam, false}, Index(lam.size()), seed);
}

inline DataMomentsd zero_mean(const CovarianceModeld& m) { return {VectorXd::Zero(m.dim()), m.covariance()}; }

inline MatrixXd randn(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  MatrixXd m(r, c);
  for (auto& x : m.reshaped()) x = nd(rng);
  return m;
}

}  // namespace lt
