#pragma once

#include "lindyn/types.hpp"

#include <optional>
#include <string>

namespace lindyn {

struct EmergenceCriterion {
  enum class Kind { GeometricMean, HarmonicMean };
  Kind kind = Kind::GeometricMean;
  [[nodiscard]] double threshold(double v0, double v_inf) const;
};

struct GrayZone {
  double lower = 0.5;
  double upper = 2.0;
  void validate() const;
};

struct PowerLawFit {
  enum class Branch { Increasing, Decreasing, Pooled };
  double alpha = 0.0;  ///< tau* ~ lambda^-alpha
  double intercept = 0.0;
  double r_squared = 0.0;
  int n_used = 0;
  Branch branch = Branch::Pooled;
};

[[nodiscard]] const char* to_string(PowerLawFit::Branch b);

/// First passage of the series through the criterion threshold, interpolated in (ln tau, ln v).
[[nodiscard]] std::optional<double> emergence_time(const VectorXd& tau, const VectorXd& v, double v0, double v_inf,
                                                   const EmergenceCriterion& crit);

struct PowerLawResult {
  std::optional<PowerLawFit> increasing;
  std::optional<PowerLawFit> decreasing;
  std::optional<PowerLawFit> pooled;
  std::vector<bool> excluded;  ///< gray zone or missing tau*
};

/// Least squares on (ln lambda, ln tau*) for one branch; throws InsufficientDataError naming it.
[[nodiscard]] PowerLawFit power_law_fit_branch(const VectorXd& lambdas, const VectorXd& taus, const GrayZone& gz,
                                               const VectorXd& v0s, const VectorXd& targets,
                                               PowerLawFit::Branch branch);

/// Fits every branch that keeps at least two points; throws if none does. NaN tau* entries are skipped.
[[nodiscard]] PowerLawResult power_law_fit(const VectorXd& lambdas, const VectorXd& taus, const GrayZone& gz,
                                           const VectorXd& v0s, const VectorXd& targets);

/// Sum of squared diagonal entries of U^T S U over the sum of all squared entries.
[[nodiscard]] double alignment_score(const MatrixXd& sigma_sample, const MatrixXd& U);

}  // namespace lindyn
