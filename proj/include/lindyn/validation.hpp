#pragma once

// Desk-scale cross-checks of the closed forms against the brute-force oracles.

#include <string>
#include <vector>

namespace lindyn::validation {

struct Check {
  std::string name;
  double value = 0.0;  ///< measured quantity (deviation, exponent, ...)
  std::string bound;  ///< human-readable acceptance bound
  bool pass = false;
};

struct CriterionResult {
  int id = 0;
  std::string key;
  std::string title;
  std::vector<Check> checks;
  double seconds = 0.0;
  std::string error;  ///< exception text if the run aborted

  [[nodiscard]] bool pass() const;
};

/// Suite keys in order: closed-form-oracle, mean-cov, two-layer, sampler, spectral-law, asymptotes,
/// conv, loss-variants, flow-matching, metrics, special-functions, determinism.
[[nodiscard]] const std::vector<std::string>& suite_keys();

[[nodiscard]] CriterionResult run_criterion(int id);

/// "all", a suite key, or a criterion number. Throws ValidationError for unknown names.
[[nodiscard]] std::vector<CriterionResult> run_suite(const std::string& name);

}  // namespace lindyn::validation
