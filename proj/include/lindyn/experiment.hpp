#pragma once

#include "lindyn/analysis.hpp"
#include "lindyn/closed_form.hpp"
#include "lindyn/pf_sampler.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>

namespace lindyn {

struct ExperimentConfig {
  SpectrumSpec spectrum{SpectrumSpec::Kind::LogSpaced, {1e-3, 10.0}, false};
  Index dim = 8;
  std::string data_path;  ///< overrides spectrum when set
  std::string arch = "one-layer";  ///< one-layer | two-layer | residual | deep
  int depth = 3;
  double c_skip = 0.0;
  double c_out = 1.0;
  LossVariant::Tag variant = LossVariant::Tag::EDM;
  NoiseSchedule schedule{0.002, 80.0, 7.0, 81};
  double eta = 1.0;
  double Q = 0.1;
  std::vector<double> sigmas{0.1, 1.0, 10.0};  ///< flow time t for flow_match
  double tau_min = 1e-4;
  double tau_max = 1e6;
  int tau_count = 201;
  EmergenceCriterion criterion;
  GrayZone gray_zone;
  std::string out_dir = "lindyn_out";
  std::string format = "csv";
  std::uint64_t seed = 0;
  bool validate_with_oracle = false;
  int workers = 0;  ///< 0: hardware concurrency, capped at 8

  void validate() const;
  [[nodiscard]] std::vector<double> tau_grid() const;
};

/// Applies dotted keys (model.*, dynamics.*, schedule.*, analysis.*, loss.variant, output.*, seed, ...).
/// Unknown keys and bad values throw ValidationError naming the key.
void apply_config(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv);
[[nodiscard]] std::map<std::string, std::string> config_echo(const ExperimentConfig& cfg);

[[nodiscard]] CovarianceModeld experiment_model(const ExperimentConfig& cfg);

/// Per-mode weight psi(tau) and generated variance for the configured architecture.
struct ModeSeries {
  double lambda = 0.0;
  std::vector<double> tau;  ///< tau_grid with 0 prepended
  std::vector<std::vector<double>> psi;  ///< [sigma index][tau index]
  std::vector<double> lambda_gen;  ///< NaN where the loss variant has no sampler
  double v0 = 0.0;  ///< tau -> 0 generated variance
  double v_inf = 0.0;  ///< tau -> infinity generated variance
};
[[nodiscard]] ModeSeries mode_series(const ExperimentConfig& cfg, double lam, const std::vector<double>& tau_grid);

/// Generated variance of one mode at a single training time.
[[nodiscard]] double mode_generated_variance(const ExperimentConfig& cfg, double lam, double tau);

struct EmergenceRow {
  Index mode;
  double lambda;
  double tau_star;  ///< NaN if never crossed
  std::string branch;
  bool excluded;
};
struct EmergenceReport {
  std::vector<EmergenceRow> rows;
  PowerLawResult fit;
  std::string fit_error;  ///< set when no branch had two usable points
};
[[nodiscard]] EmergenceReport emergence_report(const ExperimentConfig& cfg, const CovarianceModeld& model,
                                               const std::vector<ModeSeries>& series);

struct OracleDeviation {
  double max_rel = 0.0;
  std::string worst;  ///< where the worst deviation occurred
};
/// Full-matrix gradient flow against the closed-form mode weights over 20 log-spaced tau points.
[[nodiscard]] OracleDeviation oracle_deviation(const ExperimentConfig& cfg, const CovarianceModeld& model);

struct RunManifest {
  std::vector<std::string> files;
  bool oracle_checked = false;
  OracleDeviation oracle;
  bool oracle_ok = true;
};

/// Writes trajectories, emergence, fit.json and manifest.json into cfg.out_dir.
RunManifest run_experiment(const ExperimentConfig& cfg);

/// Runs fn(0..n-1) on a bounded pool; rethrows the first exception.
void parallel_for(Index n, int workers, const std::function<void(Index)>& fn);

[[nodiscard]] std::string software_version();

}  // namespace lindyn
