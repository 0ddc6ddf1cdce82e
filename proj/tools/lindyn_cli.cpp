#include "lindyn/experiment.hpp"
#include "lindyn/flow_matching.hpp"
#include "lindyn/io.hpp"
#include "lindyn/metrics.hpp"
#include "lindyn/validation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace lindyn;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  std::string data;
  int workers = 0;
  std::vector<std::string> set;
};

ExperimentConfig load(const Globals& g) {
  ExperimentConfig c;
  if (!g.config.empty()) apply_config(c, io::read_config_file(g.config));
  std::map<std::string, std::string> over;
  for (const auto& kv : g.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
    over[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  apply_config(c, over);
  if (g.seed) c.seed = *g.seed;
  if (!g.out.empty()) c.out_dir = g.out;
  if (!g.format.empty()) c.format = g.format;
  if (!g.data.empty()) c.data_path = g.data;
  if (g.workers > 0) c.workers = g.workers;
  return c;
}

std::string out_file(const ExperimentConfig& c, const std::string& stem) {
  fs::create_directories(c.out_dir);
  return (fs::path(c.out_dir) / (stem + (c.format == "json" ? ".json" : ".csv"))).string();
}

int cmd_simulate(const ExperimentConfig& c) {
  const RunManifest m = run_experiment(c);
  for (const auto& f : m.files) std::cout << (fs::path(c.out_dir) / f).string() << "\n";
  if (m.oracle_checked) {
    std::cout << "oracle max relative deviation " << io::fmt(m.oracle.max_rel) << "\n";
    if (!m.oracle_ok) {
      std::cerr << "oracle mismatch beyond 1e-6: " << m.oracle.worst << "\n";
      return 1;
    }
  }
  return 0;
}

int cmd_sample(ExperimentConfig c, const std::vector<double>& taus, Index n_samples) {
  c.validate();
  const CovarianceModeld model = experiment_model(c);
  const Index d = model.dim();
  io::Table t{{"mode_index", "lambda_target", "tau", "lambda_gen", "lambda_gen_tau0", "lambda_gen_inf"}, {}};
  std::vector<std::vector<std::vector<std::string>>> rows(static_cast<std::size_t>(d));
  std::vector<VectorXd> gen(taus.size(), VectorXd(d));
  parallel_for(d, c.workers, [&](Index k) {
    const double lam = model.spectrum(k);
    const double v0 = mode_generated_variance(c, lam, 0.0);
    const double vi = c.variant == LossVariant::Tag::FlowMatch ? lam : generated_variance(PhiFactor::converged(lam), c.schedule);
    for (std::size_t i = 0; i < taus.size(); ++i) {
      const double v = mode_generated_variance(c, lam, taus[i]);
      gen[i](k) = v;
      rows[std::size_t(k)].push_back({std::to_string(k), io::fmt(lam), io::fmt(taus[i]), io::fmt(v), io::fmt(v0), io::fmt(vi)});
    }
  });
  for (auto& r : rows)
    for (auto& x : r) t.rows.push_back(std::move(x));
  const std::string p = out_file(c, "generated");
  t.write(p, c.format);
  std::cout << p << "\n";
  if (n_samples > 0) {
    for (std::size_t i = 0; i < taus.size(); ++i) {
      GeneratedDistribution g{GeneratedDistribution::Basis::Eigen, gen[i], VectorXd::Zero(d)};
      const MatrixXd X = sample_generated(g, model.basis, n_samples, c.seed + i);
      const std::string sp = (fs::path(c.out_dir) / ("samples_tau" + std::to_string(i) + ".csv")).string();
      io::write_matrix_csv(sp, X);
      std::cout << sp << "\n";
    }
  }
  return 0;
}

int cmd_emergence(const ExperimentConfig& c) {
  c.validate();
  const CovarianceModeld model = experiment_model(c);
  const auto grid = c.tau_grid();
  std::vector<ModeSeries> series(std::size_t(model.dim()));
  parallel_for(model.dim(), c.workers, [&](Index k) { series[std::size_t(k)] = mode_series(c, model.spectrum(k), grid); });
  const EmergenceReport rep = emergence_report(c, model, series);
  io::Table t{{"mode_index", "lambda_target", "tau_star", "branch", "excluded_flag"}, {}};
  for (const auto& r : rep.rows)
    t.rows.push_back({std::to_string(r.mode), io::fmt(r.lambda), io::fmt(r.tau_star), r.branch, r.excluded ? "1" : "0"});
  const std::string p = out_file(c, "emergence");
  t.write(p, c.format);
  std::cout << p << "\n";
  auto show = [](const char* n, const std::optional<PowerLawFit>& f) {
    if (f) std::cout << n << ": alpha " << io::fmt(f->alpha) << " R2 " << io::fmt(f->r_squared) << " n " << f->n_used << "\n";
  };
  show("increasing", rep.fit.increasing);
  show("decreasing", rep.fit.decreasing);
  show("pooled", rep.fit.pooled);
  if (!rep.fit_error.empty()) std::cout << rep.fit_error << "\n";
  return 0;
}

int cmd_validate(const std::string& suite) {
  const auto results = validation::run_suite(suite);
  bool ok = true;
  for (const auto& r : results) {
    std::cout << (r.pass() ? "PASS" : "FAIL") << "  [" << r.id << "] " << r.key << "  (" << io::fmt(r.seconds).substr(0, 6) << " s)\n";
    for (const auto& ch : r.checks)
      std::cout << "      " << (ch.pass ? "ok  " : "FAIL") << "  " << ch.name << " = " << io::fmt(ch.value) << "  " << ch.bound << "\n";
    if (!r.error.empty()) std::cout << "      error: " << r.error << "\n";
    ok = ok && r.pass();
  }
  return ok ? 0 : 1;
}

int cmd_kl(ExperimentConfig c, const std::vector<double>& taus) {
  c.validate();
  const CovarianceModeld model = experiment_model(c);
  const Index d = model.dim();
  const VectorXd z = VectorXd::Zero(d);
  io::Table t{{"tau", "mode_index", "lambda_target", "lambda_gen", "kl_mode", "kl_total"}, {}};
  for (double tau : taus) {
    VectorXd gen(d);
    parallel_for(d, c.workers, [&](Index k) { gen(k) = mode_generated_variance(c, model.spectrum(k), tau); });
    if (!gen.allFinite()) throw ValidationError("kl: loss.variant " + std::string(to_string(c.variant)) + " has no sampler");
    const ModeKL kl = kl_shared_basis(gen, model.spectrum, z, z, model.basis);
    for (Index k = 0; k < d; ++k)
      t.rows.push_back({io::fmt(tau), std::to_string(k), io::fmt(model.spectrum(k)), io::fmt(gen(k)),
                        io::fmt(kl.per_mode(k)), io::fmt(kl.total)});
    std::cout << "tau " << io::fmt(tau) << " total KL " << io::fmt(kl.total) << "\n";
  }
  const std::string p = out_file(c, "kl");
  t.write(p, c.format);
  std::cout << p << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning dynamics of linear denoisers: closed forms, oracles and samplers."};
  app.set_help_all_flag("--help-all");
  Globals g;
  app.add_option("--config", g.config, "flat key = value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "RNG seed");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--data", g.data, "samples (CSV or binary float64 with JSON header)");
  app.add_option("--workers", g.workers, "worker threads (0: auto)");
  app.add_option("--set", g.set, "override a config key, key=value (repeatable)");
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "weight trajectories, generated variances, emergence and fits");
  bool with_oracle = false;
  std::string arch;
  sim->add_flag("--validate-with-oracle", with_oracle, "cross-check against full-matrix gradient flow");
  sim->add_option("--arch", arch, "one-layer | two-layer | residual | deep");

  auto* smp = app.add_subcommand("sample", "generated distribution at given training times");
  std::vector<double> taus{0.0, 1.0, 1e6};
  Index n_samples = 0;
  smp->add_option("--arch", arch, "one-layer | two-layer | residual | deep");
  smp->add_option("--tau", taus, "training times")->delimiter(',');
  smp->add_option("--samples", n_samples, "draw this many samples per tau");

  auto* emg = app.add_subcommand("emergence", "emergence times and power-law fits");
  emg->add_option("--arch", arch, "one-layer | two-layer | residual | deep");

  auto* val = app.add_subcommand("validate", "oracle cross-checks; exits 1 on failure");
  std::string suite = "all";
  val->add_option("--suite", suite, "all, a suite name or a criterion number");

  auto* klc = app.add_subcommand("kl", "per-mode KL between generated and data distributions");
  std::vector<double> kl_taus{0.0, 1.0, 1e6};
  klc->add_option("--arch", arch, "one-layer | two-layer | residual | deep");
  klc->add_option("--tau", kl_taus, "training times")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    if (rc != 0) std::cerr << app.help();
    return rc == 0 ? 0 : 2;
  }

  try {
    if (val->parsed()) return cmd_validate(suite);
    ExperimentConfig c = load(g);
    if (!arch.empty()) c.arch = arch;
    if (sim->parsed()) {
      if (with_oracle) c.validate_with_oracle = true;
      return cmd_simulate(c);
    }
    if (smp->parsed()) return cmd_sample(c, taus, n_samples);
    if (emg->parsed()) return cmd_emergence(c);
    if (klc->parsed()) return cmd_kl(c, kl_taus);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
