#include "helpers.hpp"
#include "lindyn/experiment.hpp"
#include "lindyn/io.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

using namespace lindyn;
namespace fs = std::filesystem;

namespace {

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string s;
  std::getline(in, s);
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small(const std::string& dir) {
  ExperimentConfig c;
  c.dim = 6;
  c.tau_count = 61;
  c.out_dir = (fs::temp_directory_path() / "lindyn_exp_test" / dir).string();
  return c;
}

}  // namespace

TEST_CASE("config keys apply and unknown keys are rejected") {
  ExperimentConfig c;
  apply_config(c, {{"model.dim", "5"}, {"dynamics.sigmas", "0.5,2"}, {"loss.variant", "v_pred"},
                   {"analysis.criterion", "harmonic"}, {"schedule.num_steps", "41"}, {"seed", "9"}});
  CHECK(c.dim == 5);
  CHECK(c.sigmas == std::vector<double>{0.5, 2.0});
  CHECK(c.variant == LossVariant::Tag::VPred);
  CHECK(c.criterion.kind == EmergenceCriterion::Kind::HarmonicMean);
  CHECK(c.schedule.num_steps == 41);
  CHECK(c.seed == 9);
  CHECK_THROWS_AS(apply_config(c, {{"dynamics.etaa", "1"}}), ValidationError);
  CHECK_THROWS_AS(apply_config(c, {{"loss.variant", "score"}}), ValidationError);
  ExperimentConfig bad;
  bad.gray_zone.lower = 1.5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = {};
  bad.arch = "wide";
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = {};
  bad.eta = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("config echo re-applies to the same config") {
  ExperimentConfig a;
  apply_config(a, {{"model.dim", "3"}, {"dynamics.Q", "0.25"}, {"output.format", "json"}});
  ExperimentConfig b;
  apply_config(b, config_echo(a));
  CHECK(config_echo(a) == config_echo(b));
}

TEST_CASE("tau grid") {
  ExperimentConfig c;
  const auto g = c.tau_grid();
  CHECK(g.size() == 201);
  CHECK(g.front() == 1e-4);
  CHECK(g.back() == 1e6);
}

TEST_CASE("output schema") {
  const ExperimentConfig c = small("schema");
  fs::remove_all(c.out_dir);
  const auto m = run_experiment(c);
  CHECK(m.files.size() == 4);
  CHECK(first_line(fs::path(c.out_dir) / "trajectories.csv") == "mode_index,lambda_target,tau,sigma,psi,lambda_gen");
  CHECK(first_line(fs::path(c.out_dir) / "emergence.csv") == "mode_index,lambda_target,tau_star,branch,excluded_flag");
  const auto fit = nlohmann::json::parse(slurp(fs::path(c.out_dir) / "fit.json"));
  CHECK(fit.contains("branches"));
  CHECK(fit["branches"]["increasing"]["n_used"].get<int>() >= 2);
  const auto man = nlohmann::json::parse(slurp(fs::path(c.out_dir) / "manifest.json"));
  CHECK(man["seed"] == 0);
  CHECK(man["software"]["version"] == software_version());
}

TEST_CASE("determinism across worker counts") {
  ExperimentConfig a = small("det_a"), b = small("det_b");
  a.workers = 1;
  b.workers = 4;
  a.arch = b.arch = "two-layer";
  run_experiment(a);
  run_experiment(b);
  for (const char* f : {"trajectories.csv", "emergence.csv", "fit.json"})
    CHECK(slurp(fs::path(a.out_dir) / f) == slurp(fs::path(b.out_dir) / f));
}

TEST_CASE("oracle validation inside the pipeline") {
  for (const char* arch : {"one-layer", "two-layer", "residual", "deep"}) {
    ExperimentConfig c = small(std::string("oracle_") + arch);
    c.arch = arch;
    c.c_skip = 0.2;
    c.c_out = 0.9;
    const auto dev = oracle_deviation(c, experiment_model(c));
    CAPTURE(arch);
    CHECK(dev.max_rel < 1e-6);
  }
}

TEST_CASE("generated variance: tau -> 0 and tau -> infinity ends") {
  ExperimentConfig c;
  const double lam = 0.3;
  const auto g = c.tau_grid();
  const ModeSeries s = mode_series(c, lam, g);
  CHECK(s.tau.front() == 0.0);
  CHECK(rel_diff(s.lambda_gen.front(), s.v0) < 1e-12);
  CHECK(rel_diff(s.lambda_gen.back(), s.v_inf) < 1e-6);
  CHECK(rel_diff(mode_generated_variance(c, lam, 1e6), s.v_inf) < 1e-6);
}

TEST_CASE("data ingestion replaces the synthetic spectrum") {
  const auto m = lt::logspaced(3, 0.1, 2.0, 111);
  const MatrixXd X = sample_gaussian(m, VectorXd::Zero(3), 5000, 112);
  const fs::path p = fs::temp_directory_path() / "lindyn_exp_test" / "data.bin";
  fs::create_directories(p.parent_path());
  io::write_matrix_binary(p.string(), X);
  ExperimentConfig c;
  c.data_path = p.string();
  const auto em = experiment_model(c);
  CHECK(em.dim() == 3);
  CHECK((em.spectrum - m.spectrum).cwiseAbs().maxCoeff() < 0.15);
}

TEST_CASE("parallel_for rethrows") {
  CHECK_THROWS_AS(parallel_for(10, 3, [](Index i) { if (i == 7) throw IntegrationError("x"); }), IntegrationError);
}
