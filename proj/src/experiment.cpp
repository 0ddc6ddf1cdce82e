#include "lindyn/experiment.hpp"

#include "lindyn/flow_matching.hpp"
#include "lindyn/io.hpp"
#include "lindyn/oracle.hpp"

#include <json.hpp>

#include <Eigen/Core>

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace lindyn {

namespace fs = std::filesystem;
using Tag = LossVariant::Tag;

std::string software_version() { return "0.1.0"; }

namespace {

const std::map<std::string, Tag>& variant_names() {
  static const std::map<std::string, Tag> m{{"edm", Tag::EDM},
                                            {"x_pred", Tag::XPred},
                                            {"eps_pred", Tag::EpsPred},
                                            {"v_pred", Tag::VPred},
                                            {"flow_match", Tag::FlowMatch}};
  return m;
}

std::string variant_key(Tag t) {
  for (const auto& [k, v] : variant_names())
    if (v == t) return k;
  return "?";
}

std::string list_str(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + io::fmt(v[i]);
  return s;
}

bool is_fm(const ExperimentConfig& cfg) { return cfg.variant == Tag::FlowMatch; }

}  // namespace

void ExperimentConfig::validate() const {
  if (data_path.empty()) {
    if (dim < 1) throw ValidationError("model.dim must be >= 1");
    if (spectrum.kind == SpectrumSpec::Kind::LogSpaced &&
        (spectrum.params.size() != 2 || !(spectrum.params[0] > 0) || !(spectrum.params[1] >= spectrum.params[0])))
      throw ValidationError("model.params: logspaced needs lo,hi with 0 < lo <= hi");
    if (spectrum.kind == SpectrumSpec::Kind::LogNormal && spectrum.params.size() != 2)
      throw ValidationError("model.params: lognormal needs mu,s");
    if (spectrum.kind == SpectrumSpec::Kind::Explicit && Index(spectrum.params.size()) != dim)
      throw ValidationError("model.params: explicit spectrum needs model.dim values");
  }
  if (arch != "one-layer" && arch != "two-layer" && arch != "residual" && arch != "deep")
    throw ValidationError("dynamics.arch must be one-layer, two-layer, residual or deep");
  if (arch == "deep" && depth < 1) throw ValidationError("dynamics.depth must be >= 1");
  if (variant != Tag::EDM && arch != "one-layer" && !(variant == Tag::FlowMatch && arch == "two-layer"))
    throw ValidationError("loss.variant: " + variant_key(variant) + " is only supported with dynamics.arch=one-layer");
  if (!(eta > 0) || !std::isfinite(eta)) throw ValidationError("dynamics.eta must be > 0");
  if (!std::isfinite(Q)) throw ValidationError("dynamics.Q must be finite");
  if ((arch == "two-layer" || arch == "deep") && !(Q > 0)) throw ValidationError("dynamics.Q must be > 0 for " + arch);
  if (sigmas.empty()) throw ValidationError("dynamics.sigmas must not be empty");
  for (double s : sigmas) {
    if (is_fm(*this) && !(s > 0 && s < 1)) throw ValidationError("dynamics.sigmas: flow times must lie in (0, 1)");
    if (!is_fm(*this) && !(s > 0)) throw ValidationError("dynamics.sigmas must be > 0");
  }
  if (!(tau_min > 0)) throw ValidationError("dynamics.tau_min must be > 0");
  if (!(tau_max > tau_min)) throw ValidationError("dynamics.tau_max must exceed dynamics.tau_min");
  if (tau_count < 2) throw ValidationError("dynamics.tau_count must be >= 2");
  try {
    schedule.validate();
  } catch (const Error& e) {
    throw ValidationError(std::string("schedule: ") + e.what());
  }
  gray_zone.validate();
  if (format != "csv" && format != "json") throw ValidationError("output.format must be csv or json");
  if (out_dir.empty()) throw ValidationError("output.dir must not be empty");
}

std::vector<double> ExperimentConfig::tau_grid() const { return log_grid(tau_min, tau_max, tau_count); }

void apply_config(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, val] : kv) {
    if (key == "model.kind") {
      if (val == "lognormal") cfg.spectrum.kind = SpectrumSpec::Kind::LogNormal;
      else if (val == "logspaced") cfg.spectrum.kind = SpectrumSpec::Kind::LogSpaced;
      else if (val == "explicit") cfg.spectrum.kind = SpectrumSpec::Kind::Explicit;
      else throw ValidationError("model.kind must be lognormal, logspaced or explicit");
    } else if (key == "model.params") {
      cfg.spectrum.params = io::parse_list(val, key);
    } else if (key == "model.dim") {
      cfg.dim = Index(io::parse_int(val, key));
    } else if (key == "model.normalize") {
      cfg.spectrum.normalize_mean_to_one = io::parse_bool(val, key);
    } else if (key == "model.data") {
      cfg.data_path = val;
    } else if (key == "dynamics.arch") {
      cfg.arch = val;
    } else if (key == "dynamics.eta") {
      cfg.eta = io::parse_double(val, key);
    } else if (key == "dynamics.Q") {
      cfg.Q = io::parse_double(val, key);
    } else if (key == "dynamics.sigmas") {
      cfg.sigmas = io::parse_list(val, key);
    } else if (key == "dynamics.tau_min") {
      cfg.tau_min = io::parse_double(val, key);
    } else if (key == "dynamics.tau_max") {
      cfg.tau_max = io::parse_double(val, key);
    } else if (key == "dynamics.tau_count") {
      cfg.tau_count = int(io::parse_int(val, key));
    } else if (key == "dynamics.depth") {
      cfg.depth = int(io::parse_int(val, key));
    } else if (key == "dynamics.c_skip") {
      cfg.c_skip = io::parse_double(val, key);
    } else if (key == "dynamics.c_out") {
      cfg.c_out = io::parse_double(val, key);
    } else if (key == "loss.variant") {
      const auto it = variant_names().find(val);
      if (it == variant_names().end())
        throw ValidationError("loss.variant must be edm, x_pred, eps_pred, v_pred or flow_match");
      cfg.variant = it->second;
    } else if (key == "schedule.sigma_min") {
      cfg.schedule.sigma_min = io::parse_double(val, key);
    } else if (key == "schedule.sigma_max") {
      cfg.schedule.sigma_max = io::parse_double(val, key);
    } else if (key == "schedule.rho") {
      cfg.schedule.rho = io::parse_double(val, key);
    } else if (key == "schedule.num_steps") {
      cfg.schedule.num_steps = int(io::parse_int(val, key));
    } else if (key == "analysis.criterion") {
      if (val == "geometric") cfg.criterion.kind = EmergenceCriterion::Kind::GeometricMean;
      else if (val == "harmonic") cfg.criterion.kind = EmergenceCriterion::Kind::HarmonicMean;
      else throw ValidationError("analysis.criterion must be geometric or harmonic");
    } else if (key == "analysis.gray_zone.lower") {
      cfg.gray_zone.lower = io::parse_double(val, key);
    } else if (key == "analysis.gray_zone.upper") {
      cfg.gray_zone.upper = io::parse_double(val, key);
    } else if (key == "output.dir") {
      cfg.out_dir = val;
    } else if (key == "output.format") {
      cfg.format = val;
    } else if (key == "seed") {
      const long long s = io::parse_int(val, key);
      if (s < 0) throw ValidationError("seed must be >= 0");
      cfg.seed = std::uint64_t(s);
    } else if (key == "validate_with_oracle") {
      cfg.validate_with_oracle = io::parse_bool(val, key);
    } else if (key == "workers") {
      cfg.workers = int(io::parse_int(val, key));
    } else {
      throw ValidationError("unknown config key: " + key);
    }
  }
}

std::map<std::string, std::string> config_echo(const ExperimentConfig& cfg) {
  const char* kinds[] = {"lognormal", "logspaced", "explicit"};
  std::map<std::string, std::string> m;
  m["model.kind"] = kinds[int(cfg.spectrum.kind)];
  m["model.params"] = list_str(cfg.spectrum.params);
  m["model.dim"] = std::to_string(cfg.dim);
  m["model.normalize"] = cfg.spectrum.normalize_mean_to_one ? "true" : "false";
  m["model.data"] = cfg.data_path;
  m["dynamics.arch"] = cfg.arch;
  m["dynamics.eta"] = io::fmt(cfg.eta);
  m["dynamics.Q"] = io::fmt(cfg.Q);
  m["dynamics.sigmas"] = list_str(cfg.sigmas);
  m["dynamics.tau_min"] = io::fmt(cfg.tau_min);
  m["dynamics.tau_max"] = io::fmt(cfg.tau_max);
  m["dynamics.tau_count"] = std::to_string(cfg.tau_count);
  m["dynamics.depth"] = std::to_string(cfg.depth);
  m["dynamics.c_skip"] = io::fmt(cfg.c_skip);
  m["dynamics.c_out"] = io::fmt(cfg.c_out);
  m["loss.variant"] = variant_key(cfg.variant);
  m["schedule.sigma_min"] = io::fmt(cfg.schedule.sigma_min);
  m["schedule.sigma_max"] = io::fmt(cfg.schedule.sigma_max);
  m["schedule.rho"] = io::fmt(cfg.schedule.rho);
  m["schedule.num_steps"] = std::to_string(cfg.schedule.num_steps);
  m["analysis.criterion"] = cfg.criterion.kind == EmergenceCriterion::Kind::GeometricMean ? "geometric" : "harmonic";
  m["analysis.gray_zone.lower"] = io::fmt(cfg.gray_zone.lower);
  m["analysis.gray_zone.upper"] = io::fmt(cfg.gray_zone.upper);
  m["output.dir"] = cfg.out_dir;
  m["output.format"] = cfg.format;
  m["seed"] = std::to_string(cfg.seed);
  m["validate_with_oracle"] = cfg.validate_with_oracle ? "true" : "false";
  return m;
}

CovarianceModeld experiment_model(const ExperimentConfig& cfg) {
  if (!cfg.data_path.empty()) {
    const MatrixXd X = io::read_matrix(cfg.data_path);
    return model_from_covariance(empirical_moments(X).covariance);
  }
  return make_covariance(cfg.spectrum, cfg.dim, cfg.seed);
}

void parallel_for(Index n, int workers, const std::function<void(Index)>& fn) {
  int w = workers > 0 ? workers : int(std::min(8u, std::max(1u, std::thread::hardware_concurrency())));
  w = int(std::min<Index>(w, n));
  if (w <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < w; ++t)
    pool.emplace_back([&] {
      for (Index i; (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lk(mu);
          if (!err) err = std::current_exception();
          next = n;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

namespace {

// psi(tau) of one mode at one noise level (or flow time).
double psi_closed(const ExperimentConfig& cfg, double lam, double s, double tau) {
  if (cfg.arch == "two-layer") {
    if (is_fm(cfg)) return fm_two_layer_weight(tau, s, lam, cfg.Q, cfg.eta).value;
    return two_layer_weight(tau, lam, s, cfg.Q, cfg.eta);
  }
  if (cfg.arch == "residual")
    return one_layer_weight(tau, lam, s, cfg.c_skip + cfg.c_out * cfg.Q, cfg.c_out * cfg.c_out * cfg.eta);
  if (cfg.variant == Tag::EDM) return one_layer_weight(tau, lam, s, cfg.Q, cfg.eta);
  const LossVariant v = LossVariant::make(cfg.variant);
  const double w = optimal_mode_weight(v, lam, s);
  return w + (cfg.Q - w) * std::exp(-2 * cfg.eta * tau * convergence_rate(v, lam, s));
}

double gen_variance_closed(const ExperimentConfig& cfg, double lam, double tau) {
  if (is_fm(cfg)) {
    if (cfg.arch != "one-layer") return std::nan("");
    return lam * fm_generated_variance_ratio(tau, lam, cfg.Q, cfg.eta);
  }
  if (cfg.variant != Tag::EDM) return std::nan("");
  if (cfg.arch == "two-layer") return generated_variance(PhiFactor::two_layer(lam, cfg.Q, cfg.eta, tau), cfg.schedule);
  if (cfg.arch == "residual")
    return generated_variance(
        PhiFactor::one_layer(lam, cfg.c_skip + cfg.c_out * cfg.Q, cfg.c_out * cfg.c_out * cfg.eta, tau), cfg.schedule);
  if (cfg.arch == "deep" && tau > 0) return std::nan("");
  // deep at tau = 0 starts from the same constant weight
  return generated_variance(PhiFactor::one_layer(lam, cfg.Q, cfg.eta, tau), cfg.schedule);
}

double gen_variance_inf(const ExperimentConfig& cfg, double lam) {
  if (is_fm(cfg)) return cfg.arch == "one-layer" ? lam : std::nan("");
  if (cfg.variant != Tag::EDM) return std::nan("");
  return generated_variance(PhiFactor::converged(lam), cfg.schedule);
}

// Deep network: closed-form psi does not exist, so the sampler runs on the schedule grid.
std::vector<double> deep_gen_variance(const ExperimentConfig& cfg, double lam, const std::vector<double>& tau) {
  const auto sig = cfg.schedule.sigmas();
  const double eta_ode = 2.0 * cfg.eta;
  std::vector<VectorXd> psi(sig.size());
  for (std::size_t i = 0; i < sig.size(); ++i) {
    const auto r = deep_linear_mode(cfg.depth, lam, sig[i], cfg.Q, eta_ode, tau);
    if (r.stalled) throw IntegrationError("deep_linear_mode stalled at sigma=" + io::fmt(sig[i]));
    psi[i] = r.values;
  }
  std::map<double, std::size_t> idx;
  for (std::size_t i = 0; i < sig.size(); ++i) idx[sig[i]] = i;
  std::vector<double> out(tau.size());
  for (std::size_t j = 0; j < tau.size(); ++j) {
    ModeFn w = [&](double s) {
      const auto it = idx.find(s);
      if (it == idx.end()) throw IntegrationError("deep sampler: sigma off the schedule grid");
      return VectorXd::Constant(1, psi[it->second](Index(j)));
    };
    const VectorXd x = pf_ode_numeric(w, {}, cfg.schedule, VectorXd::Ones(1));
    out[j] = cfg.schedule.sigma_max * cfg.schedule.sigma_max * x(0) * x(0);
  }
  return out;
}

}  // namespace

double mode_generated_variance(const ExperimentConfig& cfg, double lam, double tau) {
  if (cfg.arch == "deep" && tau > 0) return deep_gen_variance(cfg, lam, {tau}).front();
  return gen_variance_closed(cfg, lam, tau);
}

ModeSeries mode_series(const ExperimentConfig& cfg, double lam, const std::vector<double>& tau_grid) {
  ModeSeries r;
  r.lambda = lam;
  r.tau.push_back(0.0);
  r.tau.insert(r.tau.end(), tau_grid.begin(), tau_grid.end());
  for (double s : cfg.sigmas) {
    if (cfg.arch == "deep") {
      const auto d = deep_linear_mode(cfg.depth, lam, s, cfg.Q, 2.0 * cfg.eta, r.tau);
      if (d.stalled) throw IntegrationError("deep_linear_mode stalled at sigma=" + io::fmt(s));
      r.psi.emplace_back(d.values.data(), d.values.data() + d.values.size());
      continue;
    }
    std::vector<double> row;
    for (double t : r.tau) row.push_back(psi_closed(cfg, lam, s, t));
    r.psi.push_back(std::move(row));
  }
  if (cfg.arch == "deep") {
    r.lambda_gen = deep_gen_variance(cfg, lam, r.tau);
  } else {
    for (double t : r.tau) r.lambda_gen.push_back(gen_variance_closed(cfg, lam, t));
  }
  r.v0 = gen_variance_closed(cfg, lam, 0.0);
  r.v_inf = gen_variance_inf(cfg, lam);
  return r;
}

EmergenceReport emergence_report(const ExperimentConfig& cfg, const CovarianceModeld& model,
                                 const std::vector<ModeSeries>& series) {
  EmergenceReport rep;
  const Index d = model.dim();
  VectorXd lams(d), taus(d), v0s(d), vinf(d);
  for (Index k = 0; k < d; ++k) {
    const ModeSeries& ms = series[std::size_t(k)];
    const Index n = Index(ms.tau.size()) - 1;
    VectorXd t(n), v(n);
    for (Index i = 0; i < n; ++i) {
      t(i) = ms.tau[std::size_t(i + 1)];
      v(i) = ms.lambda_gen[std::size_t(i + 1)];
    }
    std::optional<double> ts;
    if (v.allFinite() && std::isfinite(ms.v0) && std::isfinite(ms.v_inf))
      ts = emergence_time(t, v, ms.v0, ms.v_inf, cfg.criterion);
    lams(k) = ms.lambda;
    taus(k) = ts ? *ts : std::nan("");
    v0s(k) = ms.v0;
    vinf(k) = ms.v_inf;
    rep.rows.push_back({k, ms.lambda, taus(k), ms.v_inf > ms.v0 ? "increasing" : "decreasing", false});
  }
  try {
    rep.fit = power_law_fit(lams, taus, cfg.gray_zone, v0s, vinf);
    for (Index k = 0; k < d; ++k) rep.rows[std::size_t(k)].excluded = rep.fit.excluded[std::size_t(k)];
  } catch (const InsufficientDataError& e) {
    rep.fit_error = e.what();
    for (auto& r : rep.rows) r.excluded = true;
  }
  return rep;
}

OracleDeviation oracle_deviation(const ExperimentConfig& cfg, const CovarianceModeld& model) {
  OracleDeviation out;
  const Index d = model.dim();
  DataMomentsd mom{VectorXd::Zero(d), model.covariance()};
  const std::vector<double> grid = log_grid(1e-3 / cfg.eta, 1e2 / cfg.eta, 20);
  const LossVariant v = LossVariant::make(cfg.variant);
  const MatrixXd& U = model.basis;
  oracle::Parametrization p;
  std::vector<MatrixXd> params0;
  if (cfg.arch == "one-layer") {
    params0 = {cfg.Q * MatrixXd::Identity(d, d)};
  } else if (cfg.arch == "two-layer") {
    p = oracle::Parametrization::two_layer();
    params0 = {std::sqrt(cfg.Q) * MatrixXd::Identity(d, d)};
  } else if (cfg.arch == "residual") {
    p = oracle::Parametrization::residual(cfg.c_skip, cfg.c_out);
    params0 = {cfg.Q * MatrixXd::Identity(d, d)};
  } else {
    p = oracle::Parametrization::deep(cfg.depth);
    for (int l = 0; l < cfg.depth; ++l) params0.push_back(std::pow(cfg.Q, 1.0 / cfg.depth) * MatrixXd::Identity(d, d));
  }
  std::mutex mu;
  parallel_for(Index(cfg.sigmas.size()), cfg.workers, [&](Index si) {
    const double s = cfg.sigmas[std::size_t(si)];
    const auto fl = oracle::gradient_flow_full(mom, s, cfg.eta, params0, VectorXd::Zero(d), grid, v, p);
    std::vector<VectorXd> closed(static_cast<std::size_t>(d));
    for (Index k = 0; k < d; ++k) {
      if (cfg.arch == "deep") {
        const auto r = deep_linear_mode(cfg.depth, model.spectrum(k), s, cfg.Q, 2.0 * cfg.eta, grid);
        closed[std::size_t(k)] = r.values;
      } else {
        VectorXd c(Index(grid.size()));
        for (std::size_t i = 0; i < grid.size(); ++i) c(Index(i)) = psi_closed(cfg, model.spectrum(k), s, grid[i]);
        closed[std::size_t(k)] = c;
      }
    }
    double worst = 0;
    std::string where;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const std::size_t fi = fl.tau.size() - grid.size() + i;
      const MatrixXd M = U.transpose() * fl.W[fi] * U;
      for (Index k = 0; k < d; ++k) {
        const double e = rel_diff(M(k, k), closed[std::size_t(k)](Index(i)));
        if (e > worst) {
          worst = e;
          std::ostringstream os;
          os << "sigma=" << io::fmt(s) << " tau=" << io::fmt(grid[i]) << " mode=" << k << " oracle=" << io::fmt(M(k, k))
             << " closed=" << io::fmt(closed[std::size_t(k)](Index(i)));
          where = os.str();
        }
      }
      // aligned dynamics stay diagonal in the eigenbasis
      const double off = (M - MatrixXd(M.diagonal().asDiagonal())).cwiseAbs().maxCoeff() /
                         std::max(1e-300, M.diagonal().cwiseAbs().maxCoeff());
      if (off > worst) {
        worst = off;
        where = "off-diagonal leakage at sigma=" + io::fmt(s) + " tau=" + io::fmt(grid[i]);
      }
    }
    std::lock_guard lk(mu);
    if (worst > out.max_rel || out.worst.empty()) {
      out.max_rel = worst;
      out.worst = where;
    }
  });
  return out;
}

RunManifest run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto wall = std::chrono::system_clock::now();
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec || !fs::is_directory(cfg.out_dir)) throw ValidationError("output.dir is not writable: " + cfg.out_dir);

  const CovarianceModeld model = experiment_model(cfg);
  const Index d = model.dim();
  const auto grid = cfg.tau_grid();
  std::vector<ModeSeries> series(static_cast<std::size_t>(d));
  parallel_for(d, cfg.workers, [&](Index k) { series[std::size_t(k)] = mode_series(cfg, model.spectrum(k), grid); });

  RunManifest man;
  const std::string ext = cfg.format == "json" ? ".json" : ".csv";
  auto path = [&](const std::string& f) { return (fs::path(cfg.out_dir) / f).string(); };

  io::Table traj{{"mode_index", "lambda_target", "tau", "sigma", "psi", "lambda_gen"}, {}};
  for (Index k = 0; k < d; ++k) {
    const ModeSeries& ms = series[std::size_t(k)];
    for (std::size_t si = 0; si < cfg.sigmas.size(); ++si)
      for (std::size_t i = 0; i < ms.tau.size(); ++i)
        traj.rows.push_back({std::to_string(k), io::fmt(ms.lambda), io::fmt(ms.tau[i]), io::fmt(cfg.sigmas[si]),
                             io::fmt(ms.psi[si][i]), io::fmt(ms.lambda_gen[i])});
  }
  traj.write(path("trajectories" + ext), cfg.format);
  man.files.push_back("trajectories" + ext);

  const EmergenceReport rep = emergence_report(cfg, model, series);
  io::Table em{{"mode_index", "lambda_target", "tau_star", "branch", "excluded_flag"}, {}};
  for (const auto& r : rep.rows)
    em.rows.push_back({std::to_string(r.mode), io::fmt(r.lambda), io::fmt(r.tau_star), r.branch, r.excluded ? "1" : "0"});
  em.write(path("emergence" + ext), cfg.format);
  man.files.push_back("emergence" + ext);

  nlohmann::ordered_json fit;
  fit["criterion"] = cfg.criterion.kind == EmergenceCriterion::Kind::GeometricMean ? "geometric" : "harmonic";
  auto branch_json = [](const std::optional<PowerLawFit>& f) -> nlohmann::ordered_json {
    if (!f) return nullptr;
    nlohmann::ordered_json j;
    j["alpha"] = f->alpha;
    j["intercept"] = f->intercept;
    j["r_squared"] = f->r_squared;
    j["n_used"] = f->n_used;
    return j;
  };
  fit["branches"]["increasing"] = branch_json(rep.fit.increasing);
  fit["branches"]["decreasing"] = branch_json(rep.fit.decreasing);
  fit["branches"]["pooled"] = branch_json(rep.fit.pooled);
  if (!rep.fit_error.empty()) fit["error"] = rep.fit_error;
  {
    std::ofstream f(path("fit.json"));
    f << fit.dump(2) << "\n";
  }
  man.files.push_back("fit.json");

  if (cfg.validate_with_oracle) {
    man.oracle_checked = true;
    man.oracle = oracle_deviation(cfg, model);
    man.oracle_ok = man.oracle.max_rel < 1e-6;
  }

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  nlohmann::ordered_json mj;
  mj["software"] = {{"name", "lindyn"},
                    {"version", software_version()},
                    {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                  std::to_string(EIGEN_MINOR_VERSION)},
                    {"compiler", __VERSION__}};
  mj["seed"] = cfg.seed;
  nlohmann::ordered_json echo;
  for (const auto& [k, v] : config_echo(cfg)) echo[k] = v;
  mj["config"] = echo;
  mj["files"] = man.files;
  if (man.oracle_checked)
    mj["oracle"] = {{"max_relative_deviation", man.oracle.max_rel},
                    {"tolerance", 1e-6},
                    {"passed", man.oracle_ok},
                    {"worst", man.oracle.worst}};
  const std::time_t tt = std::chrono::system_clock::to_time_t(wall);
  char ts[32];
  std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
  mj["run"] = {{"started_utc", ts}, {"wall_clock_seconds", secs}};
  {
    std::ofstream f(path("manifest.json"));
    f << mj.dump(2) << "\n";
  }
  man.files.push_back("manifest.json");
  return man;
}

}  // namespace lindyn
