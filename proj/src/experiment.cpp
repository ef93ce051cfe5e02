// SPDX-License-Identifier: Apache-2.0
#include "kraichnan/experiment.hpp"

#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <vector>

#include <json.hpp>

#include "kraichnan/dispersion_mc.hpp"
#include "kraichnan/errors.hpp"
#include "kraichnan/kernels.hpp"
#include "kraichnan/radial_pde.hpp"
#include "kraichnan/scaling_analysis.hpp"

namespace kraichnan {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

const char* kVersion = "kraichnan-lab 0.1.0";

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Check {
  std::string name;
  double value;
  double threshold;
  bool pass;
};

struct Summarizer {
  std::vector<Check> checks;
  void leq(const std::string& name, double value, double threshold) {
    checks.push_back({name, value, threshold, value <= threshold});
  }
  void geq(const std::string& name, double value, double threshold) {
    checks.push_back({name, value, threshold, value >= threshold});
  }
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  json to_json() const {
    json arr = json::array();
    for (const auto& c : checks)
      arr.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold},
                     {"pass", c.pass}});
    return arr;
  }
};

std::string csv_preamble(const ExperimentConfig& cfg) {
  std::ostringstream oss;
  oss << "# format_version=" << cfg.get("format_version") << " config_hash=" << std::hex
      << cfg.config_hash() << std::dec << "\n";
  return oss.str();
}

void stamp(json& j, const ExperimentConfig& cfg) {
  j["format_version"] = cfg.get_long("format_version");
  std::ostringstream oss;
  oss << std::hex << cfg.config_hash();
  j["config_hash"] = oss.str();
}

void write_manifest(const ExperimentConfig& cfg, const DerivedConstants* constants) {
  json j;
  j["version"] = kVersion;
  stamp(j, cfg);
  j["experiment"] = cfg.experiment();
  j["seed"] = cfg.get_u64("seed");
  json conf = json::object();
  for (const auto& [k, v] : cfg.values()) conf[k] = v;
  j["config"] = conf;
  if (constants) {
    j["constants"] = {{"c", constants->c},
                      {"beta", constants->beta},
                      {"alpha1", constants->alpha1},
                      {"delta_star", constants->delta_star},
                      {"c_tilde", constants->c_tilde},
                      {"k_ric", constants->k_ric},
                      {"bN0", constants->bN0},
                      {"regime", to_string(constants->regime)}};
  }
  atomic_write(cfg.get("out"), "manifest.json", j.dump(2) + "\n");
}

int finish(const ExperimentConfig& cfg, const Summarizer& sum, json extra = json::object()) {
  json j;
  j["experiment"] = cfg.experiment();
  stamp(j, cfg);
  j["checks"] = sum.to_json();
  j["pass"] = sum.all_pass();
  for (auto& [k, v] : extra.items()) j[k] = v;
  atomic_write(cfg.get("out"), "summary.json", j.dump(2) + "\n");
  return sum.all_pass() ? 0 : 2;
}

std::function<double(double)> initial_datum(const ExperimentConfig& cfg) {
  std::string kind = cfg.get("solver.f0");
  double s = cfg.get_double("solver.f0_sigma");
  if (kind == "gaussian") return [s](double r) { return std::exp(-r * r / (4.0 * s * s)); };
  if (kind == "exp_kink") return [s](double r) { return std::exp(-r / s); };
  if (kind == "bump") {
    // normalized narrow bump (near-Dirac datum for continuity runs)
    return [s](double r) { return std::exp(-r * r / (2.0 * s * s)); };
  }
  return [](double) { return 0.0; };
}

std::vector<double> observable_schedule(const ExperimentConfig& cfg, double t_end) {
  double t_first = cfg.get_double("solver.obs_t_first");
  if (t_first <= 0.0) t_first = 1e-3 * t_end;
  long per_decade = cfg.get_long("solver.obs_per_decade");
  std::vector<double> obs;
  double ratio = std::pow(10.0, 1.0 / per_decade);
  for (double t = t_first; t < t_end * 0.9999; t *= ratio) obs.push_back(t);
  obs.push_back(t_end);
  return obs;
}

PdeRun run_pde_from_config(const ExperimentConfig& cfg, const IsotropicKernel& kernel) {
  RadialGrid grid = build_grid(cfg.get_double("solver.h_min"), cfg.get_double("solver.r_max"),
                               cfg.get_double("solver.growth"));
  PdeConfig pc = cfg.pde_config();
  double t_end = cfg.get_double("solver.t_end");
  pc.observable_times = observable_schedule(cfg, t_end);
  return evolve(kernel, grid, pc, initial_datum(cfg), t_end);
}

void write_pde_csvs(const ExperimentConfig& cfg, const PdeRun& run) {
  {
    std::ostringstream csv;
    csv << csv_preamble(cfg) << "t,r,f\n";
    for (const auto& prof : run.profiles)
      for (size_t i = 0; i < run.grid.nodes.size(); ++i)
        csv << fmt_double(prof.t) << "," << fmt_double(run.grid.nodes[i]) << ","
            << fmt_double(prof.values[i]) << "\n";
    atomic_write(cfg.get("out"), "profiles.csv", csv.str());
  }
  {
    std::ostringstream csv;
    csv << csv_preamble(cfg) << "t,energy,seminorm_minus,seminorm_plus,A_t,mass\n";
    for (size_t i = 0; i < run.times.size(); ++i)
      csv << fmt_double(run.times[i]) << "," << fmt_double(run.energy[i]) << ","
          << fmt_double(run.seminorm_minus[i]) << "," << fmt_double(run.seminorm_plus[i]) << ","
          << fmt_double(run.amplitude[i]) << "," << fmt_double(run.mass[i]) << "\n";
    atomic_write(cfg.get("out"), "observables.csv", csv.str());
  }
}

// ---------------------------------------------------------------------- //

int experiment_constants(const ExperimentConfig& cfg) {
  ModelParams mp = cfg.model_params();
  DerivedConstants k = derived_constants(mp);
  write_manifest(cfg, &k);
  json j;
  stamp(j, cfg);
  j["c"] = k.c;
  j["beta"] = k.beta;
  j["alpha1"] = k.alpha1;
  j["delta_star"] = k.delta_star;
  j["c_tilde"] = k.c_tilde;
  j["k_ric"] = k.k_ric;
  j["bN0"] = k.bN0;
  j["regime"] = to_string(k.regime);
  double closed = dissipation_constant_closed_form(mp.alpha, mp.d, mp.resolved_trace_c0());
  j["c_tilde_closed_form"] = closed;
  atomic_write(cfg.get("out"), "constants.json", j.dump(2) + "\n");

  Summarizer sum;
  // cross-check only applies when c comes from the quadrature route at eta = 1
  if (mp.eta == 1.0 && mp.kernel_mode == KernelMode::full_kraichnan)
    sum.leq("ctilde_closed_vs_quadrature_rel", std::fabs(closed / k.c_tilde - 1.0),
            cfg.get_double("thresholds.ctilde_rel"));
  return finish(cfg, sum, json{{"constants_file", "constants.json"}});
}

int experiment_kernel(const ExperimentConfig& cfg) {
  ModelParams mp = cfg.model_params();
  KernelOptions ko;
  ko.table_nodes = static_cast<int>(cfg.get_long("model.table_nodes"));
  ko.rel_tol = cfg.get_double("model.table_tol");
  IsotropicKernel kernel(mp, ko);
  write_manifest(cfg, &kernel.constants());

  double r_lo = cfg.get_double("kernel.r_lo"), r_hi = cfg.get_double("kernel.r_hi");
  long n = cfg.get_long("kernel.n");
  std::ostringstream csv;
  csv << csv_preamble(cfg) << "r,b_L,b_N\n";
  for (long i = 0; i < n; ++i) {
    double r = std::exp(std::log(r_lo) + (std::log(r_hi) - std::log(r_lo)) * i / (n - 1));
    csv << fmt_double(r) << "," << fmt_double(kernel.bL(r)) << "," << fmt_double(kernel.bN(r))
        << "\n";
  }
  atomic_write(cfg.get("out"), "kernel.csv", csv.str());

  Summarizer sum;
  double r_asym = cfg.get_double("kernel.asym_r");
  if (r_asym <= 0.0) r_asym = 1e-3 / mp.m;
  const auto& k = kernel.constants();
  double bl = kernel.bL_exact(r_asym), bn = kernel.bN_exact(r_asym);
  double c_rel = std::fabs(bl / std::pow(r_asym, 2 * mp.alpha) / k.c - 1.0);
  double beta_rel = std::fabs(bn / bl / k.beta - 1.0);
  double tol = cfg.get_double("thresholds.kernel_asym_rel");
  sum.leq("bL_over_r2a_to_c_rel", c_rel, tol);
  sum.leq("bN_over_bL_to_beta_rel", beta_rel, tol);
  return finish(cfg, sum);
}

int experiment_regime(const ExperimentConfig& cfg) {
  write_manifest(cfg, nullptr);
  long na = cfg.get_long("regime.n_alpha"), ne = cfg.get_long("regime.n_eta");
  std::ostringstream csv;
  csv << csv_preamble(cfg) << "alpha,eta,regime,delta_star\n";
  long mismatches = 0;
  for (long i = 0; i < na; ++i) {
    double alpha = 0.02 + 0.96 * (i + 0.5) / na;
    for (long jj = 0; jj < ne; ++jj) {
      double eta = (jj + 0.5) / ne;
      Regime r = classify_regime(alpha, eta, static_cast<int>(cfg.get_long("model.d")));
      ModelParams mp = cfg.model_params();
      mp.alpha = alpha;
      mp.eta = eta;
      DerivedConstants k = derived_constants(mp);
      csv << fmt_double(alpha) << "," << fmt_double(eta) << "," << to_string(r) << ","
          << fmt_double(k.delta_star) << "\n";
      // delta_star > 0 iff diffusive (away from the exact boundary)
      bool diffusive = (r == Regime::diffusive_with_hitting || r == Regime::diffusive_no_hitting);
      if (r != Regime::boundary_case && diffusive != (k.delta_star > 0.0)) ++mismatches;
    }
  }
  atomic_write(cfg.get("out"), "regimes.csv", csv.str());
  Summarizer sum;
  sum.leq("delta_star_regime_mismatches", static_cast<double>(mismatches), 0.0);
  return finish(cfg, sum);
}

int experiment_pde(const ExperimentConfig& cfg) {
  ModelParams mp = cfg.model_params();
  KernelOptions ko;
  ko.table_nodes = static_cast<int>(cfg.get_long("model.table_nodes"));
  ko.rel_tol = cfg.get_double("model.table_tol");
  IsotropicKernel kernel(mp, ko);
  write_manifest(cfg, &kernel.constants());
  PdeRun run = run_pde_from_config(cfg, kernel);
  write_pde_csvs(cfg, run);

  Summarizer sum;
  if (cfg.get("solver.mode") == "continuity_divfree") {
    double m0 = run.mass.front(), drift = 0.0;
    for (double m : run.mass) drift = std::max(drift, std::fabs(m - m0));
    sum.leq("mass_drift_rel", drift / std::fabs(m0), cfg.get_double("thresholds.mass_rel"));
  }
  json extra;
  extra["energy_initial"] = run.energy.front();
  extra["energy_final"] = run.energy.back();
  return finish(cfg, sum, extra);
}

int experiment_mc(const ExperimentConfig& cfg) {
  ModelParams mp = cfg.model_params();
  IsotropicKernel kernel(mp, KernelOptions{});
  DerivedConstants k = kernel.constants();
  write_manifest(cfg, &k);
  McConfig mc = cfg.mc_config();
  int threads = static_cast<int>(cfg.get_long("threads"));
  SeparationEnsemble ens = simulate_separation(kernel, mc, threads);

  std::ostringstream csv;
  csv << csv_preamble(cfg) << "t,q,mean,stderr,n_effective\n";
  for (size_t qi = 0; qi < ens.orders.size(); ++qi)
    for (size_t ti = 0; ti < ens.times.size(); ++ti)
      csv << fmt_double(ens.times[ti]) << "," << fmt_double(ens.orders[qi]) << ","
          << fmt_double(ens.mean(ti, qi)) << "," << fmt_double(ens.stderr_of(ti, qi)) << ","
          << ens.n_effective << "\n";
  atomic_write(cfg.get("out"), "moments.csv", csv.str());

  RichardsonReport rep = richardson_report(ens, k);
  json j;
  stamp(j, cfg);
  j["exponent"] = rep.exponent;
  j["exponent_ci"] = rep.exponent_ci;
  j["prefactor"] = rep.prefactor;
  j["k_ric"] = rep.k_ric;
  j["lower_bound_pass"] = rep.lower_bound_pass;
  j["flagged_paths"] = rep.flagged_paths;
  j["sup_stat_p50"] = rep.sup_p50;
  j["sup_stat_p90"] = rep.sup_p90;
  j["sup_stat_max"] = rep.sup_max;
  j["fit_t_lo"] = rep.fit_t_lo;
  j["fit_t_hi"] = rep.fit_t_hi;
  atomic_write(cfg.get("out"), "richardson.json", j.dump(2) + "\n");

  Summarizer sum;
  double expo = 1.0 / (1.0 - mp.alpha);
  sum.leq("richardson_exponent_rel", std::fabs(rep.exponent / expo - 1.0),
          cfg.get_double("thresholds.richardson_exp_rel"));
  sum.geq("lower_bound_pass_fraction", rep.lower_bound_pass, 0.99);
  // exact moment law of order 2-2alpha at every sample time
  double gamma = 2.0 - 2.0 * mp.alpha;
  double drift = k.c * gamma * (1.0 - 2.0 * mp.alpha + k.beta * (mp.d - 1));
  double r_start = mc.r0 > 0 ? mc.r0 : mc.floor_eps;
  size_t qi = ens.order_index(gamma);
  double worst = 0.0;
  for (size_t ti = 0; ti < ens.times.size(); ++ti) {
    double expect = std::pow(r_start, gamma) + drift * ens.times[ti];
    double dev = std::fabs(ens.mean(ti, qi) - expect) / std::max(ens.stderr_of(ti, qi), 1e-300);
    worst = std::max(worst, dev);
  }
  sum.leq("moment_law_worst_sigmas", worst, cfg.get_double("thresholds.moment_sigmas"));
  return finish(cfg, sum);
}

int experiment_yaglom(const ExperimentConfig& cfg) {
  ModelParams mp = cfg.model_params();
  IsotropicKernel kernel(mp, KernelOptions{});
  DerivedConstants k = kernel.constants();
  write_manifest(cfg, &k);
  PdeRun run = run_pde_from_config(cfg, kernel);
  write_pde_csvs(cfg, run);
  YaglomReport rep = yaglom_balance(run, k);

  double t_end = cfg.get_double("solver.t_end");
  double t_lo = cfg.get_double("yaglom.t_lo"), t_hi = cfg.get_double("yaglom.t_hi");
  if (t_lo <= 0) t_lo = 0.05 * t_end;
  if (t_hi <= 0) t_hi = 0.8 * t_end;
  double worst = 0.0;
  for (size_t i = 0; i < rep.times.size(); ++i)
    if (rep.times[i] >= t_lo && rep.times[i] <= t_hi) worst = std::max(worst, rep.residual[i]);

  json j;
  stamp(j, cfg);
  j["c_tilde"] = rep.c_tilde;
  j["times"] = rep.times;
  j["A_t"] = rep.amplitude;
  j["energy_rate"] = rep.energy_rate;
  j["residual"] = rep.residual;
  j["integrated_lhs"] = rep.integrated_lhs;
  j["integrated_rhs"] = rep.integrated_rhs;
  j["integrated_residual"] = rep.integrated_residual;
  j["window"] = {t_lo, t_hi};
  atomic_write(cfg.get("out"), "yaglom.json", j.dump(2) + "\n");

  Summarizer sum;
  double tol = cfg.get_double("thresholds.yaglom_residual");
  sum.leq("pointwise_residual_max", worst, tol);
  sum.leq("integrated_residual", rep.integrated_residual, tol);
  return finish(cfg, sum);
}

int experiment_dirac(const ExperimentConfig& cfg) {
  ModelParams mp = cfg.model_params();
  IsotropicKernel kernel(mp, KernelOptions{});
  write_manifest(cfg, &kernel.constants());
  PdeRun run = run_pde_from_config(cfg, kernel);
  write_pde_csvs(cfg, run);

  double t_end = cfg.get_double("solver.t_end");
  double t_lo = cfg.get_double("dirac.t_lo"), t_hi = cfg.get_double("dirac.t_hi");
  if (t_lo <= 0) t_lo = 1e-2 * t_end;
  if (t_hi <= 0) t_hi = t_end;
  std::vector<std::pair<double, double>> pts;
  for (size_t i = 0; i < run.times.size(); ++i)
    if (run.times[i] > 0) pts.push_back({run.times[i], run.energy[i]});
  PowerFit fit = loglog_fit(pts, t_lo, t_hi);

  double expect = mp.d / (2.0 * (1.0 - mp.alpha));
  json j;
  stamp(j, cfg);
  j["decay_exponent"] = -fit.slope;
  j["expected_exponent"] = expect;
  j["slope_ci_95"] = fit.slope_ci_95;
  j["r_squared"] = fit.r_squared;
  j["window"] = {t_lo, t_hi};
  j["decades"] = std::log10(t_hi / t_lo);
  atomic_write(cfg.get("out"), "dirac.json", j.dump(2) + "\n");

  Summarizer sum;
  sum.leq("dirac_exponent_rel", std::fabs(-fit.slope / expect - 1.0),
          cfg.get_double("thresholds.dirac_exp_rel"));
  sum.geq("fit_decades", std::log10(t_hi / t_lo), 1.5);
  json extra;
  extra["mass_drift_rel"] =
      std::fabs(run.mass.back() - run.mass.front()) / std::fabs(run.mass.front());
  return finish(cfg, sum, extra);
}

int experiment_sweep(const ExperimentConfig& cfg) {
  write_manifest(cfg, nullptr);
  std::vector<double> alphas = cfg.get_list("sweep.alphas");
  std::vector<double> etas = cfg.get_list("sweep.etas");
  struct Row {
    double alpha, eta;
    DerivedConstants k;
  };
  std::vector<Row> rows(alphas.size() * etas.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= rows.size()) return;
      ModelParams mp = cfg.model_params();
      mp.alpha = alphas[i / etas.size()];
      mp.eta = etas[i % etas.size()];
      rows[i] = {mp.alpha, mp.eta, derived_constants(mp)};
    }
  };
  int threads = std::max(1, static_cast<int>(cfg.get_long("threads")));
  std::vector<std::thread> pool;
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << csv_preamble(cfg) << "alpha,eta,c,beta,alpha1,delta_star,c_tilde,k_ric,regime\n";
  for (const auto& row : rows)
    csv << fmt_double(row.alpha) << "," << fmt_double(row.eta) << "," << fmt_double(row.k.c)
        << "," << fmt_double(row.k.beta) << "," << fmt_double(row.k.alpha1) << ","
        << fmt_double(row.k.delta_star) << "," << fmt_double(row.k.c_tilde) << ","
        << fmt_double(row.k.k_ric) << "," << to_string(row.k.regime) << "\n";
  atomic_write(cfg.get("out"), "sweep.csv", csv.str());
  Summarizer sum;
  return finish(cfg, sum);
}

}  // namespace

void atomic_write(const std::string& dir, const std::string& name, const std::string& content) {
  fs::create_directories(dir);
  fs::path tmp = fs::path(dir) / (name + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericalError("atomic_write: cannot open " + tmp.string());
    out << content;
  }
  fs::rename(tmp, fs::path(dir) / name);
}

int run_experiment(const ExperimentConfig& cfg) {
  const std::string exp = cfg.experiment();
  try {
    if (exp == "constants") return experiment_constants(cfg);
    if (exp == "kernel") return experiment_kernel(cfg);
    if (exp == "regime") return experiment_regime(cfg);
    if (exp == "pde") return experiment_pde(cfg);
    if (exp == "mc") return experiment_mc(cfg);
    if (exp == "yaglom") return experiment_yaglom(cfg);
    if (exp == "dirac") return experiment_dirac(cfg);
    if (exp == "sweep") return experiment_sweep(cfg);
    throw ConfigError("unknown experiment '" + exp + "'");
  } catch (const std::exception& e) {
    try {
      atomic_write(cfg.get("out"), "FAILED", std::string(e.what()) + "\n");
    } catch (...) {
    }
    throw;
  }
}

}  // namespace kraichnan
