// SPDX-License-Identifier: Apache-2.0
#include "kraichnan/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "kraichnan/errors.hpp"

namespace kraichnan {

namespace {

enum class Kind { Int, U64, Real, Str, RealList };

struct KeySpec {
  Kind kind;
  const char* def;
  const char* choices;  // for Str: '|'-separated, nullptr = free-form
};

// Registry of every recognized key with its default. Threshold defaults are
// the acceptance values; runners read them from here, never from literals.
const std::map<std::string, KeySpec>& registry() {
  static const std::map<std::string, KeySpec> reg = {
      {"experiment", {Kind::Str, "constants", "constants|kernel|regime|pde|mc|yaglom|dirac|sweep"}},
      {"format_version", {Kind::Int, "1", nullptr}},
      {"seed", {Kind::U64, "118159304032", nullptr}},
      {"out", {Kind::Str, "out", nullptr}},
      {"threads", {Kind::Int, "1", nullptr}},

      {"model.d", {Kind::Int, "2", nullptr}},
      {"model.alpha", {Kind::Real, "0.5", nullptr}},
      {"model.eta", {Kind::Real, "1.0", nullptr}},
      {"model.m", {Kind::Real, "1.0", nullptr}},
      {"model.trace_c0", {Kind::Real, "0", nullptr}},
      {"model.kernel_mode", {Kind::Str, "full_kraichnan", "full_kraichnan|self_similar"}},
      {"model.self_similar_c", {Kind::Real, "1.0", nullptr}},
      {"model.table_nodes", {Kind::Int, "512", nullptr}},
      {"model.table_tol", {Kind::Real, "1e-8", nullptr}},

      {"solver.kappa", {Kind::Real, "0", nullptr}},
      {"solver.mode", {Kind::Str, "transport", "transport|continuity_divfree"}},
      {"solver.dt", {Kind::Real, "1e-3", nullptr}},
      {"solver.dt_geometric", {Kind::Real, "0", nullptr}},
      {"solver.theta", {Kind::Real, "1.0", nullptr}},
      {"solver.outer_bc", {Kind::Str, "dirichlet_zero", "dirichlet_zero|homogeneous_neumann"}},
      {"solver.h_min", {Kind::Real, "1e-4", nullptr}},
      {"solver.r_max", {Kind::Real, "10", nullptr}},
      {"solver.growth", {Kind::Real, "1.05", nullptr}},
      {"solver.t_end", {Kind::Real, "1.0", nullptr}},
      {"solver.obs_per_decade", {Kind::Int, "8", nullptr}},
      {"solver.obs_t_first", {Kind::Real, "0", nullptr}},
      {"solver.seminorm_delta", {Kind::Real, "0.05", nullptr}},
      {"solver.seminorm_l", {Kind::Real, "0.5", nullptr}},
      {"solver.corr_length", {Kind::Real, "1.0", nullptr}},
      {"solver.fit_r_lo", {Kind::Real, "0", nullptr}},
      {"solver.fit_r_hi", {Kind::Real, "0", nullptr}},
      {"solver.f0", {Kind::Str, "gaussian", "gaussian|exp_kink|bump|zero"}},
      {"solver.f0_sigma", {Kind::Real, "1.0", nullptr}},

      {"mc.n_paths", {Kind::Int, "10000", nullptr}},
      {"mc.r0", {Kind::Real, "0.01", nullptr}},
      {"mc.t_end", {Kind::Real, "1.0", nullptr}},
      {"mc.dt_max", {Kind::Real, "1e-2", nullptr}},
      {"mc.eps_dt", {Kind::Real, "0.1", nullptr}},
      {"mc.floor_eps", {Kind::Real, "1e-8", nullptr}},

      {"kernel.r_lo", {Kind::Real, "1e-5", nullptr}},
      {"kernel.r_hi", {Kind::Real, "10", nullptr}},
      {"kernel.n", {Kind::Int, "64", nullptr}},
      {"kernel.asym_r", {Kind::Real, "0", nullptr}},  // 0 -> 1e-3/m

      {"regime.n_alpha", {Kind::Int, "50", nullptr}},
      {"regime.n_eta", {Kind::Int, "50", nullptr}},

      {"sweep.alphas", {Kind::RealList, "0.25,0.5,0.75", nullptr}},
      {"sweep.etas", {Kind::RealList, "1.0", nullptr}},

      {"yaglom.t_lo", {Kind::Real, "0", nullptr}},  // 0 -> 0.05 * t_end
      {"yaglom.t_hi", {Kind::Real, "0", nullptr}},  // 0 -> 0.8  * t_end
      {"dirac.t_lo", {Kind::Real, "0", nullptr}},
      {"dirac.t_hi", {Kind::Real, "0", nullptr}},

      {"thresholds.ctilde_rel", {Kind::Real, "1e-6", nullptr}},
      {"thresholds.limit_rel", {Kind::Real, "1e-4", nullptr}},
      {"thresholds.kernel_asym_rel", {Kind::Real, "0.01", nullptr}},
      {"thresholds.energy_drift", {Kind::Real, "0.005", nullptr}},
      {"thresholds.energy_loss_min", {Kind::Real, "0.05", nullptr}},
      {"thresholds.exponent_rel", {Kind::Real, "0.05", nullptr}},
      {"thresholds.yaglom_residual", {Kind::Real, "0.03", nullptr}},
      {"thresholds.richardson_exp_rel", {Kind::Real, "0.05", nullptr}},
      {"thresholds.moment_sigmas", {Kind::Real, "3.0", nullptr}},
      {"thresholds.dirac_exp_rel", {Kind::Real, "0.07", nullptr}},
      {"thresholds.blowup_margin", {Kind::Real, "0.15", nullptr}},
      {"thresholds.mass_rel", {Kind::Real, "1e-6", nullptr}},
  };
  return reg;
}

bool parse_double(const std::string& s, double* out) {
  char* end = nullptr;
  *out = std::strtod(s.c_str(), &end);
  return end && *end == '\0' && end != s.c_str();
}

bool parse_long(const std::string& s, long* out) {
  char* end = nullptr;
  *out = std::strtol(s.c_str(), &end, 10);
  return end && *end == '\0' && end != s.c_str();
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  for (const auto& [key, spec] : registry()) values_[key] = spec.def;
}

void ExperimentConfig::set_checked(const std::string& key, const std::string& value,
                                   const std::string& where, int line) {
  std::ostringstream at;
  at << where;
  if (line > 0) at << ":" << line;
  auto it = registry().find(key);
  if (it == registry().end())
    throw ConfigError(at.str() + ": unknown key '" + key + "'");
  const KeySpec& spec = it->second;
  switch (spec.kind) {
    case Kind::Int: {
      long v;
      if (!parse_long(value, &v))
        throw ConfigError(at.str() + ": key '" + key + "' expects an integer, got '" + value + "'");
      break;
    }
    case Kind::U64: {
      char* end = nullptr;
      (void)std::strtoull(value.c_str(), &end, 10);
      if (!end || *end != '\0' || end == value.c_str())
        throw ConfigError(at.str() + ": key '" + key + "' expects an unsigned integer, got '" +
                          value + "'");
      break;
    }
    case Kind::Real: {
      double v;
      if (!parse_double(value, &v))
        throw ConfigError(at.str() + ": key '" + key + "' expects a number, got '" + value + "'");
      break;
    }
    case Kind::RealList: {
      std::stringstream ss(value);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        double v;
        if (!parse_double(trim(tok), &v))
          throw ConfigError(at.str() + ": key '" + key + "' expects comma-separated numbers");
      }
      break;
    }
    case Kind::Str: {
      if (spec.choices) {
        std::string ch = spec.choices;
        bool ok = false;
        std::stringstream ss(ch);
        std::string tok;
        while (std::getline(ss, tok, '|'))
          if (tok == value) ok = true;
        if (!ok)
          throw ConfigError(at.str() + ": key '" + key + "' must be one of {" + ch + "}, got '" +
                            value + "'");
      }
      break;
    }
  }
  values_[key] = value;
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text, const std::string& origin) {
  ExperimentConfig cfg;
  std::map<std::string, int> seen;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::string s = line;
    size_t hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    size_t eq = s.find('=');
    if (eq == std::string::npos) {
      std::ostringstream oss;
      oss << origin << ":" << lineno << ": expected key=value, got '" << s << "'";
      throw ConfigError(oss.str());
    }
    std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
    auto prev = seen.find(key);
    if (prev != seen.end()) {
      std::ostringstream oss;
      oss << origin << ":" << lineno << ": duplicate key '" << key << "' (first set at line "
          << prev->second << ")";
      throw ConfigError(oss.str());
    }
    seen[key] = lineno;
    cfg.set_checked(key, value, origin, lineno);
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str(), path);
}

void ExperimentConfig::set_override(const std::string& assignment) {
  size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  set_checked(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), "<override>", 0);
}

const std::string& ExperimentConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
  return it->second;
}

double ExperimentConfig::get_double(const std::string& key) const {
  double v;
  if (!parse_double(get(key), &v)) throw ConfigError("key '" + key + "' is not a number");
  return v;
}

long ExperimentConfig::get_long(const std::string& key) const {
  long v;
  if (!parse_long(get(key), &v)) throw ConfigError("key '" + key + "' is not an integer");
  return v;
}

std::uint64_t ExperimentConfig::get_u64(const std::string& key) const {
  return std::strtoull(get(key).c_str(), nullptr, 10);
}

std::vector<double> ExperimentConfig::get_list(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(get(key));
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    double v;
    if (!parse_double(trim(tok), &v)) throw ConfigError("key '" + key + "' is not a number list");
    out.push_back(v);
  }
  return out;
}

ModelParams ExperimentConfig::model_params() const {
  ModelParams p;
  p.d = static_cast<int>(get_long("model.d"));
  p.alpha = get_double("model.alpha");
  p.eta = get_double("model.eta");
  p.m = get_double("model.m");
  p.trace_c0 = get_double("model.trace_c0");
  p.kernel_mode = get("model.kernel_mode") == "self_similar" ? KernelMode::self_similar
                                                             : KernelMode::full_kraichnan;
  p.self_similar_c = get_double("model.self_similar_c");
  p.validate();
  return p;
}

PdeConfig ExperimentConfig::pde_config() const {
  PdeConfig c;
  c.kappa = get_double("solver.kappa");
  c.mode = get("solver.mode") == "continuity_divfree" ? PdeMode::continuity_divfree
                                                      : PdeMode::transport;
  c.dt = get_double("solver.dt");
  c.dt_geometric = get_double("solver.dt_geometric");
  c.theta = get_double("solver.theta");
  c.outer_bc = get("solver.outer_bc") == "homogeneous_neumann" ? OuterBc::homogeneous_neumann
                                                               : OuterBc::dirichlet_zero;
  c.seminorm_delta = get_double("solver.seminorm_delta");
  c.seminorm_l = get_double("solver.seminorm_l");
  c.corr_length = get_double("solver.corr_length");
  c.fit_r_lo = get_double("solver.fit_r_lo");
  c.fit_r_hi = get_double("solver.fit_r_hi");
  return c;
}

McConfig ExperimentConfig::mc_config() const {
  McConfig c;
  c.n_paths = get_long("mc.n_paths");
  c.r0 = get_double("mc.r0");
  c.t_end = get_double("mc.t_end");
  c.dt_max = get_double("mc.dt_max");
  c.eps_dt = get_double("mc.eps_dt");
  c.floor_eps = get_double("mc.floor_eps");
  c.master_seed = get_u64("seed");
  return c;
}

std::string ExperimentConfig::resolved_text() const {
  std::ostringstream oss;
  for (const auto& [k, v] : values_) oss << k << "=" << v << "\n";
  return oss.str();
}

std::uint64_t ExperimentConfig::config_hash() const {
  std::ostringstream oss;
  for (const auto& [k, v] : values_) {
    if (k == "out" || k == "threads") continue;  // result-neutral
    oss << k << "=" << v << "\n";
  }
  return fnv1a64(oss.str());
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace kraichnan
