// SPDX-License-Identifier: Apache-2.0
#include "kraichnan/dispersion_mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "kraichnan/errors.hpp"
#include "kraichnan/philox.hpp"
#include "kraichnan/quadrature.hpp"
#include "kraichnan/scaling_analysis.hpp"
#include "kraichnan/special_functions.hpp"

namespace kraichnan {

namespace {
constexpr long kBlock = 1024;  // fixed reduction block; determinism unit
}

void McConfig::validate() const {
  if (n_paths < 100) throw ValidationError("McConfig: n_paths must be >= 100");
  if (r0 < 0.0) throw ValidationError("McConfig: r0 must be >= 0");
  if (!(t_end > 0.0)) throw ValidationError("McConfig: t_end must be positive");
  if (!(dt_max > 0.0) || !(eps_dt > 0.0)) throw ValidationError("McConfig: bad step rule");
  if (!(floor_eps > 0.0)) throw ValidationError("McConfig: floor_eps must be positive");
  if (r0 > 0.0 && floor_eps >= r0)
    throw ValidationError("McConfig: need floor_eps < r0 (or r0 = 0 for a Dirac start)");
}

double SeparationEnsemble::mean(size_t t_idx, size_t q_idx) const {
  size_t k = q_idx * times.size() + t_idx;
  double s = 0.0;
  for (double v : sum_pow[k]) s += v;
  return s / n_effective;
}

double SeparationEnsemble::stderr_of(size_t t_idx, size_t q_idx) const {
  size_t k = q_idx * times.size() + t_idx;
  double s = 0.0, s2 = 0.0;
  for (double v : sum_pow[k]) s += v;
  for (double v : sum_pow2[k]) s2 += v;
  double n = static_cast<double>(n_effective);
  double var = std::max(0.0, (s2 - s * s / n) / (n - 1.0));
  return std::sqrt(var / n);
}

size_t SeparationEnsemble::order_index(double q) const {
  for (size_t i = 0; i < orders.size(); ++i)
    if (std::fabs(orders[i] - q) < 1e-12) return i;
  std::ostringstream oss;
  oss << "order_index: moment order " << q << " was not streamed";
  throw ValidationError(oss.str());
}

SeparationEnsemble simulate_separation(const IsotropicKernel& kernel, const McConfig& config,
                                       int n_threads) {
  config.validate();
  const double alpha = kernel.params().alpha;
  const int d = kernel.params().d;
  const double gamma = 2.0 - 2.0 * alpha;

  SeparationEnsemble ens;
  ens.config = config;
  ens.model = kernel.params();
  ens.orders = {gamma, 1.0, 2.0, 4.0};
  if (config.sample_times.empty()) {
    // geometric schedule: 8 per decade over [t_end*1e-4, t_end]
    std::vector<double> ts;
    double t = config.t_end * 1e-4;
    while (t < config.t_end * 0.999) {
      ts.push_back(t);
      t *= std::pow(10.0, 0.125);
    }
    ts.push_back(config.t_end);
    ens.times = ts;
  } else {
    ens.times = config.sample_times;
    std::sort(ens.times.begin(), ens.times.end());
  }
  const size_t nt = ens.times.size(), nq = ens.orders.size();
  const long n_blocks = (config.n_paths + kBlock - 1) / kBlock;
  ens.sum_pow.assign(nq * nt, std::vector<double>(n_blocks, 0.0));
  ens.sum_pow2.assign(nq * nt, std::vector<double>(n_blocks, 0.0));
  if (config.keep_samples) ens.samples.assign(nt, std::vector<double>(config.n_paths, 0.0));
  ens.sup_stat.assign(config.n_paths, 0.0);
  std::vector<long> block_clean(n_blocks, 0), block_flagged(n_blocks, 0);

  const double r_start = (config.r0 > 0.0) ? config.r0 : config.floor_eps;
  const double inv_exp = 1.0 / (1.0 - alpha);

  auto run_block = [&](long blk) {
    long p_lo = blk * kBlock, p_hi = std::min<long>(config.n_paths, p_lo + kBlock);
    for (long p = p_lo; p < p_hi; ++p) {
      PhiloxStream rng(config.master_seed, static_cast<std::uint64_t>(p));
      double r = r_start, t = 0.0;
      bool bad = false;
      double sup_val = 0.0;
      size_t next = 0;
      std::vector<double> at_sample(nt, 0.0);
      while (next < nt) {
        double dt = std::min(config.dt_max, config.eps_dt * std::pow(r, gamma));
        if (t + dt >= ens.times[next]) dt = ens.times[next] - t;
        double drift = (d - 1) * kernel.bN(r) / r;
        double vol = std::sqrt(2.0 * kernel.bL(r));
        double z = rng.normal();
        r += drift * dt + vol * std::sqrt(dt) * z;
        if (r < config.floor_eps) r = config.floor_eps + (config.floor_eps - r);
        t += dt;
        if (!std::isfinite(r) || r > 1e12) {
          bad = true;
          break;
        }
        if (t >= ens.times[next] * (1.0 - 1e-12)) {
          at_sample[next] = r;
          sup_val = std::max(sup_val, std::pow(ens.times[next], -inv_exp) * r * r);
          ++next;
        }
      }
      if (bad) {
        ++block_flagged[blk];
        continue;
      }
      ++block_clean[blk];
      ens.sup_stat[p] = sup_val;
      for (size_t ti = 0; ti < nt; ++ti) {
        if (config.keep_samples) ens.samples[ti][p] = at_sample[ti];
        for (size_t qi = 0; qi < nq; ++qi) {
          double v = std::pow(at_sample[ti], ens.orders[qi]);
          ens.sum_pow[qi * nt + ti][blk] += v;
          ens.sum_pow2[qi * nt + ti][blk] += v * v;
        }
      }
    }
  };

  if (n_threads <= 1) {
    for (long blk = 0; blk < n_blocks; ++blk) run_block(blk);
  } else {
    std::atomic<long> next_blk{0};
    auto worker = [&] {
      for (;;) {
        long blk = next_blk.fetch_add(1);
        if (blk >= n_blocks) return;
        run_block(blk);
      }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (long blk = 0; blk < n_blocks; ++blk) {
    ens.n_effective += block_clean[blk];
    ens.n_flagged += block_flagged[blk];
  }
  if (ens.n_flagged * 100 > config.n_paths) {
    std::ostringstream oss;
    oss << "simulate_separation: " << ens.n_flagged << " of " << config.n_paths
        << " paths flagged (>1%)";
    throw NumericalError(oss.str());
  }
  return ens;
}

std::vector<MomentPoint> moment_curve(const SeparationEnsemble& ens, double q) {
  if (ens.n_effective == 0) throw ValidationError("moment_curve: empty ensemble");
  if (!(q > 0.0)) throw ValidationError("moment_curve: q must be positive");
  std::vector<MomentPoint> out;
  out.reserve(ens.times.size());
  bool streamed = false;
  size_t qi = 0;
  for (size_t i = 0; i < ens.orders.size(); ++i)
    if (std::fabs(ens.orders[i] - q) < 1e-12) {
      streamed = true;
      qi = i;
    }
  if (streamed) {
    for (size_t ti = 0; ti < ens.times.size(); ++ti)
      out.push_back({ens.times[ti], ens.mean(ti, qi), ens.stderr_of(ti, qi), ens.n_effective});
    return out;
  }
  if (ens.samples.empty())
    throw ValidationError("moment_curve: order not streamed and samples not retained");
  for (size_t ti = 0; ti < ens.times.size(); ++ti) {
    double s = 0, s2 = 0;
    long n = 0;
    for (double r : ens.samples[ti]) {
      if (r == 0.0) continue;  // flagged path slot
      double v = std::pow(r, q);
      s += v;
      s2 += v * v;
      ++n;
    }
    double var = std::max(0.0, (s2 - s * s / n) / (n - 1.0));
    out.push_back({ens.times[ti], s / n, std::sqrt(var / n), n});
  }
  return out;
}

RichardsonReport richardson_report(const SeparationEnsemble& ens,
                                   const DerivedConstants& constants) {
  const double alpha = ens.model.alpha;
  const double gamma = 2.0 - 2.0 * alpha;
  double r_start = ens.config.r0 > 0 ? ens.config.r0 : ens.config.floor_eps;
  double t_memory = 10.0 * std::pow(r_start, gamma);
  double t_hi = ens.times.back();
  if (!(t_hi / std::max(t_memory, 1e-300) >= 100.0))
    throw ValidationError(
        "richardson_report: ensemble must cover >= 2 decades beyond the r0-memory scale");

  RichardsonReport rep;
  rep.k_ric = constants.k_ric;
  rep.flagged_paths = ens.n_flagged;
  rep.fit_t_lo = t_memory;
  rep.fit_t_hi = t_hi;

  std::vector<std::pair<double, double>> pts;
  size_t qi2 = ens.order_index(2.0);
  long in_window = 0, pass = 0;
  const double expo = 1.0 / (1.0 - alpha);
  for (size_t ti = 0; ti < ens.times.size(); ++ti) {
    double t = ens.times[ti];
    if (t < t_memory || t > t_hi) continue;
    double var_mu = 0.5 * ens.mean(ti, qi2);  // E[Var(mu_t)] = E[r^2]/2
    pts.push_back({t, var_mu});
    ++in_window;
    if (var_mu >= 0.9 * constants.k_ric * std::pow(t, expo)) ++pass;
  }
  PowerFit fit = loglog_fit(pts, pts.front().first, pts.back().first);
  rep.exponent = fit.slope;
  rep.exponent_ci = fit.slope_ci_95;
  rep.prefactor = std::exp(fit.intercept);
  rep.lower_bound_pass = in_window ? static_cast<double>(pass) / in_window : 0.0;

  std::vector<double> sups;
  sups.reserve(ens.sup_stat.size());
  for (double v : ens.sup_stat)
    if (v > 0.0) sups.push_back(v);
  std::sort(sups.begin(), sups.end());
  if (!sups.empty()) {
    rep.sup_p50 = sups[sups.size() / 2];
    rep.sup_p90 = sups[static_cast<size_t>(0.9 * (sups.size() - 1))];
    rep.sup_max = sups.back();
  }
  return rep;
}

double gaussian_variance_identity(double sigma, int d) {
  if (!(sigma > 0.0)) throw ValidationError("gaussian_variance_identity: sigma must be > 0");
  if (d < 1) throw ValidationError("gaussian_variance_identity: d must be >= 1");
  double variance = d * sigma * sigma;
  // ||mu||_{L2}^2 by radial quadrature of the squared density
  double norm = std::pow(2.0 * M_PI * sigma * sigma, -d);
  auto f = [&](double r) {
    return norm * std::exp(-r * r / (sigma * sigma)) * std::pow(r, d - 1);
  };
  double l2sq = sphere_area(d) * integrate(f, 0.0, 12.0 * sigma, 1e-13);
  return variance * std::pow(l2sq, 2.0 / d);
}

}  // namespace kraichnan
