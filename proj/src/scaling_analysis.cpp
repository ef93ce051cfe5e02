// SPDX-License-Identifier: Apache-2.0
#include "kraichnan/scaling_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kraichnan/errors.hpp"

namespace kraichnan {

namespace {
// two-sided 97.5% Student-t quantiles for small dof, normal beyond
double t_quantile_975(int dof) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                 2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                                 2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                                 2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof < 1) return 12.706;
  if (dof <= 30) return table[dof - 1];
  return 1.96;
}
}  // namespace

PowerFit loglog_fit(const std::vector<std::pair<double, double>>& points, double window_lo,
                    double window_hi) {
  if (!(window_lo < window_hi)) throw FitError("loglog_fit: empty window");
  if (points.empty()) throw FitError("loglog_fit: no data");
  double tmin = points.front().first, tmax = points.front().first;
  for (auto& p : points) {
    tmin = std::min(tmin, p.first);
    tmax = std::max(tmax, p.first);
  }
  if (window_lo < tmin * (1 - 1e-12) || window_hi > tmax * (1 + 1e-12))
    throw FitError("loglog_fit: window extends outside the data range");
  std::vector<double> lx, ly;
  for (auto& p : points) {
    if (p.first < window_lo * (1 - 1e-12) || p.first > window_hi * (1 + 1e-12)) continue;
    if (!(p.second > 0.0)) {
      std::ostringstream oss;
      oss << "loglog_fit: non-positive value " << p.second << " at t=" << p.first;
      throw FitError(oss.str());
    }
    lx.push_back(std::log(p.first));
    ly.push_back(std::log(p.second));
  }
  size_t n = lx.size();
  if (n < 4) throw FitError("loglog_fit: fewer than 4 points in window");
  double sx = 0, sy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += lx[i];
    sy += ly[i];
  }
  double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  PowerFit fit;
  fit.n_points = static_cast<int>(n);
  fit.window_lo = window_lo;
  fit.window_hi = window_hi;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = std::max(0.0, syy - fit.slope * sxy);
  fit.r_squared = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  if (n > 2) {
    double se = std::sqrt(ss_res / (n - 2) / sxx);
    fit.slope_ci_95 = t_quantile_975(static_cast<int>(n) - 2) * se;
  }
  return fit;
}

YaglomReport yaglom_balance(const PdeRun& run, const DerivedConstants& constants) {
  if (run.model.eta != 1.0)
    throw ValidationError("yaglom_balance: divergence-free run (eta = 1) required");
  if (!(constants.delta_star > 0.0))
    throw ValidationError("yaglom_balance: diffusive regime required");
  if (run.times.size() < 3 || run.amplitude.size() != run.times.size())
    throw ValidationError("yaglom_balance: run lacks recorded observables");

  YaglomReport rep;
  rep.c_tilde = constants.c_tilde;
  const auto& ts = run.times;
  const auto& en = run.energy;
  // centered differences on the (geometric) sample schedule, one-sided ends
  auto deriv = [&](size_t i) {
    if (i == 0) return (en[1] - en[0]) / (ts[1] - ts[0]);
    if (i + 1 == ts.size()) return (en[i] - en[i - 1]) / (ts[i] - ts[i - 1]);
    double hm = ts[i] - ts[i - 1], hp = ts[i + 1] - ts[i];
    return (hm * hm * en[i + 1] - hp * hp * en[i - 1] + (hp * hp - hm * hm) * en[i]) /
           (hm * hp * (hm + hp));
  };
  for (size_t i = 1; i + 1 < ts.size(); ++i) {
    if (ts[i] <= 0.0) continue;
    double rate = -deriv(i);
    double a_t = run.amplitude[i];
    rep.times.push_back(ts[i]);
    rep.energy_rate.push_back(rate);
    rep.amplitude.push_back(a_t);
    double denom = std::fabs(rate);
    rep.residual.push_back(denom > 0 ? std::fabs(-rate + 2.0 * constants.c_tilde * a_t) / denom
                                     : 0.0);
  }
  // integrated balance: trapezoid of A_t over the full recorded schedule
  double integral = 0.0;
  for (size_t i = 0; i + 1 < ts.size(); ++i)
    integral += 0.5 * (run.amplitude[i] + run.amplitude[i + 1]) * (ts[i + 1] - ts[i]);
  rep.integrated_lhs = 2.0 * constants.c_tilde * integral;
  rep.integrated_rhs = en.front() - en.back();
  double denom = std::max(std::fabs(rep.integrated_rhs), 1e-300);
  rep.integrated_residual = std::fabs(rep.integrated_lhs - rep.integrated_rhs) / denom;
  return rep;
}

PowerFit blowup_exponent(const PdeRun& run, double delta) {
  const double alpha = run.model.alpha;
  double gamma = 2.0 - 2.0 * alpha - 2.0 * delta;
  if (!(gamma > 0.0)) throw ValidationError("blowup_exponent: exponent 2-2a-2delta must be > 0");
  std::vector<std::pair<double, double>> pts;
  for (size_t i = 0; i < run.times.size(); ++i) {
    if (run.times[i] <= 0.0) continue;
    double s = increment_seminorm(run.grid.nodes, run.profiles[i].values, gamma,
                                  run.config.seminorm_l);
    if (s > 0.0) pts.push_back({run.times[i], s});
  }
  if (pts.size() < 4) throw ValidationError("blowup_exponent: insufficient early-time samples");
  return loglog_fit(pts, pts.front().first, pts.back().first);
}

}  // namespace kraichnan
