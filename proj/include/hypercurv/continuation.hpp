#pragma once

// Epsilon ladder: solve each fixed-eps problem, warm-starting from the
// previous level, and record the quantities whose eps -> 0 behaviour matters.

#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hypercurv/barriers.hpp"
#include "hypercurv/solver.hpp"

namespace hcurv {

struct LadderEntry {
  double epsilon = 0.0;
  SurfaceState state;
  int outer_iterations = 0;
  double min_outer_increase = 0.0;
  bool warm_started = false;
  double warm_start_blend = 0.0;
  SolverCounters counters;
  double max_w = 0.0;
  double max_kappa = 0.0;
  double min_kappa = 0.0;
  Interval boundary_nu{};         ///< range of sampled nu^{n+1} on the boundary
  double boundary_w_excess = 0.0; ///< max |w - 1/sigma| on the boundary
  double ratio_M = 0.0;
  DiagnosticsReport diagnostics;
};

struct LadderTrend {
  bool kappa_applicable = false;   ///< sigma^2 > 1/8
  double kappa_variation = 0.0;    ///< relative change of max kappa over the last two levels
  bool kappa_bounded = false;      ///< variation < 20% and below the a priori bound
  bool w_excess_monotone = false;  ///< boundary |w - 1/sigma| decreases along the ladder
  double w_excess_slope = 0.0;     ///< least-squares slope of log excess vs log eps
};

struct LadderResult {
  std::vector<LadderEntry> entries;
  bool completed = false;
  std::string failure;                  ///< reason the ladder stopped early
  std::vector<double> failure_history;  ///< Cauchy differences of the failed solve
  LadderTrend trend;
};

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline LadderTrend ladder_trend(const std::vector<LadderEntry>& entries, double sigma) {
  LadderTrend t;
  const auto bound = kappa_bound_sigma(sigma);
  t.kappa_applicable = bound.has_value();
  if (entries.size() >= 2) {
    const double a = entries[entries.size() - 2].max_kappa, b = entries.back().max_kappa;
    t.kappa_variation = std::abs(b - a) / std::max(a, b);
  }
  if (t.kappa_applicable && entries.size() >= 2) {
    bool below = true;
    for (const auto& e : entries) below = below && e.max_kappa <= *bound;
    t.kappa_bounded = t.kappa_variation < 0.2 && below;
  }
  std::vector<double> eps, ex;
  t.w_excess_monotone = entries.size() >= 2;
  for (size_t i = 0; i < entries.size(); ++i) {
    eps.push_back(entries[i].epsilon);
    ex.push_back(entries[i].boundary_w_excess);
    if (i > 0 && !(entries[i].boundary_w_excess < entries[i - 1].boundary_w_excess)) t.w_excess_monotone = false;
  }
  t.w_excess_slope = loglog_slope(eps, ex);
  return t;
}

inline LadderEntry make_ladder_entry(const FixedEpsilonResult& r, double epsilon, const SolveSchedule& sched,
                                     const DiagnosticsOptions& dopt) {
  LadderEntry e;
  e.epsilon = epsilon;
  e.state = r.state;
  e.outer_iterations = r.outer_iterations;
  e.min_outer_increase = r.min_outer_increase;
  e.warm_started = r.warm_started;
  e.warm_start_blend = r.warm_start_blend;
  e.counters = r.counters;
  e.max_w = r.state.max_w();
  e.max_kappa = r.state.max_kappa();
  e.min_kappa = r.state.min_kappa();
  e.boundary_nu = {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& b : r.state.boundary) {
    e.boundary_nu.lo = std::min(e.boundary_nu.lo, b.nu);
    e.boundary_nu.hi = std::max(e.boundary_nu.hi, b.nu);
    e.boundary_w_excess = std::max(e.boundary_w_excess, std::abs(b.w - 1.0 / sched.sigma));
  }
  auto opt = dopt;
  opt.newton_tol = sched.newton_tol;
  e.diagnostics = diagnose(r.state, opt);
  if (const auto* c = e.diagnostics.find("curvature_ratio_M")) e.ratio_M = c->value;
  return e;
}

/// Solves every eps in the ladder. A failure stops the ladder and returns the
/// completed prefix.
inline LadderResult epsilon_continuation(DomainPtr domain, const SolveSchedule& sched,
                                         const DiagnosticsOptions& dopt = {}) {
  sched.validate();
  LadderResult out;
  out.entries.reserve(sched.epsilon_ladder.size());  // keeps `prev` valid
  const SurfaceState* prev = nullptr;
  for (double eps : sched.epsilon_ladder) {
    try {
      auto r = solve_fixed_epsilon(domain, sched, eps, prev);
      out.entries.push_back(make_ladder_entry(r, eps, sched, dopt));
      prev = &out.entries.back().state;
    } catch (const ConvergenceError& e) {
      out.failure = "eps = " + std::to_string(eps) + ": " + e.what();
      out.failure_history = e.history();
      break;
    } catch (const std::exception& e) {
      out.failure = "eps = " + std::to_string(eps) + ": " + e.what();
      break;
    }
  }
  out.completed = out.failure.empty();
  out.trend = ladder_trend(out.entries, sched.sigma);
  return out;
}

}  // namespace hcurv
