#pragma once

// Fixed-epsilon solver: monotone outer iteration
//   F(Av[u_{k+1}]) = sigma + M (u_{k+1} - u_k),   u = eps on the boundary,
// each step reached by a continuity method in t with damped Newton on the
// discrete residual. M defaults to 1/eps.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hypercurv/errors.hpp"
#include "hypercurv/grid.hpp"
#include "hypercurv/pde.hpp"
#include "hypercurv/surface.hpp"

namespace hcurv {

struct SolveSchedule {
  double sigma = 0.6;
  CurvatureFunctionSpec spec{2, 1, 0};
  std::vector<double> epsilon_ladder{0.04, 0.02, 0.01, 0.005, 0.0025, 0.00125};
  int continuity_steps = 8;
  double newton_tol = 1e-9;
  int max_newton = 40;
  double damping = 0.5;
  double min_step = 1.0 / (1 << 20);
  double monotone_tol = 1e-8;
  int max_outer = 100000;
  /// Slope M of the source sigma + M (u - v); unset means 1/eps.
  std::optional<double> source_slope;
  /// Reuse the LU factors across Newton steps while they keep contracting.
  bool reuse_jacobian = true;

  static std::vector<double> default_ladder(double eps0 = 0.04, int levels = 6) {
    std::vector<double> out;
    for (int j = 0; j < levels; ++j) out.push_back(eps0 / (1 << j));
    return out;
  }

  void validate() const {
    if (!(sigma > 0.0 && sigma < 1.0)) throw ArgumentError("sigma must lie in (0, 1)");
    spec.validate();
    if (spec.n != 2) throw ArgumentError("the grid solver requires n = 2");
    if (epsilon_ladder.empty()) throw ArgumentError("epsilon ladder is empty");
    for (size_t i = 0; i < epsilon_ladder.size(); ++i) {
      if (!(epsilon_ladder[i] > 0.0)) throw ArgumentError("epsilon ladder entries must be positive");
      if (i > 0 && !(epsilon_ladder[i] < epsilon_ladder[i - 1]))
        throw ArgumentError("epsilon ladder must be strictly decreasing");
    }
    if (continuity_steps < 4) throw ArgumentError("continuity_steps must be >= 4");
    if (!(newton_tol > 0.0)) throw ArgumentError("newton_tol must be positive");
    if (max_newton < 1) throw ArgumentError("max_newton must be >= 1");
    if (!(damping > 0.0 && damping < 1.0)) throw ArgumentError("damping must lie in (0, 1)");
    if (!(monotone_tol > 0.0)) throw ArgumentError("monotone_tol must be positive");
    if (source_slope && !(*source_slope >= 0.0)) throw ArgumentError("source slope must be >= 0");
  }
};

/// Psi(x, u) = sigma + offset(x) + M (u - anchor(x)); vectors indexed by
/// active node, empty meaning zero.
struct SourceTerm {
  double sigma = 0.0;
  double slope = 0.0;
  std::vector<double> anchor;
  std::vector<double> offset;

  double operator()(int node, double u) const {
    double psi = sigma;
    if (!offset.empty()) psi += offset[node];
    if (slope != 0.0) psi += slope * (u - (anchor.empty() ? 0.0 : anchor[node]));
    return psi;
  }
};

/// Newton system for G - psi: per-node coefficients and the assembled matrix
/// (rows/columns indexed by unknown id).
struct LinearizedSystem {
  std::vector<std::array<double, 3>> G_st;  ///< (G^11, G^22, G^12)
  std::vector<std::array<double, 2>> G_s;
  std::vector<double> zero_order;           ///< G_u - psi_u
  std::vector<double> rhs;                  ///< -(G - psi)
  Eigen::SparseMatrix<double> matrix;
  std::vector<int> sign_violations;         ///< unknown ids with G_u - psi_u >= 0
  double min_ellipticity = std::numeric_limits<double>::infinity();
};

namespace detail {

// Coefficients of one Jacobian row in derivative-slot form.
struct RowCoefficients {
  DerivWeights c{};
  double zero_order = 0.0;
  double rhs = 0.0;
  std::array<double, 3> G_st{};
  std::array<double, 2> G_s{};
  double min_eig = 0.0;
};

inline RowCoefficients row_coefficients(const PointJet<2>& jet, int x_slot, int y_slot,
                                        const CurvatureFunctionSpec& spec, double psi, double psi_u_of_Psi) {
  const auto gd = G_derivatives<2>(jet, spec);
  const double u = jet.u;
  RowCoefficients rc;
  rc.c[x_slot] = gd.G_s[0];
  rc.c[y_slot] = gd.G_s[1];
  rc.c[kDxx] = gd.G_st(0, 0);
  rc.c[kDyy] = gd.G_st(1, 1);
  rc.c[kDxy] = gd.G_st(0, 1) + gd.G_st(1, 0);
  rc.G_st = {gd.G_st(0, 0), gd.G_st(1, 1), gd.G_st(0, 1)};
  rc.G_s = {gd.G_s[0], gd.G_s[1]};
  // psi = Psi / u, psi_u = Psi_u / u - Psi / u^2
  const double psi_small = psi / u;
  const double psi_u = psi_u_of_Psi / u - psi / (u * u);
  rc.zero_order = gd.G_u - psi_u;
  rc.rhs = -(gd.G - psi_small);
  rc.min_eig = sym_eigen<2>(gd.G_st).values[0];
  return rc;
}

}  // namespace detail

/// Assembles the linearized operator L = G^{st} d_s d_t + G^s d_s + (G_u - psi_u)
/// with zero Dirichlet data for the correction.
inline LinearizedSystem assemble_linearized(const GridDomain& domain, const ScalarField& u, double epsilon,
                                            const CurvatureFunctionSpec& spec, const SourceTerm& source) {
  const int n = domain.unknown_count();
  LinearizedSystem sys;
  sys.G_st.resize(n), sys.G_s.resize(n), sys.zero_order.resize(n), sys.rhs.resize(n);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(n) * 9);
  for (int r = 0; r < n; ++r) {
    const int p = domain.unknown_node(r);
    const auto& st = domain.stencil(r);
    const auto jet = jet_from_derivs(u[p], stencil_apply(st, u.values.data(), epsilon), st.x_slot, st.y_slot);
    const auto rc = detail::row_coefficients(jet, st.x_slot, st.y_slot, spec, source(p, u[p]), source.slope);
    sys.G_st[r] = rc.G_st, sys.G_s[r] = rc.G_s;
    sys.zero_order[r] = rc.zero_order;
    sys.rhs[r] = rc.rhs;
    sys.min_ellipticity = std::min(sys.min_ellipticity, rc.min_eig);
    if (rc.zero_order >= 0.0) sys.sign_violations.push_back(r);
    for (int t = 0; t < st.n_terms; ++t) {
      const int col = domain.unknown_id(st.terms[t].node);
      if (col < 0) continue;
      double v = 0.0;
      for (int k = 0; k < kNumDeriv; ++k) v += rc.c[k] * st.terms[t].w[k];
      if (st.terms[t].node == p) v += rc.zero_order;
      trips.emplace_back(r, col, v);
    }
  }
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(trips.begin(), trips.end());
  return sys;
}

struct NewtonOutcome {
  bool converged = false;
  int iterations = 0;
  double residual = std::numeric_limits<double>::infinity();
  std::string reason;
};

struct SolverCounters {
  long residual_evals = 0;
  long factorizations = 0;
  long linear_solves = 0;
  long newton_iterations = 0;
};

/// Damped Newton on R(u) = F(Av[u]) - Psi(x, u) at the unknown nodes, with a
/// fixed sparsity pattern and cached LU factors.
class NewtonSolver {
public:
  NewtonSolver(DomainPtr domain, CurvatureFunctionSpec spec, double epsilon, const SolveSchedule& schedule)
      : domain_(std::move(domain)), spec_(spec), eps_(epsilon), sched_(schedule) {
    build_pattern();
  }

  double epsilon() const noexcept { return eps_; }
  const SolverCounters& counters() const noexcept { return counters_; }
  void invalidate() { factor_state_ = FactorState::none; }

  /// max |R| over unknown nodes; +inf if any unknown node is inadmissible.
  /// Fills R (unknown-indexed) when finite.
  double residual(const std::vector<double>& values, const SourceTerm& src, std::vector<double>& R) {
    ++counters_.residual_evals;
    const auto& dom = *domain_;
    const int n = dom.unknown_count();
    R.resize(n);
    double rmax = 0.0;
    for (int r = 0; r < n; ++r) {
      const int p = dom.unknown_node(r);
      const double u = values[p];
      if (!(u > 0.0)) return std::numeric_limits<double>::infinity();
      const auto& st = dom.stencil(r);
      const auto jet = jet_from_derivs(u, stencil_apply(st, values.data(), eps_), st.x_slot, st.y_slot);
      const double w = std::sqrt(1.0 + jet.Du.squaredNorm());
      const Mat<2> gu = gamma_matrix<2>(jet.Du).upper;
      const Mat<2> Av = (Mat<2>::Identity() + u * gu * jet.D2u * gu) / w;
      const auto ev = sym_eigen<2>(Av).values;
      if (!(ev[0] > 0.0)) return std::numeric_limits<double>::infinity();
      const std::array<double, 2> k{ev[0], ev[1]};
      R[r] = eval_f(spec_, k) - src(p, u);
      rmax = std::max(rmax, std::abs(R[r]));
    }
    return rmax;
  }

  NewtonOutcome solve(std::vector<double>& values, const SourceTerm& src) {
    const auto& dom = *domain_;
    const int n = dom.unknown_count();
    NewtonOutcome out;
    std::vector<double> R, Rt, trial;
    double rinf = residual(values, src, R);
    if (!std::isfinite(rinf)) {
      out.reason = "start iterate is not admissible";
      return out;
    }
    double r2 = norm2(R);
    int stagnant = 0;
    Eigen::VectorXd rhs(n);
    for (int it = 0;; ++it) {
      out.iterations = it;
      out.residual = rinf;
      if (rinf <= sched_.newton_tol) {
        out.converged = true;
        return out;
      }
      if (it >= sched_.max_newton) {
        out.reason = "Newton iteration cap reached";
        return out;
      }
      if (factor_state_ == FactorState::none || !sched_.reuse_jacobian) factorize(values, src);
      for (int r = 0; r < n; ++r) rhs[r] = -R[r] / values[dom.unknown_node(r)];
      const Eigen::VectorXd delta = lu_.solve(rhs);
      ++counters_.linear_solves;
      ++counters_.newton_iterations;

      double alpha = 1.0;
      bool accepted = false;
      double rinf_t = 0.0, r2_t = 0.0;
      while (alpha >= sched_.min_step) {
        trial = values;
        for (int r = 0; r < n; ++r) trial[dom.unknown_node(r)] += alpha * delta[r];
        rinf_t = residual(trial, src, Rt);
        if (std::isfinite(rinf_t)) {
          r2_t = norm2(Rt);
          if (r2_t < (1.0 - 1e-4 * alpha) * r2) {
            accepted = true;
            break;
          }
        }
        alpha *= sched_.damping;
      }
      if (!accepted) {
        if (factor_state_ == FactorState::stale) {
          factor_state_ = FactorState::none;  // retry with a fresh Jacobian
          continue;
        }
        out.reason = "line search failed to keep admissibility and decrease the residual";
        return out;
      }
      const double ratio = r2_t / r2;
      values.swap(trial);
      R.swap(Rt);
      rinf = rinf_t, r2 = r2_t;
      stagnant = ratio > 0.99 ? stagnant + 1 : 0;
      if (stagnant >= 5) {
        out.reason = "stagnation: residual reduction below 1% over 5 damped steps";
        out.residual = rinf;
        return out;
      }
      factor_state_ = (alpha == 1.0 && ratio < 0.1) ? FactorState::stale : FactorState::none;
    }
  }

private:
  enum class FactorState { none, stale };

  static double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  }

  void build_pattern() {
    const auto& dom = *domain_;
    const int n = dom.unknown_count();
    std::vector<Eigen::Triplet<double>> trips;
    for (int r = 0; r < n; ++r) {
      const auto& st = dom.stencil(r);
      for (int t = 0; t < st.n_terms; ++t) {
        const int col = dom.unknown_id(st.terms[t].node);
        if (col >= 0) trips.emplace_back(r, col, 1.0);
      }
    }
    J_.resize(n, n);
    J_.setFromTriplets(trips.begin(), trips.end());
    J_.makeCompressed();
    slot_.assign(static_cast<size_t>(n) * 9, -1);
    for (int r = 0; r < n; ++r) {
      const auto& st = dom.stencil(r);
      for (int t = 0; t < st.n_terms; ++t) {
        const int col = dom.unknown_id(st.terms[t].node);
        if (col < 0) continue;
        for (int idx = J_.outerIndexPtr()[col]; idx < J_.outerIndexPtr()[col + 1]; ++idx)
          if (J_.innerIndexPtr()[idx] == r) slot_[static_cast<size_t>(r) * 9 + t] = idx;
      }
    }
    lu_.analyzePattern(J_);
  }

  void factorize(const std::vector<double>& values, const SourceTerm& src) {
    const auto& dom = *domain_;
    const int n = dom.unknown_count();
    double* val = J_.valuePtr();
    std::fill(val, val + J_.nonZeros(), 0.0);
    for (int r = 0; r < n; ++r) {
      const int p = dom.unknown_node(r);
      const auto& st = dom.stencil(r);
      const auto jet = jet_from_derivs(values[p], stencil_apply(st, values.data(), eps_), st.x_slot, st.y_slot);
      const auto rc = detail::row_coefficients(jet, st.x_slot, st.y_slot, spec_, src(p, values[p]), src.slope);
      for (int t = 0; t < st.n_terms; ++t) {
        const int idx = slot_[static_cast<size_t>(r) * 9 + t];
        if (idx < 0) continue;
        double v = 0.0;
        for (int k = 0; k < kNumDeriv; ++k) v += rc.c[k] * st.terms[t].w[k];
        if (st.terms[t].node == p) v += rc.zero_order;
        val[idx] += v;
      }
    }
    lu_.factorize(J_);
    ++counters_.factorizations;
    if (lu_.info() != Eigen::Success) throw ConvergenceError("sparse LU factorization failed", 0.0, 0.0);
    factor_state_ = FactorState::stale;
  }

  DomainPtr domain_;
  CurvatureFunctionSpec spec_;
  double eps_;
  SolveSchedule sched_;
  Eigen::SparseMatrix<double> J_;
  std::vector<int> slot_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  FactorState factor_state_ = FactorState::none;
  SolverCounters counters_;
};

/// One-parameter family of sources, t in [0, 1].
using ContinuationFamily = std::function<SourceTerm(double t)>;

struct ContinuityOutcome {
  std::vector<double> values;
  int t_steps = 0;
  int bisections = 0;
};

/// Follows the family from t = 0 (where `start` already solves the problem)
/// to t = t_end. A failed step is bisected; below 2^-16 the solve fails with
/// the last valid (t, residual).
inline ContinuityOutcome continuity_solve(NewtonSolver& newton, const std::vector<double>& start,
                                          const ContinuationFamily& family, const SolveSchedule& sched,
                                          double t_end = 1.0) {
  ContinuityOutcome out;
  out.values = start;
  if (t_end <= 0.0) return out;
  constexpr double kMinDt = 1.0 / (1 << 16);
  const double nominal = 1.0 / sched.continuity_steps;
  double t = 0.0, dt = nominal, last_res = 0.0;
  {
    std::vector<double> R;
    last_res = newton.residual(out.values, family(0.0), R);
    if (!std::isfinite(last_res)) throw ConvergenceError("continuity start is not admissible", 0.0, last_res);
    if (last_res > sched.newton_tol) {
      auto res = newton.solve(out.values, family(0.0));
      if (!res.converged) throw ConvergenceError("continuity start does not solve t = 0: " + res.reason, 0.0, res.residual);
    }
  }
  // Secant predictor from the last two accepted points of the path.
  std::vector<double> prev_values;
  double prev_t = -1.0;
  while (t < t_end - 1e-15) {
    const double t_new = std::min(t_end, t + dt);
    std::vector<double> trial = out.values;
    bool predicted = false;
    if (prev_t >= 0.0) {
      const double c = (t_new - t) / (t - prev_t);
      for (size_t i = 0; i < trial.size(); ++i) trial[i] += c * (out.values[i] - prev_values[i]);
      predicted = true;
    }
    auto res = newton.solve(trial, family(t_new));
    if (!res.converged && predicted) {
      trial = out.values;
      res = newton.solve(trial, family(t_new));
    }
    if (res.converged) {
      prev_values.swap(out.values);
      prev_t = t;
      out.values.swap(trial);
      t = t_new;
      last_res = res.residual;
      ++out.t_steps;
      dt = std::min(nominal, 2.0 * dt);
    } else {
      dt *= 0.5;
      ++out.bisections;
      newton.invalidate();
      if (dt < kMinDt) {
        std::ostringstream os;
        os << "continuity step below minimum at t = " << t << " (" << res.reason << ")";
        throw ConvergenceError(os.str(), t, last_res);
      }
    }
  }
  return out;
}

struct OuterStep {
  int k = 0;
  double max_increase = 0.0;  ///< max (u_{k+1} - u_k)
  double min_increase = 0.0;  ///< min (u_{k+1} - u_k)
  int min_node = -1;          ///< active index of the minimum
  int t_steps = 0;
  int bisections = 0;
};

struct FixedEpsilonResult {
  SurfaceState state;
  std::vector<OuterStep> history;
  int outer_iterations = 0;
  bool warm_started = false;
  double warm_start_blend = 0.0;
  SolverCounters counters;
  std::vector<int> sign_violation_counts;  ///< per sampled outer step
  double min_outer_increase = 0.0;         ///< min over all outer steps
};

namespace detail {

inline double max_abs_diff(const GridDomain& dom, const std::vector<double>& a, const std::vector<double>& b,
                           double* min_diff = nullptr, int* min_node = nullptr) {
  double m = 0.0, lo = std::numeric_limits<double>::infinity();
  int at = -1;
  for (int p : dom.unknowns()) {
    const double d = a[p] - b[p];
    m = std::max(m, std::abs(d));
    if (d < lo) lo = d, at = p;
  }
  if (min_diff) *min_diff = lo;
  if (min_node) *min_node = at;
  return m;
}

inline std::vector<double> node_F(NewtonSolver& newton, const std::vector<double>& values, double sigma) {
  SourceTerm s;
  s.sigma = sigma;
  std::vector<double> R;
  newton.residual(values, s, R);
  for (double& r : R) r += sigma;
  return R;  // unknown-indexed
}

}  // namespace detail

/// Height bound check performed before a solve: the lower barrier at the
/// deepest node must not exceed the upper barrier.
inline void require_barriers(const GridDomain& dom, double sigma, double epsilon) {
  double dmax = 0.0;
  for (const auto& n : dom.nodes()) dmax = std::max(dmax, -n.d);
  const double lo = epsilon * sigma / (1 + sigma) + dmax * std::sqrt((1 - sigma) / (1 + sigma));
  const double hi = 0.5 * dom.diameter() * std::sqrt((1 - sigma) / (1 + sigma)) + epsilon;
  if (lo > hi) throw ArgumentError("epsilon too large: height barriers are inconsistent");
}

/// Solves F(Av[u]) = sigma, u = eps on the boundary, by the monotone outer
/// iteration from u_0 = eps (or from a warm start that is a subsolution).
inline FixedEpsilonResult solve_fixed_epsilon(DomainPtr domain, const SolveSchedule& sched, double epsilon,
                                              const SurfaceState* warm = nullptr) {
  sched.validate();
  if (!(epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
  const auto& dom = *domain;
  require_barriers(dom, sched.sigma, epsilon);
  const double M = sched.source_slope.value_or(1.0 / epsilon);
  NewtonSolver newton(domain, sched.spec, epsilon, sched);
  FixedEpsilonResult result;

  // Starting field: the horosphere u = eps, or eps + lambda (u_prev - eps_prev)
  // for the first lambda in 1, 1/2, ... that is admissible with f >= sigma.
  std::vector<double> u0(dom.active_count(), epsilon);
  if (warm && warm->domain.get() == domain.get()) {
    for (double lambda = 1.0; lambda >= 1.0 / 64; lambda *= 0.5) {
      std::vector<double> cand(dom.active_count(), epsilon);
      for (int p : dom.unknowns()) cand[p] = std::max(epsilon, epsilon + lambda * (warm->u[p] - warm->epsilon));
      std::vector<double> R;
      SourceTerm s;
      s.sigma = sched.sigma;
      if (!std::isfinite(newton.residual(cand, s, R))) continue;
      if (*std::min_element(R.begin(), R.end()) < 0.0) continue;
      u0 = std::move(cand);
      result.warm_started = true;
      result.warm_start_blend = lambda;
      break;
    }
  }

  const std::vector<double> F0 = detail::node_F(newton, u0, sched.sigma);
  std::vector<double> offset0(dom.active_count(), 0.0);
  for (int r = 0; r < dom.unknown_count(); ++r) offset0[dom.unknown_node(r)] = F0[r] - sched.sigma;

  // k = 0: Psi_t = sigma + (1 - t)(f[u_0] - sigma) + M (u - u_0); for u_0 = eps
  // this is t (sigma - 1) + u / eps.
  auto family0 = [&](double t) {
    SourceTerm s;
    s.sigma = sched.sigma;
    s.slope = M;
    s.anchor = u0;
    s.offset = offset0;
    for (double& o : s.offset) o *= (1.0 - t);
    return s;
  };

  std::vector<double> prev = u0;
  auto step = continuity_solve(newton, u0, family0, sched);
  std::vector<double> cur = std::move(step.values);
  auto record = [&](int k, const std::vector<double>& next, const std::vector<double>& before, int ts, int bis) {
    OuterStep os;
    os.k = k;
    os.max_increase = detail::max_abs_diff(dom, next, before, &os.min_increase, &os.min_node);
    os.t_steps = ts, os.bisections = bis;
    result.history.push_back(os);
    return os;
  };
  OuterStep last = record(0, cur, prev, step.t_steps, step.bisections);

  int k = 1;
  while (last.max_increase > sched.monotone_tol) {
    if (k > sched.max_outer) {
      std::vector<double> hist;
      for (const auto& h : result.history) hist.push_back(h.max_increase);
      throw ConvergenceError("outer iteration cap reached", 1.0, last.max_increase, hist);
    }
    std::vector<double> next;
    int ts = 0, bis = 0;
    if (detail::max_abs_diff(dom, cur, prev) == 0.0) {
      next = cur;  // constant family
    } else {
      auto family = [&](double t) {
        SourceTerm s;
        s.sigma = sched.sigma;
        s.slope = M;
        s.anchor.resize(dom.active_count());
        for (int p = 0; p < dom.active_count(); ++p) s.anchor[p] = t * cur[p] + (1.0 - t) * prev[p];
        return s;
      };
      auto out = continuity_solve(newton, cur, family, sched);
      next = std::move(out.values);
      ts = out.t_steps, bis = out.bisections;
    }
    last = record(k, next, cur, ts, bis);
    prev = std::move(cur);
    cur = std::move(next);
    ++k;
  }

  // Limit problem F = sigma from the last monotone iterate.
  {
    SourceTerm target;
    target.sigma = sched.sigma;
    std::vector<double> polished = cur;
    newton.invalidate();
    const auto res = newton.solve(polished, target);
    if (!res.converged)
      throw ConvergenceError("final solve of the limit problem failed: " + res.reason, 1.0, res.residual);
    record(k, polished, cur, 0, 0);
    cur = std::move(polished);
  }

  result.outer_iterations = k;
  result.counters = newton.counters();
  result.min_outer_increase = std::numeric_limits<double>::infinity();
  for (const auto& h : result.history) result.min_outer_increase = std::min(result.min_outer_increase, h.min_increase);
  result.state = make_surface_state(domain, ScalarField{cur}, epsilon, sched.spec, sched.sigma);
  return result;
}

}  // namespace hcurv
