#pragma once

// Barrier surfaces and a priori estimates, evaluated as diagnostics on
// height fields and converged states. Nothing here mutates a state.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hypercurv/errors.hpp"
#include "hypercurv/grid.hpp"
#include "hypercurv/hypgeom.hpp"
#include "hypercurv/surface.hpp"

namespace hcurv {

/// Euclidean sphere of radius R centred at (center, -sigma R); its upper part
/// has all hyperbolic principal curvatures equal to sigma.
struct EquidistanceSphere {
  std::array<double, 2> center{0.0, 0.0};
  double R = 1.0;
  double sigma = 0.5;

  double rho2(double x, double y) const {
    const double dx = x - center[0], dy = y - center[1];
    return dx * dx + dy * dy;
  }
  bool covers(double x, double y) const { return rho2(x, y) < R * R; }

  double height(double x, double y) const {
    const double q = R * R - rho2(x, y);
    if (!(q > 0.0)) throw GeometryError("equidistance sphere: point outside the sphere's shadow");
    return std::sqrt(q) - sigma * R;
  }

  /// Exact jet: Du = -(x - c)/s, D2u = -I/s - (x - c)(x - c)^T / s^3 with s = sqrt(R^2 - |x - c|^2).
  PointJet<2> jet(double x, double y) const {
    const double q = R * R - rho2(x, y);
    if (!(q > 0.0)) throw GeometryError("equidistance sphere: point outside the sphere's shadow");
    const double s = std::sqrt(q);
    Vec<2> p(x - center[0], y - center[1]);
    PointJet<2> j;
    j.u = s - sigma * R;
    j.Du = -p / s;
    j.D2u = -Mat<2>::Identity() / s - p * p.transpose() / (s * s * s);
    return j;
  }
};

/// Sphere with u = epsilon on the circle |x - center| = r_boundary:
/// R = (eps sigma + sqrt(eps^2 + (1 - sigma^2) r^2)) / (1 - sigma^2).
inline EquidistanceSphere equidistance_cap(double r_boundary, double sigma, double epsilon,
                                           std::array<double, 2> center = {0.0, 0.0}) {
  if (!(sigma > 0.0 && sigma < 1.0)) throw GeometryError("equidistance_cap: sigma must lie in (0, 1)");
  if (!(r_boundary > 0.0)) throw GeometryError("equidistance_cap: boundary radius must be positive");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw GeometryError("equidistance_cap: epsilon must be >= 0");
  const double one_m = 1.0 - sigma * sigma;
  EquidistanceSphere s;
  s.center = center;
  s.sigma = sigma;
  s.R = (epsilon * sigma + std::sqrt(epsilon * epsilon + one_m * r_boundary * r_boundary)) / one_m;
  return s;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v, double slack = 0.0) const { return v >= lo - slack && v <= hi + slack; }
};

/// Height bounds at distance d from the boundary for 0 <= sigma1 <= sigma2 <= 1.
inline Interval height_bounds(double d, double L, double sigma1, double sigma2, double epsilon) {
  if (!(0.0 <= sigma1 && sigma1 <= sigma2 && sigma2 <= 1.0))
    throw ArgumentError("height_bounds: need 0 <= sigma1 <= sigma2 <= 1");
  Interval b;
  b.lo = epsilon * sigma2 / (1.0 + sigma2) + d * std::sqrt((1.0 - sigma2) / (1.0 + sigma2));
  b.hi = 0.5 * L * std::sqrt((1.0 - sigma1) / (1.0 + sigma1)) + epsilon;
  return b;
}

/// Interval for nu^{n+1} on the boundary; r1 (exterior) and r2 (interior)
/// sphere radii, +inf allowed.
inline Interval boundary_normal_bounds(double sigma1, double sigma2, double epsilon, double r1, double r2) {
  if (!(r1 > 0.0 && r2 > 0.0)) throw ArgumentError("boundary_normal_bounds: radii must be positive");
  Interval b;
  b.lo = sigma1 - epsilon * std::sqrt(1.0 - sigma1 * sigma1) / r1 - epsilon * epsilon * (1.0 + sigma1) / (r1 * r1);
  b.hi = sigma2 + epsilon * std::sqrt(1.0 - sigma2 * sigma2) / r2 + epsilon * epsilon * (1.0 - sigma2) / (r2 * r2);
  return b;
}

struct GradientMaxPrinciple {
  double margin = 0.0;         ///< boundary side minus interior max of e^u w
  double boundary_max = 0.0;
  double interior_max = 0.0;
  int worst_node = -1;         ///< active index of the interior maximum
};

/// e^u w over the interior is bounded by its boundary maximum. The boundary
/// side uses the reconstructed boundary gradients (u = eps there).
inline GradientMaxPrinciple gradient_max_principle_check(const SurfaceState& state) {
  const auto& dom = *state.domain;
  GradientMaxPrinciple g;
  g.boundary_max = std::exp(state.epsilon);  // at least e^eps * 1
  for (const auto& b : state.boundary) g.boundary_max = std::max(g.boundary_max, std::exp(state.epsilon) * b.w);
  g.interior_max = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < dom.unknown_count(); ++k) {
    const int p = dom.unknown_node(k);
    const double v = std::exp(state.u[p]) * state.geometry[k].w;
    if (v > g.interior_max) g.interior_max = v, g.worst_node = p;
  }
  g.margin = g.boundary_max - g.interior_max;
  return g;
}

struct CurvatureRatio {
  double max_value = 0.0;
  int node = -1;              ///< active index of the maximum
  bool at_boundary = false;   ///< maximum attained at a near-boundary node
  std::vector<int> hypothesis_violations;  ///< active indices with nu < 2a
};

/// M(x) = kappa_max / (u^2 (nu - a)) over unknown nodes with nu > a.
inline CurvatureRatio curvature_ratio_M(const SurfaceState& state, double a) {
  if (!(a > 0.0 && a < 0.5)) throw ArgumentError("curvature_ratio_M: a must lie in (0, 1/2)");
  const auto& dom = *state.domain;
  CurvatureRatio cr;
  cr.max_value = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < dom.unknown_count(); ++k) {
    const int p = dom.unknown_node(k);
    const auto& g = state.geometry[k];
    if (g.nu < 2.0 * a) cr.hypothesis_violations.push_back(p);
    if (!(g.nu > a)) continue;
    const double u = state.u[p];
    const double m = g.kappa_max / (u * u * (g.nu - a));
    if (m > cr.max_value) {
      cr.max_value = m;
      cr.node = p;
      cr.at_boundary = dom.nodes()[p].kind == NodeKind::near_boundary;
    }
  }
  return cr;
}

/// gamma(y) = 2y^3 - 2a y^2 - 2y + 3a.
template <class T>
T gamma_poly(const T& y, const T& a) {
  return T(2) * y * y * y - T(2) * a * y * y - T(2) * y + T(3) * a;
}

template <class T>
T gamma_at_critical_closed(const T& a) {
  using std::pow;
  using std::sqrt;
  return T(7) * a / T(3) - T(4) * a * a * a / T(27) - T(4) * pow(a * a + T(3), T(1.5)) / T(27);
}

struct GammaAnalysis {
  double a = 0.0;
  double y_star = 0.0;
  double gamma_cubic = 0.0;   ///< gamma(y*) by direct evaluation
  double gamma_closed = 0.0;  ///< closed form in a
  bool positive = false;
};

/// Interior critical point y* = (a + sqrt(a^2 + 3)) / 3 of gamma on (a, 1) and
/// gamma(y*) two ways. `gamma` may be replaced (negative-control fixtures).
template <class GammaFn>
GammaAnalysis gamma_analysis(double a, GammaFn&& gamma) {
  if (!(a > 0.0 && a < 1.0)) throw ArgumentError("gamma_analysis: a must lie in (0, 1)");
  GammaAnalysis g;
  g.a = a;
  g.y_star = (a + std::sqrt(a * a + 3.0)) / 3.0;
  g.gamma_cubic = gamma(g.y_star, a);
  g.gamma_closed = gamma_at_critical_closed<double>(a);
  g.positive = g.gamma_closed > 0.0;
  return g;
}

inline GammaAnalysis gamma_analysis(double a) {
  return gamma_analysis(a, [](double y, double aa) { return gamma_poly<double>(y, aa); });
}

/// 32 sigma / (sigma^2 - 1/8) when sigma^2 > 1/8; nullopt otherwise.
inline std::optional<double> kappa_bound_sigma(double sigma) {
  const double eps0 = 0.5 * (sigma * sigma - 0.125);
  if (!(eps0 > 0.0)) return std::nullopt;
  return 16.0 * sigma / eps0;
}

struct DiagnosticCheck {
  std::string name;
  bool pass = true;
  bool hard = true;          ///< informational checks never fail a run
  double value = 0.0;        ///< the raw quantity
  double margin = 0.0;       ///< signed distance to failure (>= -tolerance passes)
  double tolerance = 0.0;
  int node = -1;             ///< worst active node, -1 if none
  double x = 0.0, y = 0.0;
  std::string note;
};

struct DiagnosticsReport {
  double epsilon = 0.0;
  double sigma = 0.0;
  double h = 0.0;
  std::vector<DiagnosticCheck> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return !c.hard || c.pass; });
  }
  const DiagnosticCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

struct DiagnosticsOptions {
  double newton_tol = 1e-9;
  std::optional<double> ratio_a;  ///< defaults to sigma / 2
  /// extra width for the boundary normal interval, in units of h
  double normal_slack_h = 3.0;
  double gradient_slack_h = 5.0;
};

namespace detail {
inline void locate(DiagnosticCheck& c, const GridDomain& dom, int node) {
  c.node = node;
  if (node >= 0) c.x = dom.nodes()[node].x, c.y = dom.nodes()[node].y;
}
}  // namespace detail

/// Every estimate evaluated on a converged state.
inline DiagnosticsReport diagnose(const SurfaceState& state, const DiagnosticsOptions& opt = {}) {
  const auto& dom = *state.domain;
  const double h = dom.h();
  const double sigma = state.sigma;
  const double slack = std::max(2.0 * h, 1e-6);
  DiagnosticsReport rep;
  rep.epsilon = state.epsilon, rep.sigma = sigma, rep.h = h;

  {  // heights between the barriers
    DiagnosticCheck c{"height_bounds"};
    c.tolerance = slack;
    c.margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < dom.unknown_count(); ++k) {
      const int p = dom.unknown_node(k);
      const auto b = height_bounds(std::max(0.0, -dom.nodes()[p].d), dom.diameter(), sigma, sigma, state.epsilon);
      const double m = std::min(state.u[p] - b.lo, b.hi - state.u[p]);
      if (m < c.margin) c.margin = m, c.value = state.u[p], detail::locate(c, dom, p);
    }
    c.pass = c.margin >= -c.tolerance;
    rep.checks.push_back(c);
  }
  {
    const auto g = gradient_max_principle_check(state);
    DiagnosticCheck c{"gradient_max_principle"};
    c.tolerance = opt.gradient_slack_h * h;
    c.value = g.interior_max;
    c.margin = g.margin;
    detail::locate(c, dom, g.worst_node);
    c.pass = c.margin >= -c.tolerance;
    rep.checks.push_back(c);
  }
  {  // boundary w approaches 1/sigma as eps -> 0; the rate is checked across a ladder
    DiagnosticCheck c{"boundary_w"};
    c.hard = false;
    c.note = "max |w - 1/sigma| over boundary samples; O(eps) decay is a ladder trend";
    for (const auto& b : state.boundary) {
      const double e = std::abs(b.w - 1.0 / sigma);
      if (e >= c.value) c.value = e, detail::locate(c, dom, b.node), c.x = b.x, c.y = b.y;
    }
    c.margin = c.value;
    rep.checks.push_back(c);
  }
  {
    const auto radii = dom.sphere_radii();
    const auto iv = boundary_normal_bounds(sigma, sigma, state.epsilon, radii.exterior, radii.interior);
    DiagnosticCheck c{"boundary_nu"};
    c.tolerance = opt.normal_slack_h * h;
    c.margin = std::numeric_limits<double>::infinity();
    for (const auto& b : state.boundary) {
      const double m = std::min(b.nu - iv.lo, iv.hi - b.nu);
      if (m < c.margin) c.margin = m, c.value = b.nu, detail::locate(c, dom, b.node), c.x = b.x, c.y = b.y;
    }
    c.pass = c.margin >= -c.tolerance;
    c.note = "interval [" + std::to_string(iv.lo) + ", " + std::to_string(iv.hi) + "]";
    rep.checks.push_back(c);
  }
  {
    const double a = opt.ratio_a.value_or(0.5 * sigma);
    const auto cr = curvature_ratio_M(state, a);
    DiagnosticCheck c{"curvature_ratio_M"};
    c.hard = false;
    c.value = c.margin = cr.max_value;
    detail::locate(c, dom, cr.node);
    c.note = std::string(cr.at_boundary ? "maximum at a near-boundary node" : "maximum at an interior node") +
             "; nodes with nu < 2a: " + std::to_string(cr.hypothesis_violations.size());
    rep.checks.push_back(c);
  }
  {
    DiagnosticCheck c{"kappa_bound"};
    c.value = state.max_kappa();
    for (int k = 0; k < dom.unknown_count(); ++k)
      if (state.geometry[k].kappa_max == c.value) detail::locate(c, dom, dom.unknown_node(k));
    if (const auto bound = kappa_bound_sigma(sigma)) {
      c.tolerance = 0.0;
      c.margin = *bound - c.value;
      c.pass = c.margin >= 0.0;
      c.note = "bound " + std::to_string(*bound);
    } else {
      c.hard = false;
      c.note = "not applicable: sigma^2 <= 1/8";
    }
    rep.checks.push_back(c);
  }
  {
    DiagnosticCheck c{"residual"};
    c.tolerance = 2.0 * opt.newton_tol;
    c.value = state.residual_inf();
    c.margin = c.tolerance - c.value;
    c.pass = c.value <= c.tolerance;
    rep.checks.push_back(c);
  }
  {  // scale-invariant boundary second-derivative quantity
    DiagnosticCheck c{"boundary_u_hessian"};
    c.hard = false;
    c.note = "max over near-boundary nodes of u |D2u|";
    for (int k = 0; k < dom.unknown_count(); ++k) {
      const int p = dom.unknown_node(k);
      if (dom.nodes()[p].kind != NodeKind::near_boundary) continue;
      const auto& j = state.geometry[k].jet;
      const double v = j.u * j.D2u.norm();
      if (v > c.value) c.value = v, detail::locate(c, dom, p);
    }
    c.margin = c.value;
    rep.checks.push_back(c);
  }
  return rep;
}

}  // namespace hcurv
