#pragma once

// Rotationally symmetric reference solutions. For u = u(r) the principal
// curvatures are
//   kappa_rad = u u'' / w^3 + 1/w,   kappa_tan = u u' / (r w) + 1/w,
// and f(kappa_rad, kappa_tan) = sigma is solved for kappa_rad in closed form,
// giving a second-order ODE integrated by fixed-step RK4 and shot on one
// parameter by bisection. Deliberately independent of the 2D code path.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "hypercurv/errors.hpp"
#include "hypercurv/symfunc.hpp"

namespace hcurv::oracle {

struct RadialCurvatures {
  double radial = 0.0;
  double tangential = 0.0;
};

inline RadialCurvatures radial_curvatures(double u, double up, double upp, double r) {
  if (!(u > 0.0)) throw ArgumentError("radial_curvatures: u must be positive");
  if (!(r >= 0.0)) throw ArgumentError("radial_curvatures: r must be >= 0");
  const double w = std::sqrt(1.0 + up * up);
  RadialCurvatures k;
  k.radial = u * upp / (w * w * w) + 1.0 / w;
  k.tangential = r > 0.0 ? u * up / (r * w) + 1.0 / w : u * upp + 1.0 / w;
  return k;
}

/// f(kr, kt) for the n = 2 quotients; NaN outside the positive cone.
inline double radial_f(int k, int l, double kr, double kt) {
  if (!(kr > 0.0 && kt > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  if (k == 1 && l == 0) return 0.5 * (kr + kt);
  if (k == 2 && l == 0) return std::sqrt(kr * kt);
  if (k == 2 && l == 1) return 2.0 * kr * kt / (kr + kt);
  throw ArgumentError("oracle: only n = 2 quotients (1,0), (2,0), (2,1) are supported");
}

/// The kappa_rad with f(kappa_rad, kt) = sigma; NaN if none is positive.
inline double solve_radial_kappa(int k, int l, double sigma, double kt) {
  double kr = std::numeric_limits<double>::quiet_NaN();
  if (k == 1 && l == 0) {
    kr = 2.0 * sigma - kt;
  } else if (k == 2 && l == 0) {
    kr = sigma * sigma / kt;
  } else if (k == 2 && l == 1) {
    const double den = 2.0 * kt - sigma;
    if (den > 0.0) kr = sigma * kt / den;
  } else {
    throw ArgumentError("oracle: only n = 2 quotients (1,0), (2,0), (2,1) are supported");
  }
  return (kr > 0.0 && kt > 0.0) ? kr : std::numeric_limits<double>::quiet_NaN();
}

struct Disk {
  double radius = 0.78;
};
struct Annulus {
  double r_in = 0.5;
  double r_out = 1.0;
};
using RadialDomain = std::variant<Disk, Annulus>;

struct RadialProfile {
  std::vector<double> r, u, up, upp;
  double shooting_parameter = 0.0;  ///< u(0) for disks, u'(r_in) for annuli
  double boundary_error = 0.0;      ///< max |u - eps| at the boundary radii
  double max_residual = 0.0;        ///< max |f(kappa) - sigma| on the grid

  /// Cubic Hermite interpolation; clamps to the profile's radial range.
  double operator()(double rr) const {
    if (r.empty()) throw ArgumentError("empty radial profile");
    rr = std::clamp(rr, r.front(), r.back());
    auto it = std::upper_bound(r.begin(), r.end(), rr);
    size_t i = static_cast<size_t>(std::max<std::ptrdiff_t>(0, (it - r.begin()) - 1));
    if (i + 1 >= r.size()) i = r.size() - 2;
    const double h = r[i + 1] - r[i];
    const double t = (rr - r[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * u[i] + (t3 - 2 * t2 + t) * h * up[i] + (-2 * t3 + 3 * t2) * u[i + 1] +
           (t3 - t2) * h * up[i + 1];
  }
  double max_u() const { return *std::max_element(u.begin(), u.end()); }
};

namespace detail {

struct Rhs {
  int k, l;
  double sigma;
  // returns false on breakdown (u <= 0 or no admissible kappa_rad)
  bool operator()(double r, double u, double p, double& dp) const {
    if (!(u > 0.0)) return false;
    const double w = std::sqrt(1.0 + p * p);
    if (r == 0.0) {  // symmetric limit, both curvatures equal sigma
      dp = (sigma - 1.0) / u;
      return true;
    }
    const double kt = u * p / (r * w) + 1.0 / w;
    const double kr = solve_radial_kappa(k, l, sigma, kt);
    if (!std::isfinite(kr)) return false;
    dp = (kr - 1.0 / w) * w * w * w / u;
    return std::isfinite(dp);
  }
};

enum class Ending { completed, breakdown };

struct Trajectory {
  Ending ending = Ending::completed;
  double r_end = 0.0, u_end = 0.0, p_end = 0.0;
  RadialProfile profile;
};

inline Trajectory integrate(const Rhs& f, double r0, double r1, double u0, double p0, int steps, bool keep) {
  Trajectory tr;
  const double h = (r1 - r0) / steps;
  double r = r0, u = u0, p = p0;
  auto push = [&](double acc) {
    if (!keep) return;
    tr.profile.r.push_back(r), tr.profile.u.push_back(u), tr.profile.up.push_back(p), tr.profile.upp.push_back(acc);
  };
  double a0 = 0.0;
  if (!f(r, u, p, a0)) {
    tr.ending = Ending::breakdown;
    tr.r_end = r, tr.u_end = u, tr.p_end = p;
    return tr;
  }
  push(a0);
  for (int i = 0; i < steps; ++i) {
    double k1, k2, k3, k4;
    bool ok = f(r, u, p, k1);
    const double u2 = u + 0.5 * h * p, p2 = p + 0.5 * h * k1;
    ok = ok && f(r + 0.5 * h, u2, p2, k2);
    const double u3 = u + 0.5 * h * p2, p3 = p + 0.5 * h * k2;
    ok = ok && f(r + 0.5 * h, u3, p3, k3);
    const double u4 = u + h * p3, p4 = p + h * k3;
    ok = ok && f(r + h, u4, p4, k4);
    if (!ok) {
      tr.ending = Ending::breakdown;
      tr.r_end = r, tr.u_end = u, tr.p_end = p;
      return tr;
    }
    u += h / 6.0 * (p + 2 * p2 + 2 * p3 + p4);
    p += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    r = (i + 1 == steps) ? r1 : r0 + (i + 1) * h;
    double acc = 0.0;
    if (!f(r, u, p, acc)) {
      tr.ending = Ending::breakdown;
      tr.r_end = r, tr.u_end = u, tr.p_end = p;
      return tr;
    }
    push(acc);
  }
  tr.r_end = r, tr.u_end = u, tr.p_end = p;
  return tr;
}

}  // namespace detail

struct ShootOptions {
  int steps = 4096;
  int bisections = 80;
};

/// Shoots for u = eps on the boundary. Disk: parameter u(0), bracket from the
/// height barriers. Annulus: u(r_in) = eps and parameter u'(r_in), bracket
/// from the boundary-normal interval.
inline RadialProfile shoot(const RadialDomain& domain, const CurvatureFunctionSpec& spec, double sigma,
                           double epsilon, const ShootOptions& opt = {}) {
  if (spec.n != 2) throw ArgumentError("oracle: radial reduction implemented for n = 2");
  if (!(sigma > 0.0 && sigma < 1.0)) throw ArgumentError("oracle: sigma must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ArgumentError("oracle: epsilon must be positive");
  radial_f(spec.k, spec.l, 1.0, 1.0);  // rejects unsupported quotients
  const detail::Rhs rhs{spec.k, spec.l, sigma};
  const double q = std::sqrt((1.0 - sigma) / (1.0 + sigma));

  double r0, r1;
  std::function<detail::Trajectory(double, bool)> run;
  // excess(parameter): > 0 when the profile ends above eps
  std::function<double(const detail::Trajectory&)> excess;
  double lo, hi;
  if (const auto* d = std::get_if<Disk>(&domain)) {
    if (!(d->radius > 0.0)) throw ArgumentError("oracle: disk radius must be positive");
    r0 = 0.0, r1 = d->radius;
    run = [&, r0, r1](double c, bool keep) { return detail::integrate(rhs, r0, r1, c, 0.0, opt.steps, keep); };
    // a profile that breaks down (u <= 0 or curvature leaves the cone) fell short
    excess = [&](const detail::Trajectory& t) {
      return t.ending == detail::Ending::completed ? t.u_end - epsilon : -1.0;
    };
    lo = epsilon * sigma / (1.0 + sigma) + d->radius * q;
    hi = d->radius * q + epsilon;
  } else {
    const auto& a = std::get<Annulus>(domain);
    if (!(a.r_in > 0.0 && a.r_out > a.r_in)) throw ArgumentError("oracle: need 0 < r_in < r_out");
    r0 = a.r_in, r1 = a.r_out;
    run = [&, r0, r1](double s, bool keep) { return detail::integrate(rhs, r0, r1, epsilon, s, opt.steps, keep); };
    // breakdown while still high or rising counts as overshoot
    excess = [&](const detail::Trajectory& t) {
      if (t.ending == detail::Ending::completed) return t.u_end - epsilon;
      return (t.p_end > 0.0 || t.u_end > epsilon) ? 1.0 : -1.0;
    };
    const double sig_ext = std::sqrt(1.0 - sigma * sigma);
    const double nu_hi = std::min(1.0, sigma + epsilon * sig_ext / a.r_in);
    const double nu_lo = std::max(1e-3, sigma - epsilon * sig_ext / a.r_in - epsilon * epsilon * (1 + sigma) / (a.r_in * a.r_in));
    lo = std::sqrt(1.0 / (nu_hi * nu_hi) - 1.0);
    hi = std::sqrt(1.0 / (nu_lo * nu_lo) - 1.0);
  }

  // Widen the bracket until it changes sign.
  std::vector<double> curve;
  double e_lo = excess(run(lo, false)), e_hi = excess(run(hi, false));
  curve.push_back(e_lo), curve.push_back(e_hi);
  for (int i = 0; i < 40 && !(e_lo <= 0.0 && e_hi >= 0.0); ++i) {
    if (e_lo > 0.0) lo *= 0.5, e_lo = excess(run(lo, false)), curve.push_back(e_lo);
    if (e_hi < 0.0) hi *= 1.5, e_hi = excess(run(hi, false)), curve.push_back(e_hi);
  }
  if (!(e_lo <= 0.0 && e_hi >= 0.0))
    throw ConvergenceError("oracle: shooting bracket exhausted without a sign change", 0.0, e_hi, curve);
  for (int i = 0; i < opt.bisections; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double e = excess(run(mid, false));
    (e < 0.0 ? lo : hi) = mid;
  }
  const double param = 0.5 * (lo + hi);
  auto tr = run(param, true);
  if (tr.ending != detail::Ending::completed)
    throw ConvergenceError("oracle: converged shooting parameter gives a broken profile", 1.0, tr.u_end - epsilon);
  auto& prof = tr.profile;
  prof.shooting_parameter = param;
  prof.boundary_error = std::abs(prof.u.back() - epsilon);
  if (std::holds_alternative<Annulus>(domain)) prof.boundary_error = std::max(prof.boundary_error, std::abs(prof.u.front() - epsilon));
  for (size_t i = 0; i < prof.r.size(); ++i) {
    const auto kk = radial_curvatures(prof.u[i], prof.up[i], prof.upp[i], prof.r[i]);
    prof.max_residual = std::max(prof.max_residual, std::abs(radial_f(spec.k, spec.l, kk.radial, kk.tangential) - sigma));
  }
  return std::move(prof);
}

}  // namespace hcurv::oracle
