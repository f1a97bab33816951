#pragma once

// A height field on a GridDomain together with its derived pointwise geometry.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "hypercurv/grid.hpp"
#include "hypercurv/hypgeom.hpp"
#include "hypercurv/symfunc.hpp"

namespace hcurv {

using DomainPtr = std::shared_ptr<const GridDomain>;

inline DomainPtr make_domain(const Shape& s, double h) { return std::make_shared<const GridDomain>(s, h); }

struct NodeGeometry {
  PointJet<2> jet;
  double w = 1.0;
  double nu = 1.0;  ///< nu^{n+1} = 1/w
  double kappa_min = 0.0;
  double kappa_max = 0.0;
  double F = std::numeric_limits<double>::quiet_NaN();  ///< f(kappa) = u G
  bool admissible = false;
};

/// Gradient reconstructed at a boundary intercept (constant boundary data:
/// the gradient there is normal to the boundary).
struct BoundaryGeometry {
  int node = -1;
  double x = 0.0, y = 0.0;
  double slope = 0.0;  ///< |Du| at the boundary point
  double w = 1.0;
  double nu = 1.0;
};

inline NodeGeometry evaluate_node(const PointJet<2>& jet, const CurvatureFunctionSpec& spec) {
  NodeGeometry g;
  g.jet = jet;
  const auto cd = vertical_curvature_data<2>(jet);
  g.w = cd.w;
  g.nu = cd.nu_vertical;
  g.kappa_min = cd.kappa[0];
  g.kappa_max = cd.kappa[1];
  g.admissible = jet.u > 0.0 && g.kappa_min > 0.0;
  if (g.admissible) {
    const std::array<double, 2> k{cd.kappa[0], cd.kappa[1]};
    g.F = eval_f(spec, k);
  }
  return g;
}

inline std::vector<BoundaryGeometry> boundary_geometry(const GridDomain& domain, const ScalarField& u,
                                                       double boundary_value) {
  std::vector<BoundaryGeometry> out;
  for (const auto& bs : domain.boundary_samples()) {
    const double n_dot_e = bs.normal[0] * bs.axis[0] + bs.normal[1] * bs.axis[1];
    if (n_dot_e < 0.7) continue;  // only axes well aligned with the normal
    double deriv = bs.boundary_weight * boundary_value;
    for (int a = 0; a < 3; ++a)
      if (bs.nodes[a] >= 0) deriv += bs.weights[a] * u[bs.nodes[a]];
    BoundaryGeometry bg;
    bg.node = bs.node;
    bg.x = bs.x, bg.y = bs.y;
    bg.slope = std::abs(deriv / n_dot_e);
    bg.w = std::sqrt(1.0 + bg.slope * bg.slope);
    bg.nu = 1.0 / bg.w;
    out.push_back(bg);
  }
  return out;
}

struct SurfaceState {
  DomainPtr domain;
  CurvatureFunctionSpec spec;
  double epsilon = 0.0;  ///< boundary value
  double sigma = 0.0;    ///< target curvature, used for the residual
  ScalarField u;
  std::vector<NodeGeometry> geometry;  ///< per unknown
  std::vector<BoundaryGeometry> boundary;

  bool admissible() const {
    return std::all_of(geometry.begin(), geometry.end(), [](const NodeGeometry& g) { return g.admissible; });
  }

  /// max |u G - sigma| over unknown nodes (+inf if inadmissible somewhere).
  double residual_inf() const {
    double r = 0.0;
    for (const auto& g : geometry) {
      if (!g.admissible) return std::numeric_limits<double>::infinity();
      r = std::max(r, std::abs(g.F - sigma));
    }
    return r;
  }

  double max_kappa() const {
    double m = 0.0;
    for (const auto& g : geometry) m = std::max(m, g.kappa_max);
    return m;
  }
  double min_kappa() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& g : geometry) m = std::min(m, g.kappa_min);
    return m;
  }
  double max_w() const {
    double m = 0.0;
    for (const auto& g : geometry) m = std::max(m, g.w);
    return m;
  }
};

inline SurfaceState make_surface_state(DomainPtr domain, ScalarField u, double epsilon,
                                       const CurvatureFunctionSpec& spec, double sigma) {
  SurfaceState s;
  s.domain = std::move(domain);
  s.spec = spec;
  s.epsilon = epsilon;
  s.sigma = sigma;
  s.u = std::move(u);
  const auto& dom = *s.domain;
  s.geometry.reserve(dom.unknown_count());
  for (int k = 0; k < dom.unknown_count(); ++k)
    s.geometry.push_back(evaluate_node(fd_jet(s.u, dom, dom.unknown_node(k), epsilon), spec));
  s.boundary = boundary_geometry(dom, s.u, epsilon);
  return s;
}

}  // namespace hcurv
