#pragma once

// Uniform Cartesian discretization of a bounded planar domain described by a
// level set, with cut-cell (Shortley-Weller style) Dirichlet stencils.

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "hypercurv/errors.hpp"
#include "hypercurv/hypgeom.hpp"

namespace hcurv {

struct DiskShape {
  double radius = 1.0;
};
struct AnnulusShape {
  double r_in = 0.5;
  double r_out = 1.0;
};
struct EllipseShape {
  double a = 1.0;  ///< semi-axis along x
  double b = 0.5;  ///< semi-axis along y
};
/// Star-shaped blob rho(theta) = r0 (1 + amplitude cos(lobes theta)).
struct BlobShape {
  double r0 = 0.8;
  double amplitude = 0.1;
  int lobes = 3;
};

using Shape = std::variant<DiskShape, AnnulusShape, EllipseShape, BlobShape>;

namespace shape {

inline std::string name(const Shape& s) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DiskShape>) return "disk";
        else if constexpr (std::is_same_v<T, AnnulusShape>) return "annulus";
        else if constexpr (std::is_same_v<T, EllipseShape>) return "ellipse";
        else return "blob";
      },
      s);
}

inline void validate(const Shape& s) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DiskShape>) {
          if (!(v.radius > 0)) throw ConfigurationError("disk: radius must be positive");
        } else if constexpr (std::is_same_v<T, AnnulusShape>) {
          if (!(v.r_in > 0) || !(v.r_out > v.r_in))
            throw ConfigurationError("annulus: need r_out > r_in > 0");
        } else if constexpr (std::is_same_v<T, EllipseShape>) {
          if (!(v.a > 0) || !(v.b > 0)) throw ConfigurationError("ellipse: semi-axes must be positive");
        } else {
          if (!(v.r0 > 0)) throw ConfigurationError("blob: r0 must be positive");
          if (!(v.amplitude >= 0) || !(v.amplitude < 0.5))
            throw ConfigurationError("blob: amplitude must lie in [0, 0.5)");
          if (v.lobes < 1) throw ConfigurationError("blob: lobes must be >= 1");
        }
      },
      s);
}

/// Level-set function, negative inside.
inline double phi(const Shape& s, double x, double y) {
  return std::visit(
      [x, y](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        const double r = std::hypot(x, y);
        if constexpr (std::is_same_v<T, DiskShape>) return r - v.radius;
        else if constexpr (std::is_same_v<T, AnnulusShape>) return std::max(v.r_in - r, r - v.r_out);
        else if constexpr (std::is_same_v<T, EllipseShape>)
          return (x * x) / (v.a * v.a) + (y * y) / (v.b * v.b) - 1.0;
        else {
          const double th = std::atan2(y, x);
          return r - v.r0 * (1.0 + v.amplitude * std::cos(v.lobes * th));
        }
      },
      s);
}

/// Parametric boundary curve for the closest-point shapes (ellipse, blob):
/// point, first and second derivative at parameter t.
struct CurvePoint {
  double x, y, dx, dy, ddx, ddy;
};

inline CurvePoint curve(const Shape& s, double t) {
  if (const auto* e = std::get_if<EllipseShape>(&s)) {
    const double c = std::cos(t), sn = std::sin(t);
    return {e->a * c, e->b * sn, -e->a * sn, e->b * c, -e->a * c, -e->b * sn};
  }
  const auto& b = std::get<BlobShape>(s);
  const double m = b.lobes;
  const double rho = b.r0 * (1.0 + b.amplitude * std::cos(m * t));
  const double drho = -b.r0 * b.amplitude * m * std::sin(m * t);
  const double ddrho = -b.r0 * b.amplitude * m * m * std::cos(m * t);
  const double c = std::cos(t), sn = std::sin(t);
  return {rho * c,
          rho * sn,
          drho * c - rho * sn,
          drho * sn + rho * c,
          ddrho * c - 2.0 * drho * sn - rho * c,
          ddrho * sn + 2.0 * drho * c - rho * sn};
}

/// Closest-point projection onto a parametric boundary: coarse sampling then
/// Newton on (c(t) - x) . c'(t) = 0, tolerance 1e-10 in the parameter.
inline double closest_point_distance(const Shape& s, double x, double y) {
  constexpr int kSamples = 720;
  double best_t = 0.0, best_d2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kSamples; ++i) {
    const double t = 2.0 * std::numbers::pi * i / kSamples;
    const auto c = curve(s, t);
    const double d2 = (c.x - x) * (c.x - x) + (c.y - y) * (c.y - y);
    if (d2 < best_d2) best_d2 = d2, best_t = t;
  }
  double t = best_t;
  for (int it = 0; it < 50; ++it) {
    const auto c = curve(s, t);
    const double g = (c.x - x) * c.dx + (c.y - y) * c.dy;
    const double gp = c.dx * c.dx + c.dy * c.dy + (c.x - x) * c.ddx + (c.y - y) * c.ddy;
    if (gp <= 0.0) break;
    const double step = g / gp;
    t -= std::clamp(step, -0.05, 0.05);
    if (std::abs(step) < 1e-10) break;
  }
  const auto c = curve(s, t);
  return std::min(std::sqrt(best_d2), std::hypot(c.x - x, c.y - y));
}

inline double signed_distance(const Shape& s, double x, double y) {
  if (const auto* d = std::get_if<DiskShape>(&s)) return std::hypot(x, y) - d->radius;
  if (const auto* a = std::get_if<AnnulusShape>(&s)) {
    const double r = std::hypot(x, y);
    return std::max(a->r_in - r, r - a->r_out);
  }
  const double dist = closest_point_distance(s, x, y);
  return phi(s, x, y) < 0.0 ? -dist : dist;
}

/// Outward unit normal of the boundary at (x, y) (on or near the boundary).
inline std::array<double, 2> outward_normal(const Shape& s, double x, double y) {
  double gx = 0.0, gy = 0.0;
  const double r = std::hypot(x, y);
  if (std::holds_alternative<DiskShape>(s)) {
    gx = x / r, gy = y / r;
  } else if (const auto* a = std::get_if<AnnulusShape>(&s)) {
    const double sign = (r - a->r_in < a->r_out - r) ? -1.0 : 1.0;
    gx = sign * x / r, gy = sign * y / r;
  } else if (const auto* e = std::get_if<EllipseShape>(&s)) {
    gx = 2.0 * x / (e->a * e->a), gy = 2.0 * y / (e->b * e->b);
  } else {
    constexpr double dh = 1e-7;
    gx = (phi(s, x + dh, y) - phi(s, x - dh, y)) / (2 * dh);
    gy = (phi(s, x, y + dh) - phi(s, x, y - dh)) / (2 * dh);
  }
  const double nrm = std::hypot(gx, gy);
  return {gx / nrm, gy / nrm};
}

inline double bounding_radius(const Shape& s) {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DiskShape>) return v.radius;
        else if constexpr (std::is_same_v<T, AnnulusShape>) return v.r_out;
        else if constexpr (std::is_same_v<T, EllipseShape>) return std::max(v.a, v.b);
        else return v.r0 * (1.0 + v.amplitude);
      },
      s);
}

inline double diameter(const Shape& s) {
  if (!std::holds_alternative<BlobShape>(s)) return 2.0 * bounding_radius(s);
  constexpr int kSamples = 1024;
  std::vector<std::array<double, 2>> pts(kSamples);
  for (int i = 0; i < kSamples; ++i) {
    const auto c = curve(s, 2.0 * std::numbers::pi * i / kSamples);
    pts[i] = {c.x, c.y};
  }
  double best = 0.0;
  for (int i = 0; i < kSamples; ++i)
    for (int j = i + 1; j < kSamples; ++j)
      best = std::max(best, std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]));
  return best;
}

inline int boundary_components(const Shape& s) {
  return std::holds_alternative<AnnulusShape>(s) ? 2 : 1;
}

/// Maximal radii of exterior (r1) and interior (r2) tangent spheres, minimized
/// over the boundary. r1 is +inf for convex domains.
struct SphereRadii {
  double exterior = std::numeric_limits<double>::infinity();
  double interior = 0.0;
};

inline SphereRadii sphere_radii(const Shape& s) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (const auto* d = std::get_if<DiskShape>(&s)) return {inf, d->radius};
  if (const auto* a = std::get_if<AnnulusShape>(&s)) return {a->r_in, 0.5 * (a->r_out - a->r_in)};
  if (const auto* e = std::get_if<EllipseShape>(&s)) {
    const double big = std::max(e->a, e->b), small = std::min(e->a, e->b);
    return {inf, small * small / big};
  }
  // Blob: curvature extremes of the parametric curve; the interior radius is
  // further capped by the inradius.
  constexpr int kSamples = 2048;
  double kmax = 0.0, kmin = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    const auto c = curve(s, 2.0 * std::numbers::pi * i / kSamples);
    const double k = (c.dx * c.ddy - c.dy * c.ddx) / std::pow(c.dx * c.dx + c.dy * c.dy, 1.5);
    kmax = std::max(kmax, k);
    kmin = std::min(kmin, k);
  }
  const auto& b = std::get<BlobShape>(s);
  const double inradius = b.r0 * (1.0 - b.amplitude);
  SphereRadii out;
  out.interior = std::min(kmax > 0 ? 1.0 / kmax : inf, inradius);
  out.exterior = kmin < 0 ? -1.0 / kmin : inf;
  return out;
}

inline bool is_radially_symmetric(const Shape& s) {
  return std::holds_alternative<DiskShape>(s) || std::holds_alternative<AnnulusShape>(s);
}

}  // namespace shape

enum class NodeKind : std::uint8_t { interior, near_boundary, boundary_ghost, exterior };

inline const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::interior: return "interior";
    case NodeKind::near_boundary: return "near-boundary";
    case NodeKind::boundary_ghost: return "boundary-ghost";
    case NodeKind::exterior: return "exterior";
  }
  return "?";
}

/// Derivative slots of a 2D jet. The last four are one-sided first
/// differences (forward/backward in x and y).
enum Deriv : int { kDx = 0, kDy = 1, kDxx = 2, kDyy = 3, kDxy = 4, kDxF = 5, kDxB = 6, kDyF = 7, kDyB = 8 };
inline constexpr int kNumDeriv = 9;
using DerivWeights = std::array<double, kNumDeriv>;

struct StencilTerm {
  int node = -1;  ///< active-node index
  DerivWeights w{};
};

struct BoundaryTerm {
  double x = 0.0, y = 0.0;  ///< boundary intercept
  DerivWeights w{};
};

/// Every derivative at a node is sum_j w_j u_j + sum_b w_b g(x_b).
struct NodeStencil {
  std::array<StencilTerm, 9> terms{};
  int n_terms = 0;
  std::array<BoundaryTerm, 8> bterms{};
  int n_bterms = 0;
  DerivWeights boundary_sum{};  ///< sum of boundary weights (constant data)
  int x_slot = kDx;  ///< slot used for u_x
  int y_slot = kDy;  ///< slot used for u_y
};

/// One-sided sample of the gradient at a boundary intercept along a grid axis.
struct BoundarySample {
  int node = -1;            ///< active index of the adjacent unknown node
  double x = 0.0, y = 0.0;  ///< boundary point
  std::array<double, 2> normal{};  ///< outward unit normal
  std::array<double, 2> axis{};    ///< unit direction from node to boundary
  std::array<int, 3> nodes{-1, -1, -1};
  std::array<double, 3> weights{};  ///< d/d(axis) weights for the node values
  double boundary_weight = 0.0;     ///< weight of the boundary value
};

struct GridNode {
  int i = 0, j = 0;
  double x = 0.0, y = 0.0;
  NodeKind kind = NodeKind::exterior;
  double d = 0.0;  ///< signed distance to the boundary
};

/// Immutable after construction.
class GridDomain {
public:
  /// Inside nodes whose nearest cut is closer than this fraction of a cell
  /// are pinned to the boundary value instead of carrying an unknown.
  static constexpr double kPinFraction = 1e-3;

  GridDomain(const Shape& s, double h) : shape_(s), h_(h) {
    if (!(h > 0.0)) throw ConfigurationError("grid: h must be positive");
    shape::validate(s);
    build();
  }

  const Shape& shape() const noexcept { return shape_; }
  double h() const noexcept { return h_; }
  double diameter() const noexcept { return diameter_; }
  int boundary_components() const noexcept { return shape::boundary_components(shape_); }
  shape::SphereRadii sphere_radii() const { return shape::sphere_radii(shape_); }
  std::array<double, 2> box_min() const { return {-half_ * h_, -half_ * h_}; }
  std::array<double, 2> box_max() const { return {half_ * h_, half_ * h_}; }
  int grid_width() const noexcept { return 2 * half_ + 1; }

  const std::vector<GridNode>& nodes() const noexcept { return nodes_; }
  int active_count() const noexcept { return static_cast<int>(nodes_.size()); }
  int unknown_count() const noexcept { return static_cast<int>(unknowns_.size()); }
  /// Active index of the k-th unknown.
  int unknown_node(int k) const { return unknowns_[k]; }
  /// Unknown id of an active node, -1 when pinned.
  int unknown_id(int active) const { return unknown_id_[active]; }
  const std::vector<int>& unknowns() const noexcept { return unknowns_; }
  const NodeStencil& stencil(int unknown) const { return stencils_[unknown]; }
  const std::vector<BoundarySample>& boundary_samples() const noexcept { return samples_; }

  /// Active index of lattice node (i, j), -1 if exterior or off-grid.
  int active_index(int i, int j) const {
    if (i < -half_ || i > half_ || j < -half_ || j > half_) return -1;
    return lattice_[(j + half_) * grid_width() + (i + half_)];
  }

  int count(NodeKind k) const {
    return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(),
                                          [k](const GridNode& n) { return n.kind == k; }));
  }

  /// Fraction in (0, 1] along (x0,y0) -> (x1,y1) where the level set vanishes.
  double intercept(double x0, double y0, double x1, double y1) const {
    auto f = [&](double s) { return shape::phi(shape_, x0 + s * (x1 - x0), y0 + s * (y1 - y0)); };
    const double f0 = f(0.0), f1 = f(1.0);
    if (f1 <= 0.0) return 1.0;
    if (f0 >= 0.0) return 0.0;
    boost::uintmax_t max_iter = 200;
    boost::math::tools::eps_tolerance<double> tol(52);
    const auto r = boost::math::tools::toms748_solve(f, 0.0, 1.0, f0, f1, tol, max_iter);
    return 0.5 * (r.first + r.second);
  }

private:
  static constexpr std::array<std::array<int, 2>, 8> kDirs{
      {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, 1}, {1, -1}, {-1, -1}}};
  enum Dir { E = 0, W, N, S, NE, NW, SE, SW };
  static constexpr double kOneSidedNormal = 0.25;

  // Affine value at a direction's lattice position: sum c u_node + sum c g(b).
  struct Affine {
    std::array<std::pair<int, double>, 3> nodes{};
    int n_nodes = 0;
    std::array<std::pair<std::array<double, 2>, double>, 2> bnd{};
    int n_bnd = 0;
    void add_node(int idx, double c) { nodes[n_nodes++] = {idx, c}; }
    void add_bnd(std::array<double, 2> p, double c) { bnd[n_bnd++] = {p, c}; }
  };

  void build() {
    diameter_ = shape::diameter(shape_);
    half_ = static_cast<int>(std::ceil(shape::bounding_radius(shape_) / h_)) + 2;
    const int W = grid_width();
    std::vector<char> inside(static_cast<size_t>(W) * W, 0);
    auto lat = [&](int i, int j) { return (j + half_) * W + (i + half_); };
    auto in_range = [&](int i, int j) { return i >= -half_ && i <= half_ && j >= -half_ && j <= half_; };
    for (int j = -half_; j <= half_; ++j)
      for (int i = -half_; i <= half_; ++i) inside[lat(i, j)] = shape::phi(shape_, i * h_, j * h_) < 0.0;

    // Pin inside nodes that sit within kPinFraction of a cut.
    std::vector<char> pinned(inside.size(), 0);
    for (int j = -half_; j <= half_; ++j)
      for (int i = -half_; i <= half_; ++i) {
        if (!inside[lat(i, j)]) continue;
        for (const auto& d : kDirs) {
          const int a = i + d[0], b = j + d[1];
          if (in_range(a, b) && inside[lat(a, b)]) continue;
          const double th = intercept(i * h_, j * h_, a * h_, b * h_);
          if (th < kPinFraction) pinned[lat(i, j)] = 1;
        }
      }

    lattice_.assign(inside.size(), -1);
    for (int j = -half_; j <= half_; ++j)
      for (int i = -half_; i <= half_; ++i) {
        if (!inside[lat(i, j)]) continue;
        GridNode node;
        node.i = i, node.j = j, node.x = i * h_, node.y = j * h_;
        node.d = shape::signed_distance(shape_, node.x, node.y);
        node.kind = pinned[lat(i, j)] ? NodeKind::boundary_ghost : NodeKind::interior;
        lattice_[lat(i, j)] = static_cast<int>(nodes_.size());
        nodes_.push_back(node);
      }
    unknown_id_.assign(nodes_.size(), -1);
    for (int k = 0; k < active_count(); ++k) {
      auto& node = nodes_[k];
      if (node.kind == NodeKind::boundary_ghost) continue;
      for (const auto& d : kDirs) {
        const int a = active_index(node.i + d[0], node.j + d[1]);
        if (a < 0 || pinned[lat(node.i + d[0], node.j + d[1])]) node.kind = NodeKind::near_boundary;
      }
      unknown_id_[k] = static_cast<int>(unknowns_.size());
      unknowns_.push_back(k);
    }
    if (unknowns_.empty())
      throw ConfigurationError("grid: domain has no interior nodes at h = " + std::to_string(h_));

    stencils_.resize(unknowns_.size());
    for (size_t u = 0; u < unknowns_.size(); ++u) stencils_[u] = make_stencil(unknowns_[u]);
    make_boundary_samples();
  }

  // Value at P + dir: the node itself if active, otherwise a ghost by
  // quadratic extrapolation through the boundary intercept.
  Affine direction_value(int p, int dir) const {
    const auto& P = nodes_[p];
    const auto d = kDirs[dir];
    Affine v;
    const int q = active_index(P.i + d[0], P.j + d[1]);
    if (q >= 0) {
      v.add_node(q, 1.0);
      return v;
    }
    const double th = intercept(P.x, P.y, P.x + d[0] * h_, P.y + d[1] * h_);
    const std::array<double, 2> bq{P.x + th * d[0] * h_, P.y + th * d[1] * h_};
    const int o = active_index(P.i - d[0], P.j - d[1]);
    // Lagrange basis at s = 1 through nodes s0 < 0 < th.
    double s0;
    if (o >= 0) {
      s0 = -1.0;
    } else {
      s0 = -intercept(P.x, P.y, P.x - d[0] * h_, P.y - d[1] * h_);
    }
    const double l0 = (1.0 - 0.0) * (1.0 - th) / ((s0 - 0.0) * (s0 - th));
    const double lp = (1.0 - s0) * (1.0 - th) / ((0.0 - s0) * (0.0 - th));
    const double lb = (1.0 - s0) * (1.0 - 0.0) / ((th - s0) * (th - 0.0));
    v.add_node(p, lp);
    v.add_bnd(bq, lb);
    if (o >= 0) {
      v.add_node(o, l0);
    } else {
      v.add_bnd({P.x + s0 * d[0] * h_, P.y + s0 * d[1] * h_}, l0);
    }
    return v;
  }

  NodeStencil make_stencil(int p) const {
    std::array<Affine, 8> v;
    for (int d = 0; d < 8; ++d) v[d] = direction_value(p, d);
    const double ih = 1.0 / h_, ih2 = ih * ih;
    // derivative weights per direction slot, plus the center
    std::array<DerivWeights, 8> dw{};
    dw[E][kDx] = 0.5 * ih, dw[W][kDx] = -0.5 * ih;
    dw[N][kDy] = 0.5 * ih, dw[S][kDy] = -0.5 * ih;
    dw[E][kDxx] = ih2, dw[W][kDxx] = ih2;
    dw[N][kDyy] = ih2, dw[S][kDyy] = ih2;
    dw[NE][kDxy] = 0.25 * ih2, dw[SW][kDxy] = 0.25 * ih2;
    dw[NW][kDxy] = -0.25 * ih2, dw[SE][kDxy] = -0.25 * ih2;
    DerivWeights center{};
    center[kDxx] = -2.0 * ih2, center[kDyy] = -2.0 * ih2;

    NodeStencil st;
    auto add_node = [&](int idx, const DerivWeights& w, double c) {
      int slot = -1;
      for (int t = 0; t < st.n_terms; ++t)
        if (st.terms[t].node == idx) slot = t;
      if (slot < 0) {
        slot = st.n_terms++;
        st.terms[slot].node = idx;
      }
      for (int k = 0; k < kNumDeriv; ++k) st.terms[slot].w[k] += c * w[k];
    };
    auto add_bnd = [&](std::array<double, 2> pt, const DerivWeights& w, double c) {
      int slot = -1;
      for (int t = 0; t < st.n_bterms; ++t)
        if (st.bterms[t].x == pt[0] && st.bterms[t].y == pt[1]) slot = t;
      if (slot < 0) {
        slot = st.n_bterms++;
        st.bterms[slot].x = pt[0], st.bterms[slot].y = pt[1];
      }
      for (int k = 0; k < kNumDeriv; ++k) {
        st.bterms[slot].w[k] += c * w[k];
        st.boundary_sum[k] += c * w[k];
      }
    };
    add_node(p, center, 1.0);
    for (int d = 0; d < 8; ++d) {
      for (int t = 0; t < v[d].n_nodes; ++t) add_node(v[d].nodes[t].first, dw[d], v[d].nodes[t].second);
      for (int t = 0; t < v[d].n_bnd; ++t) add_bnd(v[d].bnd[t].first, dw[d], v[d].bnd[t].second);
    }
    // One-sided differences to the neighbour or to the boundary intercept.
    const auto& P = nodes_[p];
    auto one_sided = [&](int dir, int slot, double sign) {
      const auto d = kDirs[dir];
      DerivWeights unit{};
      unit[slot] = 1.0;
      const int q = active_index(P.i + d[0], P.j + d[1]);
      double len = h_;
      if (q >= 0) {
        add_node(q, unit, sign / len);
      } else {
        const double th = intercept(P.x, P.y, P.x + d[0] * h_, P.y + d[1] * h_);
        len = th * h_;
        add_bnd({P.x + th * d[0] * h_, P.y + th * d[1] * h_}, unit, sign / len);
      }
      add_node(p, unit, -sign / len);
    };
    one_sided(E, kDxF, 1.0);
    one_sided(W, kDxB, -1.0);
    one_sided(N, kDyF, 1.0);
    one_sided(S, kDyB, -1.0);
    // Near the boundary u = O(h) and the first-order coefficients of the
    // linearization dominate |G^{ss}| / h, pointing outward. A one-sided
    // difference toward the boundary keeps those rows positive-type.
    if (P.kind == NodeKind::near_boundary) {
      const auto n = shape::outward_normal(shape_, P.x, P.y);
      if (std::abs(n[0]) >= kOneSidedNormal) st.x_slot = n[0] > 0 ? kDxF : kDxB;
      if (std::abs(n[1]) >= kOneSidedNormal) st.y_slot = n[1] > 0 ? kDyF : kDyB;
    }
    return st;
  }

  void make_boundary_samples() {
    for (int u = 0; u < unknown_count(); ++u) {
      const int p = unknowns_[u];
      const auto& P = nodes_[p];
      for (int dir = 0; dir < 4; ++dir) {
        const auto d = kDirs[dir];
        if (active_index(P.i + d[0], P.j + d[1]) >= 0) continue;
        const double th = intercept(P.x, P.y, P.x + d[0] * h_, P.y + d[1] * h_);
        BoundarySample bs;
        bs.node = p;
        bs.x = P.x + th * d[0] * h_, bs.y = P.y + th * d[1] * h_;
        bs.normal = shape::outward_normal(shape_, bs.x, bs.y);
        bs.axis = {static_cast<double>(d[0]), static_cast<double>(d[1])};
        // Inward nodes at s = 0, -1, -2 (as many as are active), boundary at s = th.
        std::array<double, 4> s{th, 0.0, -1.0, -2.0};
        std::array<int, 3> idx{p, active_index(P.i - d[0], P.j - d[1]),
                               active_index(P.i - 2 * d[0], P.j - 2 * d[1])};
        int m = 1;
        if (idx[1] >= 0) ++m;
        if (m == 2 && idx[2] >= 0) ++m;
        // Lagrange derivative at s = th over points s[0..m].
        const int npts = m + 1;
        std::array<double, 4> dl{};
        for (int a = 0; a < npts; ++a) {
          double denom = 1.0;
          for (int b = 0; b < npts; ++b)
            if (b != a) denom *= s[a] - s[b];
          double num = 0.0;
          for (int skip = 0; skip < npts; ++skip) {
            if (skip == a) continue;
            double prod = 1.0;
            for (int b = 0; b < npts; ++b)
              if (b != a && b != skip) prod *= th - s[b];
            num += prod;
          }
          dl[a] = num / denom / h_;
        }
        bs.boundary_weight = dl[0];
        for (int a = 0; a < m; ++a) {
          bs.nodes[a] = idx[a];
          bs.weights[a] = dl[a + 1];
        }
        samples_.push_back(bs);
      }
    }
  }

  Shape shape_;
  double h_;
  double diameter_ = 0.0;
  int half_ = 0;
  std::vector<GridNode> nodes_;
  std::vector<int> lattice_;
  std::vector<int> unknowns_;
  std::vector<int> unknown_id_;
  std::vector<NodeStencil> stencils_;
  std::vector<BoundarySample> samples_;
};

inline GridDomain build_domain(const Shape& s, double h) { return GridDomain(s, h); }

/// Values on the active (non-exterior) nodes of a GridDomain.
struct ScalarField {
  std::vector<double> values;

  static ScalarField constant(const GridDomain& g, double c) {
    return {std::vector<double>(g.active_count(), c)};
  }
  template <class Fn>
  static ScalarField sample(const GridDomain& g, Fn&& fn) {
    ScalarField f;
    f.values.reserve(g.active_count());
    for (const auto& n : g.nodes()) f.values.push_back(fn(n.x, n.y));
    return f;
  }
  double operator[](int k) const { return values[k]; }
  double& operator[](int k) { return values[k]; }
  size_t size() const { return values.size(); }
};

using BoundaryData = std::function<double(double, double)>;

/// The five derivative values (u_x, u_y, u_xx, u_yy, u_xy) at an unknown node
/// for constant boundary data.
inline DerivWeights stencil_apply(const NodeStencil& st, const double* values, double boundary_value) {
  DerivWeights d{};
  for (int k = 0; k < kNumDeriv; ++k) d[k] = st.boundary_sum[k] * boundary_value;
  for (int t = 0; t < st.n_terms; ++t) {
    const double v = values[st.terms[t].node];
    for (int k = 0; k < kNumDeriv; ++k) d[k] += st.terms[t].w[k] * v;
  }
  return d;
}

/// Jet from derivative values; `xs`/`ys` pick the slot used for u_x / u_y.
inline PointJet<2> jet_from_derivs(double u, const DerivWeights& d, int xs = kDx, int ys = kDy) {
  PointJet<2> jet;
  jet.u = u;
  jet.Du << d[xs], d[ys];
  jet.D2u << d[kDxx], d[kDxy], d[kDxy], d[kDyy];
  return jet;
}

inline void require_unknown(const GridDomain& domain, int node) {
  if (node < 0 || node >= domain.active_count() || domain.unknown_id(node) < 0)
    throw DiscretizationError("fd_jet: node " + std::to_string(node) +
                                  " has no stencil support (not an interior or near-boundary node)",
                              node);
}

/// Finite-difference jet at an interior or near-boundary node (active index).
inline PointJet<2> fd_jet(const ScalarField& field, const GridDomain& domain, int node,
                          const BoundaryData& boundary) {
  require_unknown(domain, node);
  const auto& st = domain.stencil(domain.unknown_id(node));
  DerivWeights d{};
  for (int t = 0; t < st.n_terms; ++t) {
    const double v = field[st.terms[t].node];
    for (int k = 0; k < kNumDeriv; ++k) d[k] += st.terms[t].w[k] * v;
  }
  for (int b = 0; b < st.n_bterms; ++b) {
    const double g = boundary(st.bterms[b].x, st.bterms[b].y);
    for (int k = 0; k < kNumDeriv; ++k) d[k] += st.bterms[b].w[k] * g;
  }
  return jet_from_derivs(field[node], d, st.x_slot, st.y_slot);
}

inline PointJet<2> fd_jet(const ScalarField& field, const GridDomain& domain, int node,
                          double boundary_value) {
  require_unknown(domain, node);
  const auto& st = domain.stencil(domain.unknown_id(node));
  return jet_from_derivs(field[node], stencil_apply(st, field.values.data(), boundary_value), st.x_slot, st.y_slot);
}

}  // namespace hcurv
