#include <gtest/gtest.h>

#include <cmath>

#include "hypercurv/barriers.hpp"
#include "hypercurv/grid.hpp"
#include "hypercurv/surface.hpp"

using namespace hcurv;

TEST(Shapes, DiskGeometry) {
  const GridDomain g(DiskShape{0.8}, 0.1);
  EXPECT_NEAR(g.diameter(), 1.6, 0.2);
  EXPECT_EQ(g.boundary_components(), 1);
  const int origin = g.active_index(0, 0);
  ASSERT_GE(origin, 0);
  EXPECT_NEAR(g.nodes()[origin].d, -0.8, 0.1);
  EXPECT_EQ(g.nodes()[origin].kind, NodeKind::interior);
}

TEST(Shapes, AnnulusHasTwoBoundaryComponents) {
  const GridDomain g(AnnulusShape{0.4, 1.0}, 0.05);
  EXPECT_EQ(g.boundary_components(), 2);
  EXPECT_LT(g.active_index(0, 0), 0);  // the hole is not part of the grid
  EXPECT_GT(g.count(NodeKind::near_boundary), 0);
}

TEST(Shapes, InvalidParametersRejected) {
  EXPECT_THROW(GridDomain(DiskShape{-1.0}, 0.1), std::exception);
  EXPECT_THROW(GridDomain(AnnulusShape{1.0, 0.5}, 0.1), std::exception);
  EXPECT_THROW(GridDomain(DiskShape{0.8}, 0.0), ConfigurationError);
}

TEST(Shapes, SphereRadii) {
  const auto d = shape::sphere_radii(DiskShape{0.78});
  EXPECT_TRUE(std::isinf(d.exterior));
  EXPECT_NEAR(d.interior, 0.78, 1e-12);
  const auto a = shape::sphere_radii(AnnulusShape{0.5, 1.0});
  EXPECT_NEAR(a.exterior, 0.5, 1e-12);
}

TEST(Stencils, AffineFieldsAreExact) {
  for (const Shape s : {Shape{DiskShape{0.78}}, Shape{AnnulusShape{0.5, 1.0}}, Shape{EllipseShape{0.9, 0.6}}}) {
    const GridDomain g(s, 1.0 / 32);
    auto f = [](double x, double y) { return 0.3 + 1.7 * x - 0.4 * y; };
    const auto field = ScalarField::sample(g, f);
    for (int k = 0; k < g.unknown_count(); ++k) {
      const auto j = fd_jet(field, g, g.unknown_node(k), BoundaryData(f));
      EXPECT_NEAR(j.Du[0], 1.7, 1e-10);
      EXPECT_NEAR(j.Du[1], -0.4, 1e-10);
      EXPECT_LE(j.D2u.cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(Stencils, QuadraticHessianAtInteriorNodes) {
  const GridDomain g(DiskShape{0.78}, 1.0 / 32);
  Mat<2> M;
  M << 1.3, -0.4, -0.4, 0.7;
  auto f = [&](double x, double y) {
    const Vec<2> p(x, y);
    return 0.5 * p.dot(M * p);
  };
  const auto field = ScalarField::sample(g, f);
  for (int k = 0; k < g.unknown_count(); ++k) {
    const int p = g.unknown_node(k);
    if (g.nodes()[p].kind != NodeKind::interior) continue;
    const auto j = fd_jet(field, g, p, BoundaryData(f));
    EXPECT_LE((j.D2u - M).cwiseAbs().maxCoeff(), 1e-10);
  }
}

namespace {

double cap_hessian_error(double h, bool inner_disk_only) {
  const GridDomain g(DiskShape{0.78}, h);
  auto f = [](double x, double y) { return std::sqrt(1.0 - x * x - y * y) - 0.6; };
  const auto field = ScalarField::sample(g, f);
  double err = 0.0;
  for (int k = 0; k < g.unknown_count(); ++k) {
    const int p = g.unknown_node(k);
    const auto& n = g.nodes()[p];
    if (inner_disk_only && std::hypot(n.x, n.y) > 0.6) continue;
    const double q = 1.0 - n.x * n.x - n.y * n.y, s = std::sqrt(q);
    Mat<2> H;
    H << -1 / s - n.x * n.x / (q * s), -n.x * n.y / (q * s), -n.x * n.y / (q * s), -1 / s - n.y * n.y / (q * s);
    err = std::max(err, (fd_jet(field, g, p, BoundaryData(f)).D2u - H).cwiseAbs().maxCoeff());
  }
  return err;
}

}  // namespace

TEST(Stencils, CapHessianConvergesAtSecondOrder) {
  const double ratio = cap_hessian_error(1.0 / 32, true) / cap_hessian_error(1.0 / 64, true);
  EXPECT_GE(ratio, 3.2);
  EXPECT_LE(ratio, 4.8);
}

TEST(Stencils, CapHessianConvergesNearBoundary) {
  // cut-cell second differences are first order
  const double ratio = cap_hessian_error(1.0 / 32, false) / cap_hessian_error(1.0 / 64, false);
  EXPECT_GE(ratio, 1.4);
}

TEST(Stencils, JetAtPinnedOrExteriorNodeThrows) {
  const GridDomain g(DiskShape{0.78}, 1.0 / 16);
  const auto field = ScalarField::constant(g, 1.0);
  EXPECT_THROW(fd_jet(field, g, -1, 0.0), DiscretizationError);
  EXPECT_THROW(fd_jet(field, g, g.active_count(), 0.0), DiscretizationError);
}

TEST(Stencils, BoundarySamplesRecoverCapSlope) {
  const double sigma = 0.6, eps = 0.01;
  const auto cap = equidistance_cap(0.78, sigma, eps);
  const GridDomain g(DiskShape{0.78}, 1.0 / 64);
  const auto field = ScalarField::sample(g, [&](double x, double y) { return cap.height(x, y); });
  const double exact_nu = (eps + sigma * cap.R) / cap.R;
  const auto bg = boundary_geometry(g, field, eps);
  ASSERT_FALSE(bg.empty());
  for (const auto& b : bg) EXPECT_NEAR(b.nu, exact_nu, 2e-4);
}
