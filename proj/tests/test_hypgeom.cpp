#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hypercurv/hypgeom.hpp"
#include "hypercurv/pde.hpp"

using namespace hcurv;

namespace {

PointJet<2> jet2(double u, double ux, double uy, double uxx, double uxy, double uyy) {
  PointJet<2> j;
  j.u = u;
  j.Du << ux, uy;
  j.D2u << uxx, uxy, uxy, uyy;
  return j;
}

}  // namespace

TEST(Gamma, ZeroGradientIsIdentity) {
  const auto g = gamma_matrix<2>(Vec<2>::Zero());
  EXPECT_TRUE(g.upper.isApprox(Mat<2>::Identity()));
  EXPECT_TRUE(g.lower.isApprox(Mat<2>::Identity()));
}

TEST(Gamma, SteepGradient) {
  const auto g = gamma_matrix<2>(Vec<2>(3.0, 0.0));
  const double w = std::sqrt(10.0);
  EXPECT_NEAR(g.upper(0, 0), 1.0 - 9.0 / (w * (1.0 + w)), 1e-15);
  EXPECT_NEAR(g.upper(0, 0), 0.316228, 1e-6);
  EXPECT_NEAR(g.upper(1, 1), 1.0, 1e-15);
}

TEST(Gamma, SquareRootOfMetric) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-4, 4);
  for (int s = 0; s < 200; ++s) {
    const Vec<3> Du(U(rng), U(rng), U(rng));
    const auto g = gamma_matrix<3>(Du);
    const Mat<3> metric = Mat<3>::Identity() + Du * Du.transpose();
    EXPECT_LE((g.lower * g.lower - metric).cwiseAbs().maxCoeff(), 1e-12 * (1 + Du.squaredNorm()));
    EXPECT_LE((g.upper * g.lower - Mat<3>::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(VerticalCurvature, HorosphereIsUmbilicWithCurvatureOne) {
  const auto cd = vertical_curvature_data<2>(jet2(0.7, 0, 0, 0, 0, 0));
  EXPECT_TRUE(cd.Av.isApprox(Mat<2>::Identity()));
  EXPECT_NEAR(cd.kappa[0], 1.0, 1e-15);
  EXPECT_NEAR(cd.kappa[1], 1.0, 1e-15);
  EXPECT_TRUE(cd.admissible);
}

TEST(VerticalCurvature, CapApex) {
  const double sigma = 0.6, R = 1.3;
  const auto cd = vertical_curvature_data<2>(jet2((1 - sigma) * R, 0, 0, -1 / R, 0, -1 / R));
  EXPECT_NEAR(cd.kappa[0], sigma, 1e-14);
  EXPECT_NEAR(cd.kappa[1], sigma, 1e-14);
}

TEST(VerticalCurvature, HyperbolicAndEuclideanSpectraRelated) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int s = 0; s < 500; ++s) {
    const auto j = jet2(0.1 + std::abs(U(rng)), 2 * U(rng), 2 * U(rng), 3 * U(rng), 3 * U(rng), 3 * U(rng));
    const auto cd = vertical_curvature_data<2>(j);
    const Vec<2> kE = sym_eigen<2>(cd.AE).values;
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(cd.kappa[i], j.u * kE[i] + 1.0 / cd.w, 1e-10);
    EXPECT_EQ(cd.admissible, cd.kappa[0] > 0.0);
  }
}

TEST(RadialCurvature, Examples) {
  const Mat<2> zero = Mat<2>::Zero();
  EXPECT_LE(radial_curvature_matrix<2>(Vec<2>::Zero(), zero, 0.5, 0.0).cwiseAbs().maxCoeff(), 1e-15);
  const double kappa = 0.8, y = 0.4;
  const Mat<2> A = radial_curvature_matrix<2>(Vec<2>::Zero(), (kappa / y) * Mat<2>::Identity(), y, 0.0);
  EXPECT_TRUE(A.isApprox(kappa * Mat<2>::Identity(), 1e-14));
  EXPECT_THROW(radial_curvature_matrix<2>(Vec<2>::Zero(), zero, 0.0, 0.0), DomainError);
}

TEST(FDerivative, Examples) {
  const auto a = F_value_and_derivative<2>({2, 2, 1}, Mat<2>::Identity());
  EXPECT_NEAR(a.F, 1.0, 1e-15);
  EXPECT_TRUE(a.Fij.isApprox(0.5 * Mat<2>::Identity()));
  Mat<2> D;
  D << 1, 0, 0, 3;
  const auto b = F_value_and_derivative<2>({2, 1, 0}, D);
  EXPECT_NEAR(b.F, 2.0, 1e-15);
  EXPECT_TRUE(b.Fij.isApprox(0.5 * Mat<2>::Identity()));
  D(0, 0) = -1;
  EXPECT_THROW(F_value_and_derivative<2>({2, 1, 0}, D), DomainError);
}

TEST(FDerivative, TraceIdentities) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int s = 0; s < 300; ++s) {
    Mat<3> B;
    for (int i = 0; i < 9; ++i) B(i / 3, i % 3) = U(rng);
    const Mat<3> A = B * B.transpose() + 0.2 * Mat<3>::Identity();
    for (const CurvatureFunctionSpec sp : {CurvatureFunctionSpec{3, 1, 0}, {3, 2, 0}, {3, 3, 1}}) {
      const auto fd = F_value_and_derivative<3>(sp, A);
      EXPECT_NEAR((fd.Fij * A).trace(), fd.f_i.dot(fd.lambda), 1e-10);
      EXPECT_NEAR((fd.Fij * A * A).trace(), fd.f_i.dot(fd.lambda.cwiseProduct(fd.lambda)), 1e-10);
    }
  }
}

TEST(GOperator, Horosphere) {
  const double c = 0.8;
  const auto j = jet2(c, 0, 0, 0, 0, 0);
  EXPECT_NEAR(G_eval<2>(j, {2, 2, 0}), 1.0 / c, 1e-14);
  const auto d = G_derivatives<2>(j, {2, 2, 0});
  EXPECT_TRUE(d.G_st.isApprox(0.5 * Mat<2>::Identity()));
  EXPECT_LE(d.G_s.cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(d.G_u, -1.0 / (c * c), 1e-14);
}

TEST(GOperator, CapApex) {
  const double sigma = 0.6, R = 1.0;
  const auto j = jet2((1 - sigma) * R, 0, 0, -1 / R, 0, -1 / R);
  EXPECT_NEAR(G_eval<2>(j, {2, 1, 0}), 1.5, 1e-14);
}

TEST(GOperator, Scaling) {
  // u_l(x) = l u(x / l): same slope, curvature divided by l
  const auto j = jet2(0.5, 0.3, -0.2, -1.1, 0.2, -0.7);
  for (double lam : {0.5, 2.0, 3.7}) {
    const auto s = jet2(lam * j.u, j.Du[0], j.Du[1], j.D2u(0, 0) / lam, j.D2u(0, 1) / lam, j.D2u(1, 1) / lam);
    for (const CurvatureFunctionSpec sp : {CurvatureFunctionSpec{2, 1, 0}, {2, 2, 0}, {2, 2, 1}})
      EXPECT_NEAR(G_eval<2>(s, sp), G_eval<2>(j, sp) / lam, 1e-12);
  }
}
