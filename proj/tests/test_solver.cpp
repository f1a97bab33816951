#include <gtest/gtest.h>

#include <cmath>

#include "hypercurv/barriers.hpp"
#include "hypercurv/continuation.hpp"
#include "hypercurv/solver.hpp"

using namespace hcurv;

TEST(Schedule, DefaultsAndValidation) {
  SolveSchedule s;
  EXPECT_NO_THROW(s.validate());
  ASSERT_EQ(s.epsilon_ladder.size(), 6u);
  EXPECT_DOUBLE_EQ(s.epsilon_ladder.back(), 0.00125);
  EXPECT_EQ(s.continuity_steps, 8);
  EXPECT_DOUBLE_EQ(s.newton_tol, 1e-9);

  auto bad = s;
  bad.sigma = 1.2;
  EXPECT_THROW(bad.validate(), ArgumentError);
  bad = s;
  bad.epsilon_ladder = {0.01, 0.02};
  EXPECT_THROW(bad.validate(), ArgumentError);
  bad = s;
  bad.spec = {3, 1, 0};
  EXPECT_THROW(bad.validate(), ArgumentError);
  bad = s;
  bad.damping = 1.0;
  EXPECT_THROW(bad.validate(), ArgumentError);
}

TEST(Source, AffineInU) {
  SourceTerm s;
  s.sigma = 0.6;
  s.slope = 10.0;
  s.anchor = {0.1, 0.2};
  s.offset = {0.05, 0.0};
  EXPECT_NEAR(s(0, 0.3), 0.6 + 0.05 + 10.0 * 0.2, 1e-14);
  EXPECT_NEAR(s(1, 0.2), 0.6, 1e-14);
}

TEST(Assembly, ConstantFieldMatchesHandAssembly) {
  const double h = 1.0 / 16, c = 0.3, sigma = 0.6;
  auto dom = make_domain(DiskShape{0.78}, h);
  const auto u = ScalarField::constant(*dom, c);
  SourceTerm src;
  src.sigma = sigma;
  const auto sys = assemble_linearized(*dom, u, c, {2, 2, 1}, src);
  const int center = dom->active_index(0, 0);
  const int r = dom->unknown_id(center);
  ASSERT_GE(r, 0);
  // L = (1/2) Laplacian - (1 - sigma)/c^2 on the five-point stencil
  EXPECT_NEAR(sys.matrix.coeff(r, r), -2.0 / (h * h) - (1.0 - sigma) / (c * c), 1e-9);
  for (auto [i, j] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}})
    EXPECT_NEAR(sys.matrix.coeff(r, dom->unknown_id(dom->active_index(i, j))), 0.5 / (h * h), 1e-9);
  EXPECT_NEAR(sys.G_st[r][0], 0.5, 1e-14);
  EXPECT_NEAR(sys.G_st[r][2], 0.0, 1e-14);
  EXPECT_NEAR(sys.rhs[r], -(1.0 - sigma) / c, 1e-13);
  EXPECT_TRUE(sys.sign_violations.empty());
  EXPECT_GT(sys.min_ellipticity, 0.0);
}

TEST(Assembly, EllipticOnAdmissibleCap) {
  auto dom = make_domain(DiskShape{0.78}, 1.0 / 32);
  const auto cap = equidistance_cap(0.78, 0.6, 0.02);
  const auto u = ScalarField::sample(*dom, [&](double x, double y) { return cap.height(x, y); });
  SourceTerm src;
  src.sigma = 0.6;
  const auto sys = assemble_linearized(*dom, u, 0.02, {2, 2, 0}, src);
  EXPECT_GT(sys.min_ellipticity, 0.0);
  double rmax = 0.0;
  for (int r = 0; r < dom->unknown_count(); ++r)
    if (dom->nodes()[dom->unknown_node(r)].kind == NodeKind::interior) rmax = std::max(rmax, std::abs(sys.rhs[r]));
  EXPECT_LT(rmax, 0.05);  // truncation error of the exact cap, not zero
}

TEST(Newton, ConvergesFromExactCapSample) {
  auto dom = make_domain(DiskShape{0.78}, 1.0 / 32);
  const auto cap = equidistance_cap(0.78, 0.6, 0.02);
  auto u = ScalarField::sample(*dom, [&](double x, double y) { return cap.height(x, y); }).values;
  SolveSchedule sched;
  NewtonSolver newton(dom, {2, 1, 0}, 0.02, sched);
  SourceTerm src;
  src.sigma = 0.6;
  const auto out = newton.solve(u, src);
  ASSERT_TRUE(out.converged) << out.reason;
  EXPECT_LE(out.residual, sched.newton_tol);
  EXPECT_LT(out.iterations, 10);
  for (int p : dom->unknowns()) EXPECT_NEAR(u[p], cap.height(dom->nodes()[p].x, dom->nodes()[p].y), 5e-3);
}

TEST(Newton, InadmissibleStartReported) {
  auto dom = make_domain(DiskShape{0.78}, 1.0 / 16);
  std::vector<double> u(dom->active_count(), 0.02);
  u[dom->active_index(0, 0)] = 1.0;  // spike: not convex enough
  SolveSchedule sched;
  NewtonSolver newton(dom, {2, 1, 0}, 0.02, sched);
  SourceTerm src;
  src.sigma = 0.6;
  std::vector<double> R;
  EXPECT_TRUE(std::isinf(newton.residual(u, src, R)));
  EXPECT_FALSE(newton.solve(u, src).converged);
}

TEST(Continuity, ZeroLengthPathReturnsStart) {
  auto dom = make_domain(DiskShape{0.78}, 1.0 / 16);
  SolveSchedule sched;
  NewtonSolver newton(dom, {2, 1, 0}, 0.02, sched);
  const std::vector<double> start(dom->active_count(), 0.02);
  auto family = [](double) {
    SourceTerm s;
    s.sigma = 1.0;  // the horosphere u = eps solves f = 1
    return s;
  };
  const auto out = continuity_solve(newton, start, family, sched, 0.0);
  EXPECT_EQ(out.values, start);
  EXPECT_EQ(out.t_steps, 0);
}

class FixedEpsilon : public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    dom_ = make_domain(DiskShape{0.78}, 1.0 / 32);
    sched_.sigma = 0.6;
    sched_.spec = {2, 1, 0};
    result_ = std::make_unique<FixedEpsilonResult>(solve_fixed_epsilon(dom_, sched_, 0.02));
  }
  static void TearDownTestSuite() { result_.reset(); }
  static inline DomainPtr dom_;
  static inline SolveSchedule sched_;
  static inline std::unique_ptr<FixedEpsilonResult> result_;
};

TEST_F(FixedEpsilon, ResidualBelowTolerance) {
  EXPECT_TRUE(result_->state.admissible());
  EXPECT_LE(result_->state.residual_inf(), sched_.newton_tol);
}

TEST_F(FixedEpsilon, OuterIterationIsMonotone) {
  EXPECT_GT(result_->outer_iterations, 10);
  EXPECT_GE(result_->min_outer_increase, -1e-9);
  for (const auto& s : result_->history) EXPECT_GE(s.min_increase, -sched_.monotone_tol) << "outer step " << s.k;
}

TEST_F(FixedEpsilon, MatchesCap) {
  const auto cap = equidistance_cap(0.78, 0.6, 0.02);
  double err = 0.0;
  for (int p : dom_->unknowns()) {
    const auto& n = dom_->nodes()[p];
    err = std::max(err, std::abs(result_->state.u[p] - cap.height(n.x, n.y)));
  }
  EXPECT_LE(err, 5e-3);
}

TEST_F(FixedEpsilon, SingleLevelLadderIsTheFixedSolve) {
  auto s = sched_;
  s.epsilon_ladder = {0.02};
  const auto L = epsilon_continuation(dom_, s);
  ASSERT_TRUE(L.completed);
  ASSERT_EQ(L.entries.size(), 1u);
  EXPECT_EQ(L.entries[0].state.u.values, result_->state.u.values);
  EXPECT_EQ(L.entries[0].outer_iterations, result_->outer_iterations);
}

TEST_F(FixedEpsilon, WarmStartIsASubsolution) {
  const auto r = solve_fixed_epsilon(dom_, sched_, 0.01, &result_->state);
  EXPECT_TRUE(r.warm_started);
  EXPECT_LE(r.state.residual_inf(), sched_.newton_tol);
  EXPECT_GE(r.min_outer_increase, -1e-9);
}

TEST(FixedEpsilonErrors, RejectsBadEpsilon) {
  auto dom = make_domain(DiskShape{0.78}, 1.0 / 16);
  SolveSchedule s;
  EXPECT_THROW(solve_fixed_epsilon(dom, s, 0.0), ArgumentError);
  s.sigma = 1.5;
  EXPECT_THROW(solve_fixed_epsilon(dom, s, 0.02), ArgumentError);
}

TEST(Trend, LogLogSlope) {
  EXPECT_NEAR(loglog_slope({1, 2, 4}, {3, 6, 12}), 1.0, 1e-12);
  EXPECT_NEAR(loglog_slope({1, 2, 4}, {1, 4, 16}), 2.0, 1e-12);
  EXPECT_TRUE(std::isnan(loglog_slope({1}, {1})));
}
