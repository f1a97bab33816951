#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <vector>

#include "hypercurv/symfunc.hpp"

using namespace hcurv;

TEST(ElementarySymmetric, NormalizedValues) {
  const std::vector<double> ones{1, 1, 1}, l123{1, 2, 3};
  EXPECT_NEAR(elementary_symmetric_normalized(ones, 2), 1.0, 1e-15);
  EXPECT_NEAR(elementary_symmetric_normalized(l123, 2), 11.0 / 3.0, 1e-14);
  EXPECT_DOUBLE_EQ(elementary_symmetric_normalized(l123, 0), 1.0);
}

TEST(ElementarySymmetric, Binomial) {
  EXPECT_DOUBLE_EQ(binomial(5, 2), 10.0);
  EXPECT_DOUBLE_EQ(binomial(4, 0), 1.0);
  EXPECT_DOUBLE_EQ(binomial(3, 4), 0.0);
}

TEST(Cone, Membership) {
  EXPECT_TRUE(cone_contains(std::vector<double>{1, 1}));
  EXPECT_FALSE(cone_contains(std::vector<double>{1, 0}));
  EXPECT_FALSE(cone_contains(std::vector<double>{2, -0.1}));
}

TEST(EvalF, KnownQuotients) {
  EXPECT_NEAR(eval_f({2, 1, 0}, std::vector<double>{1, 3}), 2.0, 1e-14);
  EXPECT_NEAR(eval_f({3, 3, 0}, std::vector<double>{2, 2, 2}), 2.0, 1e-14);
  EXPECT_NEAR(eval_f({2, 2, 1}, std::vector<double>{1, 1}), 1.0, 1e-14);
  // harmonic-type quotient: 2 l1 l2 / (l1 + l2)
  EXPECT_NEAR(eval_f({2, 2, 1}, std::vector<double>{1, 3}), 1.5, 1e-14);
}

TEST(EvalF, RejectsOutsideCone) {
  EXPECT_THROW(eval_f({2, 1, 0}, std::vector<double>{1, -1}), DomainError);
  EXPECT_THROW(eval_f({2, 1, 0}, std::vector<double>{1, 1, 1}), ArgumentError);
}

TEST(Spec, Validation) {
  EXPECT_THROW((CurvatureFunctionSpec{2, 3, 0}.validate()), ArgumentError);
  EXPECT_THROW((CurvatureFunctionSpec{2, 1, 1}.validate()), ArgumentError);
  EXPECT_THROW((CurvatureFunctionSpec{1, 1, 0}.validate()), ArgumentError);
  EXPECT_NO_THROW((CurvatureFunctionSpec{5, 4, 2}.validate()));
}

TEST(GradF, Examples) {
  for (auto lam : {std::vector<double>{1, 1}, std::vector<double>{0.3, 4.0}}) {
    const auto g = grad_f({2, 1, 0}, lam);
    EXPECT_NEAR(g[0], 0.5, 1e-14);
    EXPECT_NEAR(g[1], 0.5, 1e-14);
  }
  const auto g = grad_f({2, 2, 0}, std::vector<double>{1, 1});
  EXPECT_NEAR(g[0], 0.5, 1e-14);
  EXPECT_NEAR(g[1], 0.5, 1e-14);
}

TEST(GradF, SumsToOneAtUmbilic) {
  for (int n = 2; n <= 5; ++n)
    for (int k = 1; k <= n; ++k)
      for (int l = 0; l < k; ++l) {
        const auto g = grad_f({n, k, l}, std::vector<double>(n, 1.0));
        double s = 0.0;
        for (double x : g) s += x;
        EXPECT_NEAR(s, 1.0, 1e-12) << "n=" << n << " k=" << k << " l=" << l;
      }
}

TEST(Asymptotics, Limits) {
  EXPECT_NEAR(asymptotic_limit({2, 2, 1}), 2.0, 1e-14);
  EXPECT_NEAR(asymptotic_limit({3, 3, 1}), std::sqrt(3.0), 1e-14);
  EXPECT_TRUE(std::isinf(asymptotic_limit({2, 1, 0})));
  EXPECT_NEAR(asymptotic_excess({2, 2, 1}, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(epsilon0_surrogate({2, 2, 1}), 1.0, 1e-14);
}

TEST(Asymptotics, ExcessIsNondecreasingAndApproachesLimit) {
  const CurvatureFunctionSpec s{3, 3, 1};
  double prev = 0.0;
  for (double R : {0.0, 0.5, 2.0, 10.0, 1e3, 1e6}) {
    const double v = asymptotic_excess(s, R);
    EXPECT_GE(v, prev);
    EXPECT_LE(v, asymptotic_limit(s) + 1e-12);
    prev = v;
  }
  EXPECT_NEAR(prev, asymptotic_limit(s), 1e-5);
  EXPECT_THROW(asymptotic_excess(s, -1.0), ArgumentError);
}
