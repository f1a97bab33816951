#pragma once

// Curvature quotients f = (sigma_k / sigma_l)^{1/(k-l)} on the positive cone.
//
// sigma_k here is the *normalized* elementary symmetric polynomial
// e_k(lambda) / binom(n, k), so that f(1, ..., 1) = 1 for every (k, l).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hypercurv/errors.hpp"

namespace hcurv {

inline constexpr int kMaxDim = 16;

/// Selects f = (sigma_k / sigma_l)^{1/(k-l)} in dimension n.
struct CurvatureFunctionSpec {
  int n = 2;
  int k = 1;
  int l = 0;

  void validate() const {
    if (n < 2 || n > kMaxDim)
      throw ArgumentError("curvature spec: n must lie in [2, " + std::to_string(kMaxDim) + "]");
    if (k < 1 || k > n) throw ArgumentError("curvature spec: k must satisfy 1 <= k <= n");
    if (l < 0 || l >= k) throw ArgumentError("curvature spec: l must satisfy 0 <= l < k");
  }

  std::string name() const {
    return "(sigma_" + std::to_string(k) + "/sigma_" + std::to_string(l) + ")^(1/" +
           std::to_string(k - l) + "), n=" + std::to_string(n);
  }

  friend bool operator==(const CurvatureFunctionSpec&, const CurvatureFunctionSpec&) = default;
};

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

namespace detail {

// Unnormalized e_0..e_kmax of lambda, skipping component `skip` (or none if -1).
// Incremental product expansion prod_i (1 + lambda_i t).
inline void elementary_all(std::span<const double> lambda, int kmax, int skip,
                           std::array<double, kMaxDim + 1>& e) {
  e.fill(0.0);
  e[0] = 1.0;
  int seen = 0;
  for (int i = 0; i < static_cast<int>(lambda.size()); ++i) {
    if (i == skip) continue;
    ++seen;
    for (int j = std::min(seen, kmax); j >= 1; --j) e[j] += lambda[i] * e[j - 1];
  }
}

}  // namespace detail

/// e_k(lambda) / binom(n, k); e_0 = 1.
inline double elementary_symmetric_normalized(std::span<const double> lambda, int k) {
  const int n = static_cast<int>(lambda.size());
  if (n > kMaxDim) throw ArgumentError("elementary_symmetric_normalized: dimension too large");
  if (k < 0 || k > n) throw ArgumentError("elementary_symmetric_normalized: k out of range [0, n]");
  std::array<double, kMaxDim + 1> e{};
  detail::elementary_all(lambda, k, -1, e);
  return e[k] / binomial(n, k);
}

/// Strict membership in the positive cone K_n^+; no tolerance.
inline bool cone_contains(std::span<const double> lambda) {
  return std::all_of(lambda.begin(), lambda.end(), [](double x) { return x > 0.0; });
}

namespace detail {

inline void require_cone(const CurvatureFunctionSpec& spec, std::span<const double> lambda,
                         const char* who) {
  if (static_cast<int>(lambda.size()) != spec.n)
    throw ArgumentError(std::string(who) + ": lambda has wrong length");
  if (!cone_contains(lambda))
    throw DomainError(std::string(who) + ": lambda outside the positive cone",
                      std::vector<double>(lambda.begin(), lambda.end()));
}

}  // namespace detail

inline double eval_f(const CurvatureFunctionSpec& spec, std::span<const double> lambda) {
  detail::require_cone(spec, lambda, "eval_f");
  std::array<double, kMaxDim + 1> e{};
  detail::elementary_all(lambda, spec.k, -1, e);
  const double sk = e[spec.k] / binomial(spec.n, spec.k);
  const double sl = e[spec.l] / binomial(spec.n, spec.l);
  const int p = spec.k - spec.l;
  const double q = sk / sl;
  return p == 1 ? q : (p == 2 ? std::sqrt(q) : std::pow(q, 1.0 / p));
}

/// Writes f_i = df/dlambda_i into `out` and returns f. Uses
/// d e_k / d lambda_i = e_{k-1}(lambda without component i).
inline double eval_f_and_grad(const CurvatureFunctionSpec& spec, std::span<const double> lambda,
                              std::span<double> out) {
  const double f = eval_f(spec, lambda);
  const int n = spec.n;
  std::array<double, kMaxDim + 1> e{};
  detail::elementary_all(lambda, spec.k, -1, e);
  const double ek = e[spec.k];
  const double el = e[spec.l];
  const double scale = f / (spec.k - spec.l);
  for (int i = 0; i < n; ++i) {
    std::array<double, kMaxDim + 1> ei{};
    detail::elementary_all(lambda, spec.k - 1, i, ei);
    const double dk = ei[spec.k - 1] / ek;
    const double dl = spec.l == 0 ? 0.0 : ei[spec.l - 1] / el;
    out[i] = scale * (dk - dl);
  }
  return f;
}

inline std::vector<double> grad_f(const CurvatureFunctionSpec& spec, std::span<const double> lambda) {
  std::vector<double> g(lambda.size());
  eval_f_and_grad(spec, lambda, g);
  return g;
}

/// f(1, ..., 1, 1 + R). Nondecreasing in R.
inline double asymptotic_excess(const CurvatureFunctionSpec& spec, double R) {
  if (!(R >= 0.0)) throw ArgumentError("asymptotic_excess: R must be nonnegative");
  std::vector<double> lambda(spec.n, 1.0);
  lambda.back() += R;
  return eval_f(spec, lambda);
}

/// lim_{R -> inf} f(1, ..., 1, 1 + R) = (k/l)^{1/(k-l)}; +inf when l = 0.
inline double asymptotic_limit(const CurvatureFunctionSpec& spec) {
  if (spec.l == 0) return std::numeric_limits<double>::infinity();
  return std::pow(static_cast<double>(spec.k) / spec.l, 1.0 / (spec.k - spec.l));
}

/// Reported stand-in for epsilon_0 of the asymptotic condition: limit - 1.
inline double epsilon0_surrogate(const CurvatureFunctionSpec& spec) {
  return asymptotic_limit(spec) - 1.0;
}

}  // namespace hcurv
