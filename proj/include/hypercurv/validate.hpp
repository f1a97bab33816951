#pragma once

// Property suite over random samples: structure conditions of the curvature
// quotients, pointwise geometry identities, derivative consistency of G and
// the gamma threshold analysis. No PDE solve. Deterministic for a given seed.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hypercurv/barriers.hpp"
#include "hypercurv/hypgeom.hpp"
#include "hypercurv/pde.hpp"
#include "hypercurv/symfunc.hpp"

namespace hcurv {

struct PropertyResult {
  std::string name;
  long samples = 0;
  long failures = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  std::vector<std::string> counterexamples;  ///< at most 20

  bool passed() const { return failures == 0; }
};

struct ValidationReport {
  unsigned long long seed = 0;
  std::vector<PropertyResult> properties;
  double gradient_term_constant = 0.0;  ///< fitted C in sum|G^s| <= (C/u)(1 + sum F^ii)

  bool passed() const {
    for (const auto& p : properties)
      if (!p.passed()) return false;
    return true;
  }
};

struct ValidateOptions {
  unsigned long long seed = 20240531ull;
  int cone_samples = 10000;
  int jet_samples = 1000;
  int gamma_samples = 1000;
  /// gamma(y, a); replaceable so a corrupted formula can be fed in
  std::function<double(double, double)> gamma = [](double y, double a) { return gamma_poly<double>(y, a); };
};

namespace detail {

class Recorder {
public:
  Recorder(std::string name, double tol) { r_.name = std::move(name), r_.tolerance = tol; }

  // err is compared against the tolerance; `what` builds the message lazily
  template <class Msg>
  void check(double err, Msg&& what) {
    ++r_.samples;
    if (std::isnan(err) || err > r_.max_error) r_.max_error = std::isnan(err) ? INFINITY : err;
    if (!(err <= r_.tolerance)) {
      ++r_.failures;
      if (r_.counterexamples.size() < 20) r_.counterexamples.push_back(what());
    }
  }
  PropertyResult take() { return std::move(r_); }

private:
  PropertyResult r_;
};

inline std::string vec_str(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ')';
  return os.str();
}

inline std::string spec_str(const CurvatureFunctionSpec& s) {
  return "n=" + std::to_string(s.n) + " k=" + std::to_string(s.k) + " l=" + std::to_string(s.l);
}

inline std::vector<CurvatureFunctionSpec> all_specs(int nmax) {
  std::vector<CurvatureFunctionSpec> out;
  for (int n = 2; n <= nmax; ++n)
    for (int k = 1; k <= n; ++k)
      for (int l = 0; l < k; ++l) out.push_back({n, k, l});
  return out;
}

struct Sampler {
  std::mt19937_64 rng;
  explicit Sampler(unsigned long long seed) : rng(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  double log_uniform(double a, double b) { return std::exp(uniform(std::log(a), std::log(b))); }
  int index(size_t n) { return static_cast<int>(std::uniform_int_distribution<size_t>(0, n - 1)(rng)); }
  std::vector<double> cone(int n) {
    std::vector<double> v(n);
    for (auto& x : v) x = log_uniform(0.1, 10.0);
    return v;
  }
  /// Admissible jet with prescribed positive spectrum for Av.
  PointJet<2> jet() {
    PointJet<2> j;
    j.u = log_uniform(0.1, 2.0);
    j.Du << uniform(-1.5, 1.5), uniform(-1.5, 1.5);
    const double th = uniform(0.0, 3.141592653589793);
    Mat<2> Q;
    Q << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    const Vec<2> ev(log_uniform(0.2, 3.0), log_uniform(0.2, 3.0));
    const Mat<2> Av = Q * ev.asDiagonal() * Q.transpose();
    const double w = std::sqrt(1.0 + j.Du.squaredNorm());
    const Mat<2> gl = gamma_matrix<2>(j.Du).lower;
    j.D2u = gl * (w * Av - Mat<2>::Identity()) * gl / j.u;
    j.D2u = 0.5 * (j.D2u + j.D2u.transpose());
    return j;
  }
};

}  // namespace detail

inline ValidationReport run_property_suite(const ValidateOptions& opt = {}) {
  using detail::Recorder;
  ValidationReport rep;
  rep.seed = opt.seed;
  detail::Sampler S(opt.seed);
  const auto specs = detail::all_specs(5);

  // -- structure conditions of f -------------------------------------------
  {
    Recorder norm("symfunc.normalization", 1e-12);
    for (const auto& sp : specs) {
      std::vector<double> ones(sp.n, 1.0);
      norm.check(std::abs(eval_f(sp, ones) - 1.0), [&] { return detail::spec_str(sp); });
    }
    rep.properties.push_back(norm.take());
  }
  Recorder homog("symfunc.homogeneity", 1e-10), mean("symfunc.mean_bound", 1e-12),
      gsum("symfunc.gradient_sum", 1e-10), euler("symfunc.euler_identity", 1e-10),
      concave("symfunc.concavity_midpoint", 1e-10), gpos("symfunc.gradient_positive", 0.0),
      gfd("symfunc.gradient_fd", 1e-6);
  for (int s = 0; s < opt.cone_samples; ++s) {
    const auto& sp = specs[S.index(specs.size())];
    const auto lam = S.cone(sp.n), mu = S.cone(sp.n);
    const double t = S.uniform(0.1, 10.0);
    const double f = eval_f(sp, lam);
    auto msg = [&] { return detail::spec_str(sp) + " lambda=" + detail::vec_str(lam); };

    std::vector<double> tl(lam);
    for (auto& x : tl) x *= t;
    homog.check(std::abs(eval_f(sp, tl) - t * f) / (t * f), msg);

    double m = 0.0;
    for (double x : lam) m += x / sp.n;
    mean.check(f - m, msg);

    const auto g = grad_f(sp, lam);
    double sum = 0.0, dot = 0.0, gmin = INFINITY;
    for (int i = 0; i < sp.n; ++i) sum += g[i], dot += g[i] * lam[i], gmin = std::min(gmin, g[i]);
    gsum.check(1.0 - sum, msg);
    euler.check(std::abs(dot - f) / f, msg);
    gpos.check(gmin > 0.0 ? 0.0 : 1.0, msg);

    std::vector<double> mid(sp.n);
    for (int i = 0; i < sp.n; ++i) mid[i] = 0.5 * (lam[i] + mu[i]);
    concave.check(0.5 * (f + eval_f(sp, mu)) - eval_f(sp, mid),
                  [&] { return msg() + " mu=" + detail::vec_str(mu); });

    if (s % 10 == 0) {  // finite differences at step 1e-5
      double worst = 0.0;
      for (int i = 0; i < sp.n; ++i) {
        auto p = lam, q = lam;
        p[i] += 1e-5, q[i] -= 1e-5;
        const double fd = (eval_f(sp, p) - eval_f(sp, q)) / 2e-5;
        worst = std::max(worst, std::abs(fd - g[i]) / std::abs(g[i]));
      }
      gfd.check(worst, msg);
    }
  }
  for (auto* r : {&homog, &mean, &gsum, &euler, &concave, &gpos, &gfd}) rep.properties.push_back(r->take());

  // -- pointwise geometry and derivative consistency -------------------------
  const CurvatureFunctionSpec n2[] = {{2, 1, 0}, {2, 2, 0}, {2, 2, 1}};
  Recorder eig("hypgeom.kappa_relation", 1e-10), shared("hypgeom.shared_frame", 1e-10),
      adm("hypgeom.admissible_cholesky", 0.0), fid1("hypgeom.Fij_trace_A", 1e-10), fid2("hypgeom.Fij_trace_A2", 1e-10),
      dst("pde.G_st_fd", 1e-6), ds("pde.G_s_fd", 1e-6), du("pde.G_u_fd", 1e-6), ell("pde.G_st_positive", 0.0);
  double fitC = 0.0;
  for (int s = 0; s < opt.jet_samples; ++s) {
    const auto& sp = n2[s % 3];
    const auto jet = S.jet();
    auto msg = [&] {
      std::ostringstream os;
      os.precision(17);
      os << detail::spec_str(sp) << " u=" << jet.u << " Du=(" << jet.Du[0] << ", " << jet.Du[1] << ") D2u=("
         << jet.D2u(0, 0) << ", " << jet.D2u(0, 1) << ", " << jet.D2u(1, 1) << ")";
      return os.str();
    };
    const auto cd = vertical_curvature_data<2>(jet);
    const Vec<2> kE = sym_eigen<2>(cd.AE).values;
    eig.check((cd.kappa - (jet.u * kE + Vec<2>::Constant(1.0 / cd.w))).cwiseAbs().maxCoeff(), msg);
    const Mat<2> DE = cd.frame.transpose() * cd.AE * cd.frame;
    shared.check(std::abs(DE(0, 1)) / (1.0 + DE.cwiseAbs().maxCoeff()), msg);
    adm.check(cd.admissible == (cd.kappa.minCoeff() > 0.0) ? 0.0 : 1.0, msg);

    const auto fd = F_value_and_derivative<2>(sp, cd.Av);
    const double t1 = (fd.Fij * cd.Av).trace(), t2 = (fd.Fij * cd.Av * cd.Av).trace();
    const double e1 = fd.f_i.dot(fd.lambda), e2 = fd.f_i.dot(fd.lambda.cwiseProduct(fd.lambda));
    fid1.check(std::abs(t1 - e1) / (1.0 + std::abs(e1)), msg);
    fid2.check(std::abs(t2 - e2) / (1.0 + std::abs(e2)), msg);

    const auto gd = G_derivatives<2>(jet, sp);
    ell.check(sym_eigen<2>(gd.G_st).values[0] > 0.0 ? 0.0 : 1.0, msg);
    fitC = std::max(fitC, jet.u * gd.G_s.cwiseAbs().sum() / (1.0 + gd.trace_Fij));

    // central differences of G_eval, relative to the size of each block
    const double hstep = 1e-6;
    auto G = [&](const PointJet<2>& j) { return G_eval<2>(j, sp); };
    Mat<2> Gst_fd;
    for (int a = 0; a < 2; ++a)
      for (int b = a; b < 2; ++b) {
        auto p = jet, q = jet;
        const double step = hstep * (1.0 + std::abs(jet.D2u(a, b)));
        p.D2u(a, b) += step, q.D2u(a, b) -= step;
        if (a != b) p.D2u(b, a) += step, q.D2u(b, a) -= step;
        const double d = (G(p) - G(q)) / (2 * step);
        Gst_fd(a, b) = Gst_fd(b, a) = (a == b) ? d : 0.5 * d;
      }
    dst.check((Gst_fd - gd.G_st).cwiseAbs().maxCoeff() / gd.G_st.cwiseAbs().maxCoeff(), msg);
    Vec<2> Gs_fd;
    for (int a = 0; a < 2; ++a) {
      auto p = jet, q = jet;
      const double step = hstep * (1.0 + std::abs(jet.Du[a]));
      p.Du[a] += step, q.Du[a] -= step;
      Gs_fd[a] = (G(p) - G(q)) / (2 * step);
    }
    const double gs_scale = std::max(gd.G_s.cwiseAbs().maxCoeff(), std::abs(gd.G) * 1e-3);
    ds.check((Gs_fd - gd.G_s).cwiseAbs().maxCoeff() / gs_scale, msg);
    {
      auto p = jet, q = jet;
      const double step = hstep * jet.u;
      p.u += step, q.u -= step;
      du.check(std::abs((G(p) - G(q)) / (2 * step) - gd.G_u) / std::abs(gd.G_u), msg);
    }
  }
  for (auto* r : {&eig, &shared, &adm, &fid1, &fid2, &dst, &ds, &du, &ell}) rep.properties.push_back(r->take());
  rep.gradient_term_constant = fitC;

  // -- gamma analysis ----------------------------------------------------------
  {
    Recorder routes("gamma.two_routes", 1e-12), sign("gamma.threshold_sign", 0.0), ends("gamma.endpoints", 1e-13),
        thr("gamma.threshold_zero", 1e-12), exact("gamma.endpoints_rational", 0.0);
    for (int s = 0; s < opt.gamma_samples; ++s) {
      const double a = S.uniform(1e-3, 1.0 - 1e-3);
      const auto g = gamma_analysis(a, opt.gamma);
      auto msg = [&] {
        std::ostringstream os;
        os.precision(17);
        os << "a=" << a << " cubic=" << g.gamma_cubic << " closed=" << g.gamma_closed;
        return os.str();
      };
      routes.check(std::abs(g.gamma_cubic - g.gamma_closed), msg);
      if (std::abs(a * a - 0.125) > 1e-10) sign.check((g.gamma_cubic > 0.0) == (a * a > 0.125) ? 0.0 : 1.0, msg);
      ends.check(std::max(std::abs(opt.gamma(a, a) - a), std::abs(opt.gamma(1.0, a) - a)), msg);
    }
    for (double a : {0.30, 0.34, 0.36, 0.40}) {
      const auto g = gamma_analysis(a, opt.gamma);
      sign.check((g.gamma_cubic > 0.0) == (a * a > 0.125) && (g.gamma_closed > 0.0) == (a * a > 0.125) ? 0.0 : 1.0,
                 [&] { return "a=" + std::to_string(a) + " cubic=" + std::to_string(g.gamma_cubic); });
    }
    const double a0 = 1.0 / std::sqrt(8.0);
    const auto g0 = gamma_analysis(a0, opt.gamma);
    thr.check(std::max(std::abs(g0.gamma_cubic), std::abs(g0.gamma_closed)), [&] {
      return "a=1/sqrt(8): cubic=" + std::to_string(g0.gamma_cubic) + " closed=" + std::to_string(g0.gamma_closed);
    });
    using Q = boost::multiprecision::cpp_rational;
    for (int q = 2; q <= 40; ++q)
      for (int p = 1; p < q; ++p) {
        const Q a(p, q);
        const bool ok = gamma_poly<Q>(a, a) == a && gamma_poly<Q>(Q(1), a) == a;
        exact.check(ok ? 0.0 : 1.0, [&] { return "a=" + std::to_string(p) + "/" + std::to_string(q); });
      }
    for (auto* r : {&routes, &sign, &ends, &thr, &exact}) rep.properties.push_back(r->take());
  }
  return rep;
}

}  // namespace hcurv
