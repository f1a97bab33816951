#pragma once

// The operator G(D2u, Du, u) = F(Av[u]) / u and its first derivatives.

#include <cmath>

#include "hypercurv/hypgeom.hpp"

namespace hcurv {

namespace detail {

template <int N>
FDerivative<N> F_at_jet(const PointJet<N>& jet, const CurvatureFunctionSpec& spec,
                        CurvatureData<N>& cd) {
  cd = vertical_curvature_data<N>(jet);
  if (!(jet.u > 0.0) || cd.kappa.minCoeff() <= 0.0)
    throw AdmissibilityError("jet is not admissible (u <= 0 or some kappa_i <= 0)");
  return F_value_and_derivative<N>(spec, cd.Av);
}

}  // namespace detail

template <int N>
double G_eval(const PointJet<N>& jet, const CurvatureFunctionSpec& spec) {
  CurvatureData<N> cd;
  return detail::F_at_jet<N>(jet, spec, cd).F / jet.u;
}

template <int N>
struct GDerivatives {
  double G = 0.0;
  double F = 0.0;           ///< u G = F(Av)
  Mat<N> G_st;              ///< dG/du_st
  Vec<N> G_s;               ///< dG/du_s
  double G_u = 0.0;         ///< dG/du
  double trace_Fij = 0.0;   ///< sum F^{ii}
  double w = 1.0;
  Vec<N> kappa;
};

/// G^{st} = (1/w) gamma F^{ij} gamma, G_u = -(sum F^{ii}) / (u^2 w), and G^s by the
/// three-term expression in F^{ij}, a_ij and gamma^{ij}.
template <int N>
GDerivatives<N> G_derivatives(const PointJet<N>& jet, const CurvatureFunctionSpec& spec) {
  CurvatureData<N> cd;
  const FDerivative<N> fd = detail::F_at_jet<N>(jet, spec, cd);
  const double u = jet.u;
  const double w = cd.w;
  const Mat<N> gu = gamma_matrix<N>(jet.Du).upper;
  const Mat<N>& Fij = fd.Fij;
  const Mat<N>& a = cd.Av;
  const Vec<N>& p = jet.Du;

  GDerivatives<N> out;
  out.F = fd.F;
  out.G = fd.F / u;
  out.w = w;
  out.kappa = cd.kappa;
  out.trace_Fij = Fij.trace();
  out.G_st = gu * Fij * gu / w;
  out.G_u = -out.trace_Fij / (u * u * w);

  const double Fa = (Fij.cwiseProduct(a)).sum();  // F^{ij} a_ij
  const Mat<N> FA = Fij * a;                       // (F a)_{jk} = F^{ji} a_ik
  const Vec<N> Fp = Fij * p;                       // F^{ij} u_i
  for (int s = 0; s < N; ++s) {
    double t2 = 0.0;
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k)
        t2 += FA(j, k) * (w * p[k] * gu(s, j) + p[j] * gu(k, s));
    t2 /= (1.0 + w);
    double t3 = 0.0;
    for (int j = 0; j < N; ++j) t3 += Fp[j] * gu(s, j);
    out.G_s[s] = -p[s] / (w * w * u) * Fa - 2.0 / (w * u) * t2 + 2.0 / (w * w * u) * t3;
  }
  return out;
}

}  // namespace hcurv
