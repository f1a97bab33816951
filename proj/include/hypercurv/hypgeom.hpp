#pragma once

// Pointwise geometry of vertical and radial graphs in the half-space model
// of hyperbolic space: curvature matrices, principal curvatures and the
// spectral calculus F(A) = f(lambda(A)).

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "hypercurv/errors.hpp"
#include "hypercurv/symfunc.hpp"

namespace hcurv {

template <int N>
using Vec = Eigen::Matrix<double, N, 1>;
template <int N>
using Mat = Eigen::Matrix<double, N, N>;

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending,
/// eigenvectors in the columns of `vectors`.
template <int N>
struct SymEigen {
  Vec<N> values;
  Mat<N> vectors;
};

template <int N>
SymEigen<N> sym_eigen(const Mat<N>& A) {
  SymEigen<N> out;
  if constexpr (N == 2) {
    const double a = A(0, 0), b = 0.5 * (A(0, 1) + A(1, 0)), c = A(1, 1);
    const double m = 0.5 * (a + c);
    const double d = 0.5 * (a - c);
    const double r = std::hypot(d, b);
    out.values << m - r, m + r;
    const double theta = 0.5 * std::atan2(2.0 * b, a - c);
    const double cs = std::cos(theta), sn = std::sin(theta);
    // column 1 pairs with the larger eigenvalue
    out.vectors << -sn, cs, cs, sn;
  } else {
    Eigen::SelfAdjointEigenSolver<Mat<N>> es(A);
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors();
  }
  return out;
}

/// Height u > 0, gradient Du and Hessian D2u of a vertical graph at a point.
template <int N>
struct PointJet {
  double u = 1.0;
  Vec<N> Du = Vec<N>::Zero();
  Mat<N> D2u = Mat<N>::Zero();

  void validate() const {
    if (!(u > 0.0)) throw ArgumentError("PointJet: height must be positive");
    if ((D2u - D2u.transpose()).cwiseAbs().maxCoeff() > 1e-14 * (1.0 + D2u.cwiseAbs().maxCoeff()))
      throw ArgumentError("PointJet: Hessian is not symmetric");
  }
};

template <int N>
struct GammaPair {
  Mat<N> upper;  ///< gamma^{ij} = delta_ij - u_i u_j / (w (1 + w))
  Mat<N> lower;  ///< gamma_{ij} = delta_ij + u_i u_j / (1 + w), the inverse
};

template <int N>
GammaPair<N> gamma_matrix(const Vec<N>& Du) {
  const double w = std::sqrt(1.0 + Du.squaredNorm());
  const Mat<N> outer = Du * Du.transpose();
  GammaPair<N> g;
  g.upper = Mat<N>::Identity() - outer / (w * (1.0 + w));
  g.lower = Mat<N>::Identity() + outer / (1.0 + w);
  return g;
}

template <int N>
struct CurvatureData {
  Mat<N> Av;       ///< hyperbolic curvature matrix
  Mat<N> AE;       ///< Euclidean curvature matrix
  Vec<N> kappa;    ///< hyperbolic principal curvatures, ascending
  Mat<N> frame;    ///< shared eigenvectors of Av and AE (columns)
  double w = 1.0;  ///< sqrt(1 + |Du|^2)
  double nu_vertical = 1.0;  ///< nu^{n+1} = 1 / w
  bool admissible = false;   ///< {delta_ij + u_i u_j + u u_ij} > 0
};

/// Av = (1/w)(I + u gamma D2u gamma), AE = (1/w) gamma D2u gamma.
template <int N>
CurvatureData<N> vertical_curvature_data(const PointJet<N>& jet) {
  CurvatureData<N> cd;
  cd.w = std::sqrt(1.0 + jet.Du.squaredNorm());
  cd.nu_vertical = 1.0 / cd.w;
  const Mat<N> gu = gamma_matrix<N>(jet.Du).upper;
  const Mat<N> conj = gu * jet.D2u * gu;
  cd.AE = conj / cd.w;
  cd.Av = (Mat<N>::Identity() + jet.u * conj) / cd.w;
  cd.Av = 0.5 * (cd.Av + cd.Av.transpose());
  cd.AE = 0.5 * (cd.AE + cd.AE.transpose());
  const auto es = sym_eigen<N>(cd.Av);
  cd.kappa = es.values;
  cd.frame = es.vectors;
  const Mat<N> convexity =
      Mat<N>::Identity() + jet.Du * jet.Du.transpose() + jet.u * jet.D2u;
  Eigen::LLT<Mat<N>> llt(0.5 * (convexity + convexity.transpose()));
  cd.admissible = llt.info() == Eigen::Success;
  return cd;
}

/// Hyperbolic curvature matrix of a radial graph X = e^v z over the upper
/// hemisphere, in an orthonormal frame at z: (1/w)(y gamma v_hess gamma - (e.grad v) I).
template <int N>
Mat<N> radial_curvature_matrix(const Vec<N>& v_grad, const Mat<N>& v_hess, double y,
                               double e_dot_grad) {
  if (!(y > 0.0)) throw DomainError("radial_curvature_matrix: y must be positive", {y});
  const double w = std::sqrt(1.0 + v_grad.squaredNorm());
  const Mat<N> gu = gamma_matrix<N>(v_grad).upper;
  Mat<N> A = (y * gu * v_hess * gu - e_dot_grad * Mat<N>::Identity()) / w;
  return 0.5 * (A + A.transpose());
}

template <int N>
struct FDerivative {
  double F = 0.0;
  Mat<N> Fij;      ///< dF/da_ij, symmetric, eigenvalues f_1..f_n
  Vec<N> lambda;   ///< eigenvalues of A, ascending
  Vec<N> f_i;      ///< df/dlambda_i at lambda
  Mat<N> frame;
};

/// F(A) = f(lambda(A)) and F^{ij}(A) = sum_m f_m v_m v_m^T.
template <int N>
FDerivative<N> F_value_and_derivative(const CurvatureFunctionSpec& spec, const Mat<N>& A) {
  if (spec.n != N) throw ArgumentError("F_value_and_derivative: spec.n does not match matrix size");
  const auto es = sym_eigen<N>(A);
  FDerivative<N> out;
  out.lambda = es.values;
  out.frame = es.vectors;
  std::array<double, N> lam{}, grad{};
  for (int i = 0; i < N; ++i) lam[i] = es.values[i];
  if (!cone_contains(lam))
    throw DomainError("F_value_and_derivative: spectrum outside the positive cone",
                      std::vector<double>(lam.begin(), lam.end()));
  out.F = eval_f_and_grad(spec, lam, grad);
  for (int i = 0; i < N; ++i) out.f_i[i] = grad[i];
  out.Fij = es.vectors * out.f_i.asDiagonal() * es.vectors.transpose();
  return out;
}

}  // namespace hcurv
