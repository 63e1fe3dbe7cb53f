#ifndef TRANSVERSE_EQUILIBRIUM_HPP
#define TRANSVERSE_EQUILIBRIUM_HPP

// Linear analysis at the hyperbolic point O = (0, 0).

#include <algorithm>
#include <array>
#include <cmath>

#include "transverse/errors.hpp"
#include "transverse/linalg.hpp"
#include "transverse/model.hpp"

namespace transverse {

struct Linearization {
  Mat2 A;     // -D^2 V(0, 0)
  Mat2 Bmat;  // B(0, 0)
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Mat2 M;   // columns: configuration parts v_k of the eigenvectors of Bmat A
  Mat2 N;   // Bmat^{-1} M
  Mat2 Eu;  // N Lambda M^{-1}, Hessian of the unstable generating function at O
  Mat2 Es;  // -Eu
};

/// Linearization from A and B directly. Eigenvalues of Bmat A come from the
/// symmetric similarity L^T A L with Bmat = L L^T.
inline Linearization linearize(const Mat2& A, const Mat2& Bmat) {
  if (!check_positive_definite(Bmat)) throw HypothesisError("B(0,0) is not positive definite");
  const Mat2 L = cholesky(Bmat);
  const Mat2 C = L.transpose() * A * L;
  const SymEigen eig = sym_eigen(Mat2::sym(C.a, 0.5 * (C.b + C.c), C.d));
  if (!(eig.values[0] > 0.0)) throw HypothesisError("equilibrium is not hyperbolic: Bmat*A has a non-positive eigenvalue");

  std::array<double, 2> mu = eig.values;
  std::array<std::array<double, 2>, 2> v{L * eig.vectors[0], L * eig.vectors[1]};
  // Put first an eigenvector tangent to the loop line q2 = 0, if any.
  auto aligned = [](const std::array<double, 2>& x) {
    return std::abs(x[1]) <= 1e-12 * std::hypot(x[0], x[1]);
  };
  if (!aligned(v[0]) && aligned(v[1])) {
    std::swap(v[0], v[1]);
    std::swap(mu[0], mu[1]);
  }

  Linearization lin;
  lin.A = A;
  lin.Bmat = Bmat;
  lin.lambda1 = std::sqrt(mu[0]);
  lin.lambda2 = std::sqrt(mu[1]);
  lin.M = Mat2::columns(v[0], v[1]);
  lin.N = Bmat.inverse() * lin.M;
  lin.Eu = lin.N * Mat2::diag(lin.lambda1, lin.lambda2) * lin.M.inverse();
  // Symmetric up to rounding; remove the asymmetric part.
  const double off = 0.5 * (lin.Eu.b + lin.Eu.c);
  lin.Eu.b = off;
  lin.Eu.c = off;
  lin.Es = -1.0 * lin.Eu;
  return lin;
}

inline Linearization linearize(const HamiltonianModel& m) {
  const Mat2 A = hessian_matrix_A(m);
  if (!check_positive_definite(A)) {
    throw HypothesisError("H1 failed: V has no nondegenerate maximum at the origin");
  }
  return linearize(A, m.B0(0.0));
}

/// max_k |Bmat A v_k - lambda_k^2 v_k| / (|Bmat A| |v_k|).
inline double eigen_residual(const Linearization& lin) {
  const Mat2 BA = lin.Bmat * lin.A;
  const std::array<double, 2> lam{lin.lambda1, lin.lambda2};
  double worst = 0.0;
  for (int k = 0; k < 2; ++k) {
    const auto v = lin.M.column(k);
    const auto w = BA * v;
    const double r = std::hypot(w[0] - lam[k] * lam[k] * v[0], w[1] - lam[k] * lam[k] * v[1]);
    worst = std::max(worst, r / (std::max(1.0, BA.max_abs()) * std::hypot(v[0], v[1])));
  }
  return worst;
}

/// |Eu Bmat Eu - A| relative to max(1, |A|).
inline double generating_identity_residual(const Linearization& lin) {
  const Mat2 r = lin.Eu * lin.Bmat * lin.Eu - lin.A;
  return r.max_abs() / std::max(1.0, lin.A.max_abs());
}

}  // namespace transverse

#endif  // TRANSVERSE_EQUILIBRIUM_HPP
