#ifndef TRANSVERSE_LINALG_HPP
#define TRANSVERSE_LINALG_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "transverse/errors.hpp"

namespace transverse {

/// Dense 2x2 matrix, row-major.
struct Mat2 {
  double a = 0, b = 0, c = 0, d = 0;  // [[a, b], [c, d]]

  static Mat2 identity() { return {1, 0, 0, 1}; }
  static Mat2 diag(double x, double y) { return {x, 0, 0, y}; }
  static Mat2 sym(double xx, double xy, double yy) { return {xx, xy, xy, yy}; }
  static Mat2 columns(std::array<double, 2> u, std::array<double, 2> v) { return {u[0], v[0], u[1], v[1]}; }

  double operator()(int i, int j) const {
    return i == 0 ? (j == 0 ? a : b) : (j == 0 ? c : d);
  }
  double det() const { return a * d - b * c; }
  double trace() const { return a + d; }
  Mat2 transpose() const { return {a, c, b, d}; }
  Mat2 inverse() const {
    const double dt = det();
    if (dt == 0.0) throw NumericalFailure("singular 2x2 matrix");
    return {d / dt, -b / dt, -c / dt, a / dt};
  }
  std::array<double, 2> column(int j) const { return j == 0 ? std::array{a, c} : std::array{b, d}; }
  double max_abs() const { return std::max(std::max(std::abs(a), std::abs(b)), std::max(std::abs(c), std::abs(d))); }
};

inline Mat2 operator*(const Mat2& x, const Mat2& y) {
  return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}
inline Mat2 operator-(const Mat2& x, const Mat2& y) { return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d}; }
inline Mat2 operator+(const Mat2& x, const Mat2& y) { return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d}; }
inline Mat2 operator*(double s, const Mat2& x) { return {s * x.a, s * x.b, s * x.c, s * x.d}; }
inline std::array<double, 2> operator*(const Mat2& m, const std::array<double, 2>& v) {
  return {m.a * v[0] + m.b * v[1], m.c * v[0] + m.d * v[1]};
}

/// True iff the symmetric matrix is positive definite (Sylvester test).
inline bool check_positive_definite(const Mat2& s) { return s.a > 0.0 && s.det() > 0.0; }

/// Lower Cholesky factor of a symmetric positive definite matrix.
inline Mat2 cholesky(const Mat2& s) {
  if (!check_positive_definite(s)) throw NumericalFailure("cholesky: matrix not positive definite");
  const double l11 = std::sqrt(s.a);
  const double l21 = s.c / l11;
  const double l22 = std::sqrt(s.d - l21 * l21);
  return {l11, 0.0, l21, l22};
}

struct SymEigen {
  std::array<double, 2> values;                 // ascending
  std::array<std::array<double, 2>, 2> vectors;  // unit eigenvectors
};

/// Closed-form eigendecomposition of a symmetric 2x2 matrix.
inline SymEigen sym_eigen(const Mat2& s) {
  const double m = 0.5 * (s.a + s.d);
  const double h = 0.5 * (s.a - s.d);
  const double off = 0.5 * (s.b + s.c);
  const double r = std::hypot(h, off);
  SymEigen out;
  out.values = {m - r, m + r};
  if (off == 0.0) {
    if (s.a <= s.d) {
      out.vectors = {{{1.0, 0.0}, {0.0, 1.0}}};
    } else {
      out.vectors = {{{0.0, 1.0}, {1.0, 0.0}}};
    }
    return out;
  }
  // Rotation angle of the larger eigenvector.
  const double theta = 0.5 * std::atan2(off, h);
  const std::array<double, 2> big{std::cos(theta), std::sin(theta)};
  const std::array<double, 2> small{-std::sin(theta), std::cos(theta)};
  out.vectors = {small, big};
  return out;
}

}  // namespace transverse

#endif  // TRANSVERSE_LINALG_HPP
