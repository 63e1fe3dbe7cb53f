#ifndef TRANSVERSE_MODEL_HPP
#define TRANSVERSE_MODEL_HPP

// Hamiltonian data model H = 1/2 <B(q)p, p> + V(q) described by its
// expansion in q2 along the loop line q2 = 0:
//   V = V0(q1) + V1(q1) q2 - 1/2 Y(q1) q2^2 + ...
//   B = B0(q1) + 1/2 B2(q1) q2^2 + ...      (no first-order term)
// B0 = [[b110, b120], [b120, b220]], B2 = [[b112, b122], [b122, b222]].

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "transverse/errors.hpp"
#include "transverse/linalg.hpp"
#include "transverse/numeric.hpp"

namespace transverse {

enum class Coef : int { b110 = 0, b120, b220, b112, b122, b222, V0, V1, Y };

inline constexpr std::array<Coef, 9> kAllCoefs{Coef::b110, Coef::b120, Coef::b220, Coef::b112, Coef::b122,
                                               Coef::b222, Coef::V0,   Coef::V1,   Coef::Y};

inline const char* coef_name(Coef c) {
  static constexpr std::array<const char*, 9> names{"b110", "b120", "b220", "b112", "b122",
                                                    "b222", "V0",   "V1",   "Y"};
  return names[static_cast<int>(c)];
}

/// Pointwise values of the nine coefficient functions.
struct Coefficients {
  double b110 = 0, b120 = 0, b220 = 0;
  double b112 = 0, b122 = 0, b222 = 0;
  double V0 = 0, V1 = 0, Y = 0;

  double operator[](Coef c) const {
    switch (c) {
      case Coef::b110: return b110;
      case Coef::b120: return b120;
      case Coef::b220: return b220;
      case Coef::b112: return b112;
      case Coef::b122: return b122;
      case Coef::b222: return b222;
      case Coef::V0: return V0;
      case Coef::V1: return V1;
      case Coef::Y: return Y;
    }
    return 0.0;
  }
};

/// Signature (r1, r2) of the involution (q, p) -> (Rq, -Rp), R = diag(r1, r2).
struct Reversibility {
  int r1 = 1;
  int r2 = 1;
};

struct HamiltonianModel {
  std::string name;
  ScalarFn b110, b120, b220;
  ScalarFn b112, b122, b222;
  ScalarFn V0, V1, Y;
  /// Optional analytic first derivatives, indexed by Coef. Empty entries fall
  /// back to central differences.
  std::array<ScalarFn, 9> derivatives{};
  /// Optional analytic derivative of S1 along the loop.
  ScalarFn loop_dS1;
  Interval domain{-1.0, 1.0};
  bool periodic = false;
  std::optional<Reversibility> reversibility;

  const ScalarFn& field(Coef c) const {
    switch (c) {
      case Coef::b110: return b110;
      case Coef::b120: return b120;
      case Coef::b220: return b220;
      case Coef::b112: return b112;
      case Coef::b122: return b122;
      case Coef::b222: return b222;
      case Coef::V0: return V0;
      case Coef::V1: return V1;
      case Coef::Y: break;
    }
    return Y;
  }

  /// Right end of the loop's q1 range: 2*pi on the torus, else the domain end.
  double loop_end() const { return periodic ? kTwoPi : domain.hi; }

  void require_in_domain(double q1) const {
    if (!(q1 >= domain.lo && q1 <= domain.hi)) {
      std::ostringstream os;
      os << "q1=" << q1 << " outside the model domain [" << domain.lo << ", " << domain.hi << "]";
      throw DomainError(os.str());
    }
  }

  double value(Coef c, double q1) const { return field(c)(q1); }

  /// First derivative of a coefficient; analytic when supplied.
  double derivative(Coef c, double q1) const {
    const auto& d = derivatives[static_cast<int>(c)];
    if (d) return d(q1);
    return fd::derivative(field(c), q1);
  }

  Mat2 B0(double q1) const { return Mat2::sym(b110(q1), b120(q1), b220(q1)); }
  Mat2 B2(double q1) const { return Mat2::sym(b112(q1), b122(q1), b222(q1)); }
};

/// Evaluates the nine coefficients at q1.
inline Coefficients eval_coefficients(const HamiltonianModel& m, double q1) {
  m.require_in_domain(q1);
  return {m.b110(q1), m.b120(q1), m.b220(q1), m.b112(q1), m.b122(q1),
          m.b222(q1), m.V0(q1),   m.V1(q1),   m.Y(q1)};
}

/// -D^2 V(0, 0) assembled from the expansion.
inline Mat2 hessian_matrix_A(const HamiltonianModel& m) {
  const double v0pp = fd::second_derivative(m.V0, 0.0);
  const double v1p = m.derivative(Coef::V1, 0.0);
  return Mat2::sym(-v0pp, -v1p, m.Y(0.0));
}

struct CheckEntry {
  CheckEntry() = default;
  explicit CheckEntry(std::string n, bool ok = true, double w = 0.0, double at = 0.0, std::string d = "")
      : name(std::move(n)), passed(ok), worst(w), where(at), detail(std::move(d)) {}

  std::string name;
  bool passed = true;
  double worst = 0.0;  // worst residual or margin encountered
  double where = 0.0;  // q1 of the worst sample
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckEntry> entries;

  bool all_passed() const {
    for (const auto& e : entries) {
      if (!e.passed) return false;
    }
    return true;
  }
  const CheckEntry* find(const std::string& name) const {
    for (const auto& e : entries) {
      if (e.name == name) return &e;
    }
    return nullptr;
  }
};

namespace detail {

inline std::vector<double> validation_grid(double a, double b) {
  // 256 uniform interior samples plus both endpoints.
  std::vector<double> g = linspace(a, b, 258);
  return g;
}

}  // namespace detail

/// Spot-checks the standing hypotheses on sample grids. Failures are report
/// entries, never exceptions.
inline ValidationReport validate_hypotheses(const HamiltonianModel& m) {
  ValidationReport rep;
  const double tiny = 1e-10;

  {
    CheckEntry e("H1 equilibrium");
    const double r = std::max({std::abs(m.V0(0.0)), std::abs(m.derivative(Coef::V0, 0.0)), std::abs(m.V1(0.0))});
    e.worst = r;
    e.passed = r < tiny;
    e.detail = e.passed ? "V0(0)=V0'(0)=V1(0)=0" : "gradient of V does not vanish at the origin";
    rep.entries.push_back(e);
  }
  {
    CheckEntry e("H1 nondegenerate maximum");
    const Mat2 A = hessian_matrix_A(m);
    e.worst = std::min(A.a, A.det());
    e.passed = check_positive_definite(A);
    std::ostringstream os;
    os << "A=[[" << A.a << ", " << A.b << "], [" << A.c << ", " << A.d << "]]";
    if (!e.passed) os << " is not positive definite";
    e.detail = os.str();
    rep.entries.push_back(e);
  }
  {
    CheckEntry e("B0 positive definite");
    e.worst = std::numeric_limits<double>::infinity();
    for (double q : detail::validation_grid(m.domain.lo, m.domain.hi)) {
      const Mat2 b = m.B0(q);
      const double margin = std::min(b.a, b.det());
      if (margin < e.worst) {
        e.worst = margin;
        e.where = q;
      }
    }
    e.passed = e.worst > 0.0;
    e.detail = e.passed ? "Sylvester test passed on the grid" : "B0 fails the Sylvester test";
    rep.entries.push_back(e);
  }
  {
    CheckEntry e("V0 negative on loop");
    e.worst = -std::numeric_limits<double>::infinity();
    const auto g = detail::validation_grid(0.0, m.loop_end());
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
      const double v = m.V0(g[i]);
      if (v > e.worst) {
        e.worst = v;
        e.where = g[i];
      }
    }
    e.passed = e.worst < 0.0;
    e.detail = e.passed ? "V0<0 on the interior grid" : "V0 is not negative on the loop interior";
    rep.entries.push_back(e);
  }
  if (m.periodic) {
    CheckEntry e("periodicity");
    for (double q : linspace(0.0, kTwoPi, 100)) {
      for (Coef c : kAllCoefs) {
        const double r = std::abs(m.value(c, q + kTwoPi) - m.value(c, q));
        if (r > e.worst) {
          e.worst = r;
          e.where = q;
        }
      }
    }
    e.passed = e.worst < 1e-12;
    e.detail = e.passed ? "all coefficients 2pi-periodic" : "a coefficient is not 2pi-periodic";
    rep.entries.push_back(e);
  }
  rep.entries.emplace_back("H3 no order-one kinetic terms", true, 0.0, 0.0, "satisfied by construction");
  if (m.reversibility) {
    // R-reversibility in terms of the expansion: V0, Y, b110, b220, b112, b222
    // are R-even; V1 and b120, b122 pick up the signs r2 and r1 r2.
    CheckEntry e("reversibility");
    const int r1 = m.reversibility->r1;
    const int r2 = m.reversibility->r2;
    for (double q : detail::validation_grid(m.domain.lo, m.domain.hi)) {
      const double rq = r1 * q;
      if (!m.domain.contains(rq)) continue;
      const std::array<std::pair<Coef, double>, 9> sign{{{Coef::b110, 1.0},
                                                         {Coef::b120, double(r1 * r2)},
                                                         {Coef::b220, 1.0},
                                                         {Coef::b112, 1.0},
                                                         {Coef::b122, double(r1 * r2)},
                                                         {Coef::b222, 1.0},
                                                         {Coef::V0, 1.0},
                                                         {Coef::V1, double(r2)},
                                                         {Coef::Y, 1.0}}};
      for (auto [c, s] : sign) {
        const double r = std::abs(s * m.value(c, rq) - m.value(c, q));
        if (r > e.worst) {
          e.worst = r;
          e.where = q;
        }
      }
    }
    e.passed = e.worst < 1e-10;
    e.detail = e.passed ? "declared signature verified" : "declared signature violated";
    rep.entries.push_back(e);
  }
  return rep;
}

using PhasePoint = std::array<double, 4>;  // (q1, q2, p1, p2)
using Point2 = std::array<double, 2>;

/// First-order perturbation H + eps H* of a model with a one-parameter family
/// of loops x(t, s) filling a separatrix. All coordinates are those of the
/// unperturbed model.
struct PerturbationModel {
  std::string name;
  std::function<double(const PhasePoint&)> h_star;
  double h_star_at_O = 0.0;
  std::function<PhasePoint(double t, double s)> loop_family;
  std::function<Point2(double s)> kappa;
  /// Lower bound on the exponential rate at which loops approach O.
  double decay_rate = 1.0;
  /// Extra time footprint of the loop per unit |s|.
  double shift_rate = 1.0;
  /// True when x(t, -s) = R x(-t, s), so that the reduced potential is even.
  bool reversible_family = false;

  /// Optional closed-form integrands of L'(s) and L''(s) in t.
  std::function<double(double t, double s)> dL_integrand;
  std::function<double(double t, double s)> ddL_integrand;
  /// Optional inverse of the family: (tau, s) with configuration of x(tau, s) = q.
  std::function<Point2(const Point2& q)> locate;
  /// Optional flow on the separatrix (q -> dq/dt) and its momentum section.
  std::function<Point2(const Point2& q)> inner_vector_field;
  std::function<Point2(const Point2& q)> separatrix_momentum;
};

/// Checks the section and decay requirements of a perturbation model.
inline ValidationReport validate_perturbation(const PerturbationModel& p) {
  ValidationReport rep;
  {
    CheckEntry e("kappa(0) on the loop");
    const Point2 k = p.kappa(0.0);
    e.worst = std::max(std::abs(k[0] - kPi), std::abs(k[1]));
    e.passed = e.worst < 1e-12;
    e.detail = "kappa(0)=(pi,0)";
    rep.entries.push_back(e);
  }
  {
    CheckEntry e("kappa transverse");
    const double k2p = fd::derivative([&](double s) { return p.kappa(s)[1]; }, 0.0);
    e.worst = std::abs(k2p);
    e.passed = e.worst > 1e-8;
    e.detail = "kappa2'(0) nonzero";
    rep.entries.push_back(e);
  }
  {
    CheckEntry e("loops asymptotic to O");
    const double T = 40.0 / p.decay_rate;
    for (double t : {-T, T}) {
      const PhasePoint x = p.loop_family(t, 0.0);
      for (int i = 0; i < 2; ++i) {
        const double r = std::abs(std::remainder(x[i], kTwoPi));
        e.worst = std::max(e.worst, r);
      }
      e.worst = std::max({e.worst, std::abs(x[2]), std::abs(x[3])});
    }
    e.passed = e.worst < 1e-8;
    e.detail = "x(t,0) -> O as |t| grows";
    rep.entries.push_back(e);
  }
  return rep;
}

}  // namespace transverse

#endif  // TRANSVERSE_MODEL_HPP
