#ifndef TRANSVERSE_BUILTIN_HPP
#define TRANSVERSE_BUILTIN_HPP

// Built-in systems: the Neumann problem on the sphere, two identical pendula
// coupled through f(xi1)(1 - cos(xi2 - xi1)), and two different weakly
// coupled pendula.

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "transverse/chart_transition.hpp"
#include "transverse/errors.hpp"
#include "transverse/model.hpp"

namespace transverse {

/// Even 2pi-periodic function f(x) = sum_k c[k] cos(k x).
struct CosineSeries {
  std::vector<double> c;

  double operator()(double x) const {
    double s = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) s += c[k] * std::cos(static_cast<double>(k) * x);
    return s;
  }
  double derivative(double x) const {
    double s = 0.0;
    for (std::size_t k = 1; k < c.size(); ++k) {
      s -= c[k] * static_cast<double>(k) * std::sin(static_cast<double>(k) * x);
    }
    return s;
  }
  double at_zero() const {
    double s = 0.0;
    for (double v : c) s += v;
    return s;
  }
};

// ---------------------------------------------------------------- Neumann

inline HamiltonianModel make_neumann(double lambda1, double lambda2) {
  if (!(lambda1 > 0.0 && lambda1 < lambda2)) {
    std::ostringstream os;
    os << "neumann requires 0 < lambda1 < lambda2 (got " << lambda1 << ", " << lambda2 << ")";
    throw ConstructionError(os.str());
  }
  const double l1 = lambda1, l2 = lambda2;
  HamiltonianModel m;
  m.name = "neumann";
  auto g = [](double q) { return 4.0 + q * q; };
  m.b110 = [g](double q) { return g(q) * g(q) / 16.0; };
  m.b120 = [](double) { return 0.0; };
  m.b220 = m.b110;
  m.b112 = [g](double q) { return g(q) / 4.0; };
  m.b122 = [](double) { return 0.0; };
  m.b222 = m.b112;
  m.V0 = [g, l1](double q) { return -8.0 * l1 * l1 * q * q / (g(q) * g(q)); };
  m.V1 = [](double) { return 0.0; };
  m.Y = [g, l1, l2](double q) {
    return 16.0 / (g(q) * g(q)) * (l2 * l2 - 2.0 * l1 * l1 * q * q / g(q));
  };
  auto zero = [](double) { return 0.0; };
  auto db0 = [g](double q) { return q * g(q) / 4.0; };
  auto db2 = [](double q) { return q / 2.0; };
  m.derivatives = {db0,
                   zero,
                   db0,
                   db2,
                   zero,
                   db2,
                   [g, l1](double q) { return -16.0 * l1 * l1 * q * (4.0 - q * q) / std::pow(g(q), 3); },
                   zero,
                   [g, l1, l2](double q) {
                     return -64.0 * l2 * l2 * q / std::pow(g(q), 3) -
                            64.0 * l1 * l1 * q * (4.0 - 2.0 * q * q) / std::pow(g(q), 4);
                   }};
  m.loop_dS1 = zero;
  m.domain = {-40.0, 40.0};
  m.periodic = false;
  m.reversibility = Reversibility{1, 1};
  return m;
}

/// The other chart of the sphere: q~ = 4 q / |q|^2. The loop runs from q = 0
/// to q~ = 0 along the q1 axis.
inline ChartTransition neumann_transition() {
  ChartTransition t;
  t.chi = [](const Point2& q) {
    const double r2 = q[0] * q[0] + q[1] * q[1];
    return Point2{4.0 * q[0] / r2, 4.0 * q[1] / r2};
  };
  t.chi0 = [](double q1) { return 4.0 / q1; };
  t.jet2 = [](double q1) {
    TransitionJet j;
    j.dchi1_dq1 = -4.0 / (q1 * q1);
    j.dchi1_dq2 = 0.0;
    j.dchi2_dq2 = 4.0 / (q1 * q1);
    j.d2chi1_dq2 = -8.0 / (q1 * q1 * q1);
    j.d2chi2_dq2 = 0.0;
    return j;
  };
  return t;
}

// ------------------------------------------------------ identical pendula

/// Identical pendula in coordinates xi1 = q1, xi2 = q1 + q2, without the
/// admissibility check on f(0). Used to report hypothesis failures.
inline HamiltonianModel make_pendula_identical_unchecked(const CosineSeries& f) {
  HamiltonianModel m;
  m.name = "pendula_identical";
  m.b110 = [](double) { return 1.0; };
  m.b120 = [](double) { return -1.0; };
  m.b220 = [](double) { return 2.0; };
  m.b112 = [](double) { return 0.0; };
  m.b122 = m.b112;
  m.b222 = m.b112;
  // 2(cos q - 1) written without cancellation near q = 0.
  m.V0 = [](double q) {
    const double s = std::sin(0.5 * q);
    return -4.0 * s * s;
  };
  m.V1 = [](double q) { return -std::sin(q); };
  m.Y = [f](double q) { return std::cos(q) - f(q); };
  auto zero = [](double) { return 0.0; };
  m.derivatives = {zero,
                   zero,
                   zero,
                   zero,
                   zero,
                   zero,
                   [](double q) { return -2.0 * std::sin(q); },
                   [](double q) { return -std::cos(q); },
                   [f](double q) { return -std::sin(q) - f.derivative(q); }};
  m.loop_dS1 = [](double q) { return std::cos(0.5 * q); };
  m.domain = {-kTwoPi, 2.0 * kTwoPi};
  m.periodic = true;
  m.reversibility = Reversibility{-1, -1};
  return m;
}

inline HamiltonianModel make_pendula_identical(const CosineSeries& f) {
  const double f0 = f.at_zero();
  if (!(f0 >= 0.0 && f0 < 0.5)) {
    std::ostringstream os;
    os << "pendula_identical requires 0 <= f(0) < 1/2 (got f(0)=" << f0 << ")";
    throw ConstructionError(os.str());
  }
  return make_pendula_identical_unchecked(f);
}

// ---------------------------------------------------------- weak pendula

namespace detail {

/// atan(e^x) - atan(e^y) without cancellation when x and y are close.
inline double atan_exp_diff(double x, double y) {
  if (x <= 0.0 && y <= 0.0) {
    return std::atan(std::exp(y) * std::expm1(x - y) / (1.0 + std::exp(x + y)));
  }
  if (x >= 0.0 && y >= 0.0) {
    return std::atan(std::exp(-x) * std::expm1(x - y) / (1.0 + std::exp(-x - y)));
  }
  return std::atan(std::exp(x)) - std::atan(std::exp(y));
}

}  // namespace detail

/// h(q) = 4 atan(tan(q/4)^lambda) extended by h(q + 2pi) = h(q) + 2pi; the xi
/// projection of the central loop of the family is xi2 = h(xi1).
struct LoopGraph {
  double lambda = 1.0;

  double operator()(double q) const {
    const double k = std::floor(q / kTwoPi);
    const double r = q - k * kTwoPi;
    double v;
    if (r <= kPi) {
      v = 4.0 * std::atan(std::pow(std::tan(0.25 * r), lambda));
    } else {
      v = kTwoPi - 4.0 * std::atan(std::pow(std::tan(0.25 * (kTwoPi - r)), lambda));
    }
    return v + k * kTwoPi;
  }

  double derivative(double q) const {
    const double k = std::floor(q / kTwoPi);
    double r = q - k * kTwoPi;
    if (r > kPi) r = kTwoPi - r;
    const double w = std::tan(0.25 * r);
    return lambda * std::pow(w, lambda - 1.0) * (1.0 + w * w) / (1.0 + std::pow(w, 2.0 * lambda));
  }
};

/// Two pendula with exponents 1 and lambda in coordinates xi1 = q1,
/// xi2 = h(q1) + q2 that straighten the central loop of the family.
/// The coefficients are C^floor(lambda) at q1 = 0 (analytic for integer lambda).
inline HamiltonianModel make_pendula_weak(double lambda) {
  if (!(lambda >= 1.0)) {
    std::ostringstream os;
    os << "pendula_weak requires lambda >= 1 (got " << lambda << ")";
    throw ConstructionError(os.str());
  }
  const LoopGraph h{lambda};
  const double l2 = lambda * lambda;
  HamiltonianModel m;
  m.name = "pendula_weak";
  m.b110 = [](double) { return 1.0; };
  m.b120 = [h](double q) { return -h.derivative(q); };
  m.b220 = [h](double q) {
    const double d = h.derivative(q);
    return 1.0 + d * d;
  };
  m.b112 = [](double) { return 0.0; };
  m.b122 = m.b112;
  m.b222 = m.b112;
  m.V0 = [h, l2](double q) {
    const double s1 = std::sin(0.5 * q);
    const double s2 = std::sin(0.5 * h(q));
    return -2.0 * s1 * s1 - 2.0 * l2 * s2 * s2;
  };
  m.V1 = [h, l2](double q) { return -l2 * std::sin(h(q)); };
  m.Y = [h, l2](double q) { return l2 * std::cos(h(q)); };
  auto zero = [](double) { return 0.0; };
  m.derivatives = {zero,
                   {},
                   {},
                   zero,
                   zero,
                   zero,
                   [h, l2](double q) { return -std::sin(q) - l2 * std::sin(h(q)) * h.derivative(q); },
                   [h, l2](double q) { return -l2 * std::cos(h(q)) * h.derivative(q); },
                   [h, l2](double q) { return -l2 * std::sin(h(q)) * h.derivative(q); }};
  m.loop_dS1 = [h, lambda](double q) { return lambda * h.derivative(q) * std::cos(0.5 * h(q)); };
  m.domain = {-kTwoPi, 2.0 * kTwoPi};
  m.periodic = true;
  m.reversibility = Reversibility{-1, -1};
  return m;
}

/// Loop along the separatrix of the first pendulum with the second one at
/// rest, in the original coordinates (xi, eta).
inline HamiltonianModel make_pendula_weak_side_loop(double lambda) {
  if (!(lambda >= 1.0)) throw ConstructionError("pendula_weak requires lambda >= 1");
  const double l2 = lambda * lambda;
  HamiltonianModel m;
  m.name = "pendula_weak_side_loop";
  m.b110 = [](double) { return 1.0; };
  m.b120 = [](double) { return 0.0; };
  m.b220 = m.b110;
  m.b112 = m.b120;
  m.b122 = m.b120;
  m.b222 = m.b120;
  m.V0 = [](double q) {
    const double s = std::sin(0.5 * q);
    return -2.0 * s * s;
  };
  m.V1 = m.b120;
  m.Y = [l2](double) { return l2; };
  auto zero = [](double) { return 0.0; };
  m.derivatives = {zero, zero, zero, zero, zero, zero, [](double q) { return -std::sin(q); }, zero, zero};
  m.loop_dS1 = zero;
  m.domain = {-kTwoPi, 2.0 * kTwoPi};
  m.periodic = true;
  m.reversibility = Reversibility{-1, -1};
  return m;
}

/// Coupling 1 - cos(xi2 - xi1) and the loop family of the uncoupled system,
/// in the straightened coordinates of make_pendula_weak.
inline PerturbationModel make_pendula_weak_perturbation(double lambda) {
  if (!(lambda >= 1.0)) throw ConstructionError("pendula_weak requires lambda >= 1");
  const LoopGraph h{lambda};
  const double lam = lambda;
  PerturbationModel p;
  p.name = "pendula_weak";
  p.h_star = [h](const PhasePoint& x) {
    const double s = std::sin(0.5 * (h(x[0]) - x[0] + x[1]));
    return 2.0 * s * s;
  };
  p.h_star_at_O = 0.0;
  p.loop_family = [h, lam](double t, double s) {
    const double q1 = 4.0 * std::atan(std::exp(t - s));
    const double q2 = 4.0 * detail::atan_exp_diff(lam * t, lam * (t - s));
    const double eta1 = 2.0 / std::cosh(t - s);
    const double eta2 = 2.0 * lam / std::cosh(lam * t);
    return PhasePoint{q1, q2, eta1 + h.derivative(q1) * eta2, eta2};
  };
  p.kappa = [lam](double s) {
    return Point2{4.0 * std::atan(std::exp(-s)), kPi - 4.0 * std::atan(std::exp(-lam * s))};
  };
  p.decay_rate = 1.0;
  p.shift_rate = std::max(1.0, lambda);
  p.reversible_family = true;

  // Along the family: xi2 - xi1 = 4 (atan e^{lambda t} - atan e^{t-s}),
  // d xi1/ds = -2 sin(xi1/2) = -2/cosh(t-s), d^2 xi1/ds^2 = sin xi1.
  p.dL_integrand = [lam](double t, double s) {
    const double d = 4.0 * detail::atan_exp_diff(lam * t, t - s);
    return std::sin(d) * (-2.0 / std::cosh(t - s));
  };
  p.ddL_integrand = [lam](double t, double s) {
    const double d = 4.0 * detail::atan_exp_diff(lam * t, t - s);
    const double sech = 1.0 / std::cosh(t - s);
    const double sin_xi1 = -2.0 * sech * std::tanh(t - s);
    return -(std::cos(d) * 4.0 * sech * sech - std::sin(d) * sin_xi1);
  };
  p.locate = [h, lam](const Point2& q) {
    const double xi1 = q[0];
    const double xi2 = h(q[0]) + q[1];
    const double tau = std::log(std::tan(0.25 * xi2)) / lam;
    return Point2{tau, tau - std::log(std::tan(0.25 * xi1))};
  };
  p.inner_vector_field = [h, lam](const Point2& q) {
    const double v1 = 2.0 * std::sin(0.5 * q[0]);
    const double v2 = 2.0 * lam * std::sin(0.5 * (h(q[0]) + q[1]));
    return Point2{v1, v2 - h.derivative(q[0]) * v1};
  };
  p.separatrix_momentum = [h, lam](const Point2& q) {
    const double eta1 = 2.0 * std::sin(0.5 * q[0]);
    const double eta2 = 2.0 * lam * std::sin(0.5 * (h(q[0]) + q[1]));
    return Point2{eta1 + h.derivative(q[0]) * eta2, eta2};
  };
  return p;
}

// ------------------------------------------------------------- registry

enum class BuiltinName { neumann, pendula_identical, pendula_weak };

inline BuiltinName parse_builtin_name(const std::string& s) {
  if (s == "neumann") return BuiltinName::neumann;
  if (s == "pendula_identical") return BuiltinName::pendula_identical;
  if (s == "pendula_weak") return BuiltinName::pendula_weak;
  throw ConstructionError("unknown model '" + s + "' (expected neumann, pendula_identical, pendula_weak)");
}

/// Named parameter lists, e.g. {"lambda1": {1}, "lambda2": {2}} or {"f": {0.25, -0.125}}.
using BuiltinParams = std::map<std::string, std::vector<double>>;

struct BuiltinSystem {
  BuiltinName kind = BuiltinName::neumann;
  HamiltonianModel model;
  std::optional<PerturbationModel> perturbation;
  /// Transition to the chart of the stable manifold, when that chart differs.
  std::optional<ChartTransition> transition;
  /// Model for the stable manifold in its own chart (used with `transition`).
  std::optional<HamiltonianModel> stable_model;
  /// Alternative loop with unperturbed transversality (weak pendula only).
  std::optional<HamiltonianModel> side_loop;
  /// Default comparison point q1* for the transversality verdict.
  double q1_star = kPi;
};

namespace detail {

inline double require_scalar(const BuiltinParams& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end() || it->second.size() != 1) {
    throw ConstructionError("missing or malformed parameter '" + key + "'");
  }
  return it->second.front();
}

inline CosineSeries coupling_from_params(const BuiltinParams& p) {
  if (auto it = p.find("f"); it != p.end() && !it->second.empty()) return CosineSeries{it->second};
  if (auto it = p.find("f0"); it != p.end() && it->second.size() == 1) return CosineSeries{{it->second[0]}};
  throw ConstructionError("pendula_identical needs f=c0,c1,... (cosine coefficients) or f0=value");
}

}  // namespace detail

/// Builds a built-in system, enforcing its parameter constraints.
inline BuiltinSystem builtin_model(BuiltinName name, const BuiltinParams& params) {
  BuiltinSystem sys;
  sys.kind = name;
  switch (name) {
    case BuiltinName::neumann: {
      const double l1 = detail::require_scalar(params, "lambda1");
      const double l2 = detail::require_scalar(params, "lambda2");
      sys.model = make_neumann(l1, l2);
      sys.transition = neumann_transition();
      sys.stable_model = sys.model;
      sys.q1_star = 2.0;
      break;
    }
    case BuiltinName::pendula_identical:
      sys.model = make_pendula_identical(detail::coupling_from_params(params));
      break;
    case BuiltinName::pendula_weak: {
      const double lambda = detail::require_scalar(params, "lambda");
      sys.model = make_pendula_weak(lambda);
      sys.perturbation = make_pendula_weak_perturbation(lambda);
      sys.side_loop = make_pendula_weak_side_loop(lambda);
      break;
    }
  }
  return sys;
}

inline BuiltinSystem builtin_model(const std::string& name, const BuiltinParams& params) {
  return builtin_model(parse_builtin_name(name), params);
}

}  // namespace transverse

#endif  // TRANSVERSE_BUILTIN_HPP
