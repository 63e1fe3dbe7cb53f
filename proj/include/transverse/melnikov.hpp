#ifndef TRANSVERSE_MELNIKOV_HPP
#define TRANSVERSE_MELNIKOV_HPP

// First-order splitting of a separatrix filled by a family of loops:
// Mel'nikov potential L(q) = -int [H*(x(t, q)) - H*(O)] dt, its reduction
// L~(s) = L(kappa(s)) to a transverse section, and the verdicts built on it.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "transverse/chart.hpp"
#include "transverse/errors.hpp"
#include "transverse/model.hpp"
#include "transverse/numeric.hpp"

namespace transverse {

enum class LoopCase { A, B };
enum class PerturbedVerdict { perturbed_loop_transversal, degenerate, inapplicable };

inline const char* perturbed_verdict_name(PerturbedVerdict v) {
  switch (v) {
    case PerturbedVerdict::perturbed_loop_transversal: return "perturbed_loop_transversal";
    case PerturbedVerdict::degenerate: return "degenerate";
    case PerturbedVerdict::inapplicable: break;
  }
  return "inapplicable";
}

struct QuadratureDiagnostics {
  double T_cut = 0.0;
  double tail_bound = 0.0;      // estimated size of the discarded tails
  double error_estimate = 0.0;  // sum of the Gauss-Kronrod error estimates
  bool tail_warning = false;    // tail target not met even after extending T_cut
};

struct MelnikovOptions {
  double tail_target = 1e-12;
  double quad_tol = 1e-13;
  double fd_step = 1e-3;  // step in s for difference quotients
  double time_scale = 1.0;  // multiplies the default truncation time
};

struct MelnikovResult {
  std::vector<double> s;
  std::vector<double> L;
  double dL0 = std::numeric_limits<double>::quiet_NaN();
  double ddL0 = std::numeric_limits<double>::quiet_NaN();
  LoopCase case_label = LoopCase::B;
  PerturbedVerdict verdict = PerturbedVerdict::inapplicable;
  std::vector<double> critical_s;  // candidate critical points of L~ located on the grid
  QuadratureDiagnostics quadrature_diag;
  std::string note;
};

/// Default truncation (40 + |s| shift_rate) / decay_rate.
inline double truncation_time(const PerturbationModel& p, double s, double scale = 1.0) {
  return scale * (40.0 + std::abs(s) * p.shift_rate) / p.decay_rate;
}

namespace detail {

/// Integral of g over [-T, T], split at the given break points and into
/// pieces of bounded length. Extends T while the tail estimate is too large.
template <class G>
double integrate_line(const G& g, double T, std::vector<double> breaks, double decay_rate, const MelnikovOptions& o,
                      QuadratureDiagnostics* diag) {
  QuadratureDiagnostics d;
  double value = 0.0;
  for (int attempt = 0; attempt < 4; ++attempt) {
    std::vector<double> pts{-T, T};
    for (double b : breaks) {
      if (b > -T && b < T) pts.push_back(b);
    }
    std::sort(pts.begin(), pts.end());
    value = 0.0;
    d.error_estimate = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const double a = pts[i], b = pts[i + 1];
      const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / 8.0)));
      for (int k = 0; k < pieces; ++k) {
        const double x0 = a + (b - a) * k / pieces;
        const double x1 = k + 1 == pieces ? b : a + (b - a) * (k + 1) / pieces;
        double err = 0.0;
        value += integrate(g, x0, x1, o.quad_tol, &err);
        d.error_estimate += err;
      }
    }
    d.T_cut = T;
    d.tail_bound = (std::abs(g(-T)) + std::abs(g(T))) / decay_rate;
    if (d.tail_bound <= o.tail_target) break;
    T *= 2.0;
  }
  d.tail_warning = d.tail_bound > o.tail_target;
  if (diag) *diag = d;
  return value;
}

inline Point2 config(const PhasePoint& x) { return {x[0], x[1]}; }

}  // namespace detail

/// Reduced potential L~(s) = -int [H*(x(t, s)) - H*(O)] dt along the family.
inline double reduced_potential_at(const PerturbationModel& p, double s, const MelnikovOptions& o = {},
                                   QuadratureDiagnostics* diag = nullptr) {
  auto g = [&](double t) { return p.h_star(p.loop_family(t, s)) - p.h_star_at_O; };
  return -detail::integrate_line(g, truncation_time(p, s, o.time_scale), {0.0, s}, p.decay_rate, o, diag);
}

/// Parameters (tau, s) of the family member through configuration q, by Newton
/// iteration on x(tau, s) = q when the model supplies no inverse.
inline Point2 locate_on_family(const PerturbationModel& p, const Point2& q) {
  if (p.locate) return p.locate(q);
  Point2 z{0.0, 0.0};
  auto F = [&](const Point2& w) {
    const Point2 c = detail::config(p.loop_family(w[0], w[1]));
    return Point2{c[0] - q[0], c[1] - q[1]};
  };
  for (int it = 0; it < 60; ++it) {
    const Point2 f = F(z);
    if (std::hypot(f[0], f[1]) < 1e-13) return z;
    const double h = 1e-7;
    const Point2 ft = F({z[0] + h, z[1]}), fs = F({z[0], z[1] + h});
    const Mat2 J{(ft[0] - f[0]) / h, (fs[0] - f[0]) / h, (ft[1] - f[1]) / h, (fs[1] - f[1]) / h};
    const Point2 dz = J.inverse() * f;
    double lam = 1.0;
    const double f0 = std::hypot(f[0], f[1]);
    for (int k = 0; k < 30; ++k) {
      const Point2 trial{z[0] - lam * dz[0], z[1] - lam * dz[1]};
      const Point2 ftr = F(trial);
      if (std::hypot(ftr[0], ftr[1]) < f0) {
        z = trial;
        break;
      }
      lam *= 0.5;
    }
  }
  const Point2 f = F(z);
  if (std::hypot(f[0], f[1]) > 1e-10) throw NumericalFailure("point is not on the loop family (Newton inversion failed)");
  return z;
}

/// Mel'nikov potential at a configuration point of the unperturbed separatrix.
inline double melnikov_potential(const PerturbationModel& p, const Point2& q, const MelnikovOptions& o = {},
                                 QuadratureDiagnostics* diag = nullptr) {
  const Point2 ts = locate_on_family(p, q);
  return reduced_potential_at(p, ts[1], o, diag);
}

/// Same potential computed by following the separatrix flow from q forwards
/// and backwards in time (needs inner_vector_field and separatrix_momentum).
inline double melnikov_potential_flow(const PerturbationModel& p, const Point2& q, double T_cut = 0.0,
                                      OdeTolerances tol = {1e-12, 1e-15}) {
  if (!p.inner_vector_field || !p.separatrix_momentum) {
    throw UnsupportedOperation("flow route needs the separatrix vector field and momentum");
  }
  if (T_cut <= 0.0) T_cut = 60.0 / p.decay_rate;
  using State = std::array<double, 3>;
  auto sys = [&p](const State& x, State& dx, double) {
    const Point2 qq{x[0], x[1]};
    const Point2 v = p.inner_vector_field(qq);
    const Point2 pp = p.separatrix_momentum(qq);
    dx[0] = v[0];
    dx[1] = v[1];
    dx[2] = p.h_star({qq[0], qq[1], pp[0], pp[1]}) - p.h_star_at_O;
  };
  const State x0{q[0], q[1], 0.0};
  const State fwd = integrate_to<3>(sys, x0, 0.0, T_cut, tol);
  const State bwd = integrate_to<3>(sys, x0, 0.0, -T_cut, tol);
  return -(fwd[2] - bwd[2]);
}

/// Samples of L~ on a grid of section parameters.
inline MelnikovResult reduced_melnikov(const PerturbationModel& p, const std::vector<double>& s_grid,
                                       const MelnikovOptions& o = {}) {
  MelnikovResult r;
  r.case_label = LoopCase::B;
  for (double s : s_grid) {
    QuadratureDiagnostics d;
    r.s.push_back(s);
    r.L.push_back(reduced_potential_at(p, s, o, &d));
    if (d.T_cut > r.quadrature_diag.T_cut) r.quadrature_diag.T_cut = d.T_cut;
    r.quadrature_diag.tail_bound = std::max(r.quadrature_diag.tail_bound, d.tail_bound);
    r.quadrature_diag.error_estimate = std::max(r.quadrature_diag.error_estimate, d.error_estimate);
    r.quadrature_diag.tail_warning = r.quadrature_diag.tail_warning || d.tail_warning;
  }
  return r;
}

struct MelnikovDerivatives {
  double dL = 0.0;
  double ddL = 0.0;
  bool closed_form_integrands = false;
};

/// L~'(s) and L~''(s): quadrature of the model's integrands when supplied,
/// otherwise 5-point central differences in s with one Richardson step.
inline MelnikovDerivatives melnikov_derivatives_at(const PerturbationModel& p, double s, const MelnikovOptions& o = {}) {
  MelnikovDerivatives d;
  if (p.dL_integrand && p.ddL_integrand) {
    const double T = truncation_time(p, s, o.time_scale);
    d.dL = detail::integrate_line([&](double t) { return p.dL_integrand(t, s); }, T, {0.0, s}, p.decay_rate, o, nullptr);
    d.ddL =
        detail::integrate_line([&](double t) { return p.ddL_integrand(t, s); }, T, {0.0, s}, p.decay_rate, o, nullptr);
    d.closed_form_integrands = true;
    return d;
  }
  auto L = [&](double x) { return reduced_potential_at(p, x, o); };
  auto diffs = [&](double h) {
    const double lm2 = L(s - 2 * h), lm1 = L(s - h), l0 = L(s), lp1 = L(s + h), lp2 = L(s + 2 * h);
    return std::pair{(lm2 - 8 * lm1 + 8 * lp1 - lp2) / (12 * h),
                     (-lm2 + 16 * lm1 - 30 * l0 + 16 * lp1 - lp2) / (12 * h * h)};
  };
  const auto [d1h, d2h] = diffs(o.fd_step);
  const auto [d1, d2] = diffs(0.5 * o.fd_step);
  d.dL = d1 + (d1 - d1h) / 15.0;
  d.ddL = d2 + (d2 - d2h) / 15.0;
  return d;
}

inline MelnikovDerivatives melnikov_derivatives(const PerturbationModel& p, const MelnikovOptions& o = {}) {
  return melnikov_derivatives_at(p, 0.0, o);
}

struct CaseBTolerances {
  double zero_tol = 1e-8;     // |L~'(0)| below this counts as a critical point
  double nondeg_tol = 1e-6;   // |L~''(0)| above this counts as nondegenerate
};

/// Case A: the unperturbed manifolds already cross transversally along the loop.
inline MelnikovResult perturbed_loop_verdict(const TransversalityReport& unperturbed) {
  MelnikovResult r;
  r.case_label = LoopCase::A;
  if (unperturbed.verdict == Verdict::transversal) {
    r.verdict = PerturbedVerdict::perturbed_loop_transversal;
    r.note = "unperturbed manifolds transversal; persists under small perturbation";
  } else {
    r.verdict = PerturbedVerdict::inapplicable;
    r.note = std::string("unperturbed verdict is ") + verdict_name(unperturbed.verdict) + ", not a case-A loop";
  }
  return r;
}

/// Case B from the two derivatives at the section point s = 0.
inline MelnikovResult perturbed_loop_verdict(double dL0, double ddL0, const CaseBTolerances& tol = {}) {
  MelnikovResult r;
  r.case_label = LoopCase::B;
  r.dL0 = dL0;
  r.ddL0 = ddL0;
  if (std::abs(dL0) > tol.zero_tol) {
    r.verdict = PerturbedVerdict::inapplicable;
    r.note = "s=0 is not a critical point of the reduced potential";
  } else if (std::abs(ddL0) <= tol.nondeg_tol) {
    r.verdict = PerturbedVerdict::degenerate;
    r.note = "critical point at s=0 is degenerate";
  } else {
    r.verdict = PerturbedVerdict::perturbed_loop_transversal;
    r.note = "nondegenerate critical point at s=0";
  }
  return r;
}

/// Full case-B pipeline: samples on `s_grid`, derivatives at 0, verdict, and
/// (when s = 0 is not critical) sign changes of L~' bracketed on the grid.
inline MelnikovResult perturbed_loop_verdict(const PerturbationModel& p, const std::vector<double>& s_grid,
                                             const MelnikovOptions& o = {}, const CaseBTolerances& tol = {}) {
  MelnikovResult samples = reduced_melnikov(p, s_grid, o);
  const MelnikovDerivatives d = melnikov_derivatives(p, o);
  MelnikovResult r = perturbed_loop_verdict(d.dL, d.ddL, tol);
  r.s = std::move(samples.s);
  r.L = std::move(samples.L);
  r.quadrature_diag = samples.quadrature_diag;
  if (r.verdict == PerturbedVerdict::inapplicable && r.s.size() > 1) {
    auto dL = [&](double s) { return melnikov_derivatives_at(p, s, o).dL; };
    double prev = dL(r.s.front());
    for (std::size_t i = 1; i < r.s.size(); ++i) {
      const double cur = dL(r.s[i]);
      if ((prev > 0) != (cur > 0)) r.critical_s.push_back(bisect(dL, r.s[i - 1], r.s[i], 1e-10));
      prev = cur;
    }
    if (!r.critical_s.empty()) r.note += "; candidate critical points located on the grid";
  }
  return r;
}

/// Xi_lambda = max_{t>0} 4 (atan e^{lambda t} - atan e^t), attained where
/// cosh(lambda t) = lambda cosh(t).
inline double xi_lambda(double lambda) {
  if (!(lambda >= 1.0)) throw DomainError("xi_lambda needs lambda >= 1");
  if (lambda == 1.0) return 0.0;
  // log cosh(lambda t) - log cosh t - log lambda, negative at t = 0.
  auto g = [lambda](double t) {
    auto lc = [](double x) { return std::abs(x) + std::log1p(std::exp(-2.0 * std::abs(x))) - std::log(2.0); };
    return lc(lambda * t) - lc(t) - std::log(lambda);
  };
  double hi = 1.0;
  while (g(hi) < 0.0) hi *= 2.0;
  const double t_star = bisect(g, 0.0, hi, 1e-12);
  return 4.0 * detail::atan_exp_diff(lambda * t_star, t_star);
}

/// lambda0 with Xi_{lambda0} = pi / 2.
inline double lambda0_threshold() {
  auto f = [](double l) { return xi_lambda(l) - 0.5 * kPi; };
  double hi = 2.0;
  while (f(hi) < 0.0) hi *= 2.0;
  return bisect(f, 1.0, hi, 1e-12);
}

}  // namespace transverse

#endif  // TRANSVERSE_MELNIKOV_HPP
