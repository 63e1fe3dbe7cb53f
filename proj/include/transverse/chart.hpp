#ifndef TRANSVERSE_CHART_HPP
#define TRANSVERSE_CHART_HPP

// Stable-side slope expressed in the unstable chart, and the transversality
// verdict T^u(q1*) != T^s_hat(q1*).

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>

#include "transverse/chart_transition.hpp"
#include "transverse/errors.hpp"
#include "transverse/loop_profile.hpp"
#include "transverse/model.hpp"
#include "transverse/riccati.hpp"

namespace transverse {

/// Second-order jet of the stable generating function S~ along its loop line,
/// at one point q~1 of the stable chart: dS~/dq~1 = S~0', dS~/dq~2 = S~1,
/// and the Hessian entries S~0'', S~1', T~.
struct StableJet {
  double dS0 = 0.0;
  double d2S0 = 0.0;
  double S1 = 0.0;
  double dS1 = 0.0;
  double T = 0.0;
};

using StableJetFn = std::function<StableJet(double q1_tilde)>;

/// d^2 (S~ o chi) / dq2^2 at (q1, 0): the chain rule to second order.
inline double jet_transport_stable(const StableJet& j, const TransitionJet& c) {
  return j.dS0 * c.d2chi1_dq2 + j.S1 * c.d2chi2_dq2 + j.d2S0 * c.dchi1_dq2 * c.dchi1_dq2 +
         2.0 * j.dS1 * c.dchi1_dq2 * c.dchi2_dq2 + j.T * c.dchi2_dq2 * c.dchi2_dq2;
}

inline double jet_transport_stable(const StableJetFn& jet, const ChartTransition& t, double q1) {
  return jet_transport_stable(jet(t.chi0(q1)), t.jet2(q1));
}

/// Jet of the stable manifold from a stable-branch slope solved in its own
/// chart with model `m` (loop data with reversed orientation).
inline StableJetFn stable_jet_from_solution(const HamiltonianModel& m, const RiccatiSolution& stable) {
  if (stable.branch != Branch::stable) throw UnsupportedOperation("stable jet needs a stable-branch solution");
  auto prof = std::make_shared<const LoopProfile>(loop_profile(m));
  auto sol = std::make_shared<const RiccatiSolution>(stable);
  return [prof, sol](double qt) {
    if (!sol->covers(qt)) {
      throw DomainError("q1~=" + std::to_string(qt) + " outside the stable solution's range");
    }
    StableJet j;
    j.dS0 = -prof->dS0(qt);
    j.d2S0 = -fd::derivative(prof->dS0, qt);
    j.S1 = -prof->S1(qt);
    j.dS1 = -prof->dS1(qt);
    j.T = sol->at(qt);
    return j;
  };
}

/// Jet of the stable manifold obtained by reflecting the unstable one:
/// S^s(q) = -S^u(Rq) for an R-reversible model.
inline StableJetFn stable_jet_from_reversibility(const HamiltonianModel& m, const RiccatiSolution& unstable) {
  if (!m.reversibility) throw UnsupportedOperation("model declares no reversibility");
  if (unstable.branch != Branch::unstable) throw UnsupportedOperation("expected an unstable-branch solution");
  auto prof = std::make_shared<const LoopProfile>(loop_profile(m));
  auto sol = std::make_shared<const RiccatiSolution>(unstable);
  const double r1 = m.reversibility->r1;
  const double r2 = m.reversibility->r2;
  return [prof, sol, r1, r2](double qt) {
    const double x = r1 * qt;
    if (!sol->covers(x)) throw DomainError("q1~=" + std::to_string(qt) + " outside the unstable solution's range");
    StableJet j;
    j.dS0 = -r1 * prof->dS0(x);
    j.d2S0 = -fd::derivative(prof->dS0, x);
    j.S1 = -r2 * prof->S1(x);
    j.dS1 = -r1 * r2 * prof->dS1(x);
    j.T = -sol->at(x);
    return j;
  };
}

/// Stable slope from an unstable solution through R-reversibility.
struct ReversedStable {
  std::shared_ptr<const RiccatiSolution> unstable;
  Reversibility rev;

  /// T^s(q1) = -T^u(r1 q1).
  double Ts(double q1) const { return -unstable->at(rev.r1 * q1); }
  /// Torus form with r1 = -1: T^s_hat(q1) = T^s(q1 - 2 pi) = -T^u(2 pi - q1).
  double Ts_hat(double q1) const { return Ts(q1 - kTwoPi); }
};

inline ReversedStable stable_from_reversibility(const RiccatiSolution& unstable, const HamiltonianModel& m) {
  if (!m.reversibility) {
    throw UnsupportedOperation("model declares no reversibility; solve the stable side and use jet transport");
  }
  if (unstable.branch != Branch::unstable) throw UnsupportedOperation("expected an unstable-branch solution");
  return {std::make_shared<const RiccatiSolution>(unstable), *m.reversibility};
}

enum class Verdict { transversal, tangent, inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::transversal: return "transversal";
    case Verdict::tangent: return "tangent";
    case Verdict::inconclusive: break;
  }
  return "inconclusive";
}

struct TransversalityReport {
  double q1_star = 0.0;
  double Tu = 0.0;
  double Ts_hat = 0.0;
  double gap = 0.0;
  double tol = 0.0;
  double tol_tangent = 0.0;
  Verdict verdict = Verdict::inconclusive;
  std::string route;
  double rtol_used = 0.0;
  std::size_t steps = 0;
};

/// Three-valued comparison of the two slopes. `tol` <= 0 selects the default
/// 1e-6 * max(1, |Tu|, |Ts_hat|); the tangency threshold is 1e-10 on the same
/// scale, and never above tol / 100 so that an inconclusive band always
/// separates the two definite verdicts.
inline TransversalityReport transversality_verdict(double Tu, double Ts_hat, double tol = 0.0) {
  if (!std::isfinite(Tu) || !std::isfinite(Ts_hat)) throw NumericalFailure("transversality verdict: non-finite slope");
  TransversalityReport r;
  r.Tu = Tu;
  r.Ts_hat = Ts_hat;
  r.gap = Tu - Ts_hat;
  const double scale = std::max({1.0, std::abs(Tu), std::abs(Ts_hat)});
  r.tol = tol > 0.0 ? tol : 1e-6 * scale;
  r.tol_tangent = std::min(1e-10 * scale, 1e-2 * r.tol);
  const double g = std::abs(r.gap);
  if (g > r.tol) {
    r.verdict = Verdict::transversal;
  } else if (g < r.tol_tangent) {
    r.verdict = Verdict::tangent;
  } else {
    r.verdict = Verdict::inconclusive;
  }
  return r;
}

struct TransversalityOptions {
  RiccatiOptions solver{1e-12, 1e-14};
  double tol = 0.0;            // verdict tolerance, 0 for the default
  double min_rtol = 1e-13;     // tightening stops here
  bool auto_tighten = true;    // retry with rtol / 100 while inconclusive
};

namespace detail {

template <class Attempt>
TransversalityReport with_tightening(const TransversalityOptions& o, Attempt attempt) {
  RiccatiOptions so = o.solver;
  so.startup_check = false;
  TransversalityReport r = attempt(so);
  while (o.auto_tighten && r.verdict == Verdict::inconclusive && so.rtol > o.min_rtol) {
    so.rtol = std::max(so.rtol / 100.0, o.min_rtol);
    so.atol = std::min(so.atol, so.rtol * 1e-2);
    r = attempt(so);
  }
  r.rtol_used = so.rtol;
  return r;
}

}  // namespace detail

/// Torus case (periodic model, r1 = -1): transversality iff T^u(pi) != 0.
inline TransversalityReport torus_transversality(const HamiltonianModel& m, const TransversalityOptions& o = {}) {
  if (!m.periodic) throw UnsupportedOperation("torus transversality needs a periodic model");
  if (!m.reversibility || m.reversibility->r1 != -1) {
    throw UnsupportedOperation("torus transversality needs reversibility with r1 = -1");
  }
  const LoopProfile prof = loop_profile(m);
  return detail::with_tightening(o, [&](const RiccatiOptions& so) {
    RiccatiSolution u;
    try {
      u = solve_riccati(m, prof, kPi, so);
    } catch (const GraphFormLost& e) {
      throw GraphFormLost(e.where(), "H4' violated before pi: ");
    }
    const ReversedStable s = stable_from_reversibility(u, m);
    TransversalityReport r = transversality_verdict(u.final_value(), s.Ts_hat(kPi), o.tol);
    r.q1_star = kPi;
    r.route = "torus reversibility";
    r.steps = u.diagnostics.steps;
    return r;
  });
}

/// Heteroclinic case: the stable manifold is solved in its own chart
/// (`stable_model`) and carried to the unstable chart through `transition`.
inline TransversalityReport jet_route_transversality(const HamiltonianModel& m, const HamiltonianModel& stable_model,
                                                     const ChartTransition& transition, double q1_star,
                                                     const TransversalityOptions& o = {}) {
  const LoopProfile prof = loop_profile(m);
  const LoopProfile sprof = loop_profile(stable_model);
  const double qt = transition.chi0(q1_star);
  return detail::with_tightening(o, [&](const RiccatiOptions& so) {
    const RiccatiSolution u = solve_riccati(m, prof, q1_star, so);
    const RiccatiSolution s = solve_riccati(stable_model, sprof, qt, so, Branch::stable);
    const double Ts_hat = jet_transport_stable(stable_jet_from_solution(stable_model, s), transition, q1_star);
    TransversalityReport r = transversality_verdict(u.final_value(), Ts_hat, o.tol);
    r.q1_star = q1_star;
    r.route = "chart transition";
    r.steps = u.diagnostics.steps + s.diagnostics.steps;
    return r;
  });
}

}  // namespace transverse

#endif  // TRANSVERSE_CHART_HPP
