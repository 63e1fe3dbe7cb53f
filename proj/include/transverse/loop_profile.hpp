#ifndef TRANSVERSE_LOOP_PROFILE_HPP
#define TRANSVERSE_LOOP_PROFILE_HPP

// The known orbit on q2 = 0: p1 = S0'(q1), p2 = S1(q1).

#include <cmath>
#include <sstream>

#include "transverse/errors.hpp"
#include "transverse/model.hpp"
#include "transverse/numeric.hpp"

namespace transverse {

struct LoopProfile {
  ScalarFn dS0;   // S0', positive on the loop interior
  ScalarFn S1;
  ScalarFn dS1;   // S1'
  ScalarFn beta;  // det B0 / b220
  Interval interval;
  bool periodic = false;
  double max_restriction_residual = 0.0;
  double worst_residual_at = 0.0;
};

namespace detail {

/// Sign of S0' continued off the loop interval: odd through 0, and
/// 2pi-antiperiodic on the torus.
inline double loop_sign(double q1, bool periodic) {
  if (periodic) {
    const double k = std::floor(q1 / kTwoPi);
    return std::fmod(std::abs(k), 2.0) == 0.0 ? 1.0 : -1.0;
  }
  return q1 < 0.0 ? -1.0 : 1.0;
}

}  // namespace detail

inline double restriction_residual(const LoopProfile& p, const HamiltonianModel& m, double q1) {
  return p.dS1(q1) * p.beta(q1) * p.dS0(q1) + m.V1(q1);
}

/// Builds S0' = sqrt(-2 V0 / beta), S1 = -(b120 / b220) S0' and checks the
/// compatibility of V1 along the loop.
inline LoopProfile loop_profile(const HamiltonianModel& m) {
  LoopProfile p;
  p.periodic = m.periodic;
  p.interval = {0.0, m.loop_end()};
  p.beta = [m](double q) { return m.B0(q).det() / m.b220(q); };

  const auto g = linspace(p.interval.lo, p.interval.hi, 258);
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    const double r = -2.0 * m.V0(g[i]) / p.beta(g[i]);
    if (!(r > 0.0)) {
      std::ostringstream os;
      os << "no loop on q2=0 for this model: -2 V0/beta = " << r << " at q1=" << g[i];
      throw NoLoopError(os.str());
    }
  }

  const bool periodic = m.periodic;
  p.dS0 = [m, periodic, beta = p.beta](double q) {
    const double r = -2.0 * m.V0(q) / beta(q);
    return detail::loop_sign(q, periodic) * std::sqrt(std::max(0.0, r));
  };
  p.S1 = [m, dS0 = p.dS0](double q) { return -m.b120(q) / m.b220(q) * dS0(q); };
  if (m.loop_dS1) {
    p.dS1 = m.loop_dS1;
  } else {
    p.dS1 = [S1 = p.S1](double q) { return fd::derivative(S1, q); };
  }

  const auto grid = linspace(p.interval.lo, p.interval.hi, 200);
  for (double q : grid) {
    const double r = std::abs(restriction_residual(p, m, q));
    if (r > p.max_restriction_residual) {
      p.max_restriction_residual = r;
      p.worst_residual_at = q;
    }
  }
  if (p.max_restriction_residual > 1e-6) {
    std::ostringstream os;
    os << "inconsistent V1: |S1' beta S0' + V1| = " << p.max_restriction_residual << " at q1=" << p.worst_residual_at;
    throw InconsistentModelError(os.str());
  }
  return p;
}

struct InnerPosition {
  double q1 = 0.0;
  bool clipped = false;
};

/// Position after time t of the inner motion dq1/dt = beta S0' started at q1_start.
inline InnerPosition inner_time_param(const LoopProfile& p, double q1_start, double t,
                                      OdeTolerances tol = {1e-12, 1e-14}) {
  if (!(q1_start > p.interval.lo && q1_start < p.interval.hi)) {
    throw DomainError("inner_time_param: start point must lie inside the loop interval");
  }
  if (t == 0.0) return {q1_start, false};
  using State = std::array<double, 1>;
  auto rhs = [&p](const State& x, State& dx, double) { dx[0] = p.beta(x[0]) * p.dS0(x[0]); };
  const double dir = t > 0 ? 1.0 : -1.0;
  DenseRun<1> run(rhs, State{q1_start}, 0.0, dir * std::min(1e-3, std::abs(t)), tol, std::abs(t));
  const Interval iv = p.interval;
  auto outside = [iv](double q) { return q < iv.lo || q > iv.hi; };
  while (true) {
    run.step();
    const double tt = dir > 0 ? std::min(run.time(), t) : std::max(run.time(), t);
    const double q = run.state_at(tt)[0];
    if (outside(q)) {
      return {q > iv.hi ? iv.hi : iv.lo, true};
    }
    if (run.reached(t)) return {q, false};
  }
}

/// Loop action: integral of p1 dq1 over one turn (torus only).
inline double loop_action_sigma(const LoopProfile& p) {
  if (!p.periodic) throw UnsupportedOperation("loop action is defined only for periodic models");
  return integrate(p.dS0, 0.0, kTwoPi, 1e-13);
}

}  // namespace transverse

#endif  // TRANSVERSE_LOOP_PROFILE_HPP
