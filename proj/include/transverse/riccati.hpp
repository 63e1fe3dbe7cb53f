#ifndef TRANSVERSE_RICCATI_HPP
#define TRANSVERSE_RICCATI_HPP

// Transverse slope T(q1) = d^2 S / dq2^2 (q1, 0) of an invariant manifold
// along the loop. It solves
//   beta S0' T' + 2 delta T + b220 T^2 = alpha,
// a Riccati equation that is singular at q1 = 0 where S0' vanishes.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "transverse/errors.hpp"
#include "transverse/loop_profile.hpp"
#include "transverse/model.hpp"
#include "transverse/numeric.hpp"

namespace transverse {

struct RiccatiCoefficients {
  ScalarFn alpha;
  ScalarFn beta;
  ScalarFn delta;
  ScalarFn b220;
  ScalarFn dS0;  // S0' of the loop, carried along for the singular factor
};

inline RiccatiCoefficients riccati_coefficients(const HamiltonianModel& m, const LoopProfile& p) {
  RiccatiCoefficients c;
  c.beta = p.beta;
  c.b220 = m.b220;
  c.dS0 = p.dS0;
  c.delta = [m, dS1 = p.dS1](double q) { return m.b120(q) * dS1(q); };
  c.alpha = [m, p](double q) {
    const double s0 = p.dS0(q);
    const double s1 = p.S1(q);
    const double ds1 = p.dS1(q);
    return m.Y(q) - m.b110(q) * ds1 * ds1 -
           0.5 * (m.b112(q) * s0 * s0 + 2.0 * m.b122(q) * s0 * s1 + m.b222(q) * s1 * s1);
  };
  return c;
}

/// Which invariant manifold the slope describes. The stable one uses the loop
/// data with reversed orientation: S0' -> -S0', S1 -> -S1.
enum class Branch { unstable, stable };

inline int branch_sign(Branch b) { return b == Branch::unstable ? 1 : -1; }

struct RiccatiInitial {
  double T0 = 0.0;
  double Delta = 0.0;
};

/// Initial slope at O: the root of b220 T^2 + 2 delta T - alpha = 0 whose sign
/// matches the manifold (positive for unstable, negative for stable).
inline RiccatiInitial riccati_initial(const RiccatiCoefficients& c, Branch branch = Branch::unstable) {
  const double d0 = c.delta(0.0);
  const double b0 = c.b220(0.0);
  const double a0 = c.alpha(0.0);
  const double Delta = d0 * d0 + b0 * a0;
  if (Delta < 0.0) {
    std::ostringstream os;
    os << "hypotheses violated: no real unstable slope (Delta=" << Delta << ")";
    throw HypothesisError(os.str());
  }
  const double s = branch_sign(branch);
  return {s * (-d0 + std::sqrt(Delta)) / b0, Delta};
}

struct RiccatiOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double epsilon = 0.0;   // start offset from q1 = 0; 0 selects 1e-4 * |loop interval|
  double cap = 1e8;       // |T| above this means the manifold folds
  double max_step = 0.0;  // 0 selects |target| / 1000
  bool startup_check = true;
  bool stop_at_blowup = false;  // return a truncated solution instead of throwing
  double start_offset = 0.0;    // added to T(eps); for stability probes
};

struct RiccatiDiagnostics {
  std::size_t steps = 0;
  double max_abs_T = 0.0;
  bool blowup = false;
  double blowup_at = std::numeric_limits<double>::quiet_NaN();
  bool startup_checked = false;
  double startup_spread = 0.0;  // |T+ - T-| at target for starts T(eps) +- 10 eps
  double kappa = 0.0;           // d/dq1 (beta S0') at 0, the inner expansion rate
};

struct RiccatiSolution {
  Branch branch = Branch::unstable;
  double T0 = 0.0;
  double Delta = 0.0;
  double psi0 = 0.0;          // 2 sqrt(Delta), decay rate of deviations in time
  double slope_at_origin = 0.0;  // T'(0)
  double epsilon_start = 0.0;
  double target = 0.0;
  std::vector<double> q, T, dT;  // accepted steps, ascending in q
  RiccatiDiagnostics diagnostics;

  double lo() const { return q.front(); }
  double hi() const { return q.back(); }
  bool covers(double x) const { return std::abs(x) < epsilon_start || (x >= lo() && x <= hi()); }

  /// T at x: Taylor polynomial near 0, cubic Hermite interpolation elsewhere.
  double at(double x) const { return eval(x, false); }
  double derivative_at(double x) const { return eval(x, true); }
  double final_value() const { return target > 0 ? T.back() : T.front(); }

 private:
  double eval(double x, bool deriv) const {
    if (std::abs(x) < epsilon_start) return deriv ? slope_at_origin : T0 + slope_at_origin * x;
    if (!(x >= lo() && x <= hi())) {
      std::ostringstream os;
      os << "q1=" << x << " outside the solved range [" << lo() << ", " << hi() << "]";
      throw DomainError(os.str());
    }
    auto it = std::upper_bound(q.begin(), q.end(), x);
    std::size_t i = it == q.end() ? q.size() - 2 : static_cast<std::size_t>(it - q.begin()) - 1;
    if (i + 1 >= q.size()) i = q.size() - 2;
    const double h = q[i + 1] - q[i];
    const double s = (x - q[i]) / h;
    const double y0 = T[i], y1 = T[i + 1], m0 = dT[i] * h, m1 = dT[i + 1] * h;
    if (deriv) {
      const double d = (6 * s * s - 6 * s) * y0 + (3 * s * s - 4 * s + 1) * m0 + (-6 * s * s + 6 * s) * y1 +
                       (3 * s * s - 2 * s) * m1;
      return d / h;
    }
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * m1;
  }
};

namespace detail {

struct SlopeProblem {
  RiccatiCoefficients c;
  double sigma = 1.0;

  double rhs(double q, double T) const {
    return (c.alpha(q) - 2.0 * sigma * c.delta(q) * T - c.b220(q) * T * T) / (sigma * c.beta(q) * c.dS0(q));
  }
  double residual(double q, double T, double dT) const {
    return sigma * c.beta(q) * c.dS0(q) * dT + 2.0 * sigma * c.delta(q) * T + c.b220(q) * T * T - c.alpha(q);
  }
};

struct SlopeRun {
  double value = 0.0;
  bool blowup = false;
  double blowup_at = 0.0;
};

/// Integrates T from q_start to target; records accepted steps when asked.
inline SlopeRun integrate_slope(const SlopeProblem& P, double q_start, double T_start, double target,
                                const RiccatiOptions& o, double max_step, RiccatiSolution* rec) {
  using State = std::array<double, 1>;
  auto sys = [&P](const State& x, State& dx, double q) { dx[0] = P.rhs(q, x[0]); };
  const double dir = target > q_start ? 1.0 : -1.0;
  const double h0 = dir * std::min(0.1 * std::abs(q_start), max_step);
  DenseRun<1> run(sys, State{T_start}, q_start, h0, {o.rtol, o.atol}, max_step);
  auto record = [&](double q, double T) {
    if (!rec) return;
    rec->q.push_back(q);
    rec->T.push_back(T);
    rec->dT.push_back(P.rhs(q, T));
    rec->diagnostics.max_abs_T = std::max(rec->diagnostics.max_abs_T, std::abs(T));
  };
  record(q_start, T_start);
  while (true) {
    run.step();
    if (rec) rec->diagnostics.steps = run.steps();
    if (run.reached(target)) {
      const double v = run.state_at(target)[0];
      if (std::abs(v) > o.cap) return {v, true, target};
      record(target, v);
      return {v, false, 0.0};
    }
    const double T = run.state()[0];
    if (std::abs(T) > o.cap) return {T, true, run.time()};
    record(run.time(), T);
  }
}

}  // namespace detail

/// Solves for the slope of the chosen manifold from q1 = 0 to q1_target.
/// The target's sign selects the side of the origin.
inline RiccatiSolution solve_riccati(const HamiltonianModel& m, const LoopProfile& prof, double q1_target,
                                     const RiccatiOptions& opts = {}, Branch branch = Branch::unstable) {
  if (q1_target == 0.0) throw DomainError("solve_riccati: target must differ from 0");
  m.require_in_domain(q1_target);
  const RiccatiCoefficients c = riccati_coefficients(m, prof);
  const RiccatiInitial init = riccati_initial(c, branch);

  RiccatiSolution sol;
  sol.branch = branch;
  sol.T0 = init.T0;
  sol.Delta = init.Delta;
  sol.psi0 = 2.0 * std::sqrt(init.Delta);
  sol.target = q1_target;
  const double eps = opts.epsilon > 0.0 ? opts.epsilon : 1e-4 * prof.interval.width();
  if (!(eps < std::abs(q1_target))) throw DomainError("solve_riccati: target lies inside the start offset");
  sol.epsilon_start = eps;

  detail::SlopeProblem P{c, static_cast<double>(branch_sign(branch))};

  // Linear Taylor start: differentiating the equation at 0 gives
  // T'(0) (sigma kappa + psi0 sigma) = alpha'(0) - 2 sigma delta'(0) T0 - b220'(0) T0^2.
  const double kappa = std::sqrt(-fd::second_derivative(m.V0, 0.0) * c.beta(0.0));
  const double h = 1e-3;
  const double da = fd::derivative(c.alpha, 0.0, h);
  const double dd = fd::derivative(c.delta, 0.0, h);
  const double db = m.derivative(Coef::b220, 0.0);
  sol.slope_at_origin = (da - 2.0 * P.sigma * dd * init.T0 - db * init.T0 * init.T0) / (P.sigma * (kappa + sol.psi0));
  sol.diagnostics.kappa = kappa;

  const double q_start = q1_target > 0 ? eps : -eps;
  const double T_start = init.T0 + sol.slope_at_origin * q_start + opts.start_offset;
  const double max_step = opts.max_step > 0.0 ? opts.max_step : std::abs(q1_target) / 1000.0;

  const detail::SlopeRun r = detail::integrate_slope(P, q_start, T_start, q1_target, opts, max_step, &sol);
  if (q1_target < 0) {
    std::reverse(sol.q.begin(), sol.q.end());
    std::reverse(sol.T.begin(), sol.T.end());
    std::reverse(sol.dT.begin(), sol.dT.end());
  }
  if (r.blowup) {
    sol.diagnostics.blowup = true;
    sol.diagnostics.blowup_at = r.blowup_at;
    if (!opts.stop_at_blowup) throw GraphFormLost(r.blowup_at);
    return sol;
  }

  if (opts.startup_check) {
    RiccatiOptions o = opts;
    const double a = detail::integrate_slope(P, q_start, T_start + 10.0 * eps, q1_target, o, max_step, nullptr).value;
    const double b = detail::integrate_slope(P, q_start, T_start - 10.0 * eps, q1_target, o, max_step, nullptr).value;
    sol.diagnostics.startup_checked = true;
    sol.diagnostics.startup_spread = std::abs(a - b);
  }
  return sol;
}

inline RiccatiSolution solve_riccati(const HamiltonianModel& m, double q1_target, const RiccatiOptions& opts = {},
                                     Branch branch = Branch::unstable) {
  return solve_riccati(m, loop_profile(m), q1_target, opts, branch);
}

/// beta S0' T' + 2 delta T + b220 T^2 - alpha evaluated on the interpolated solution.
inline double riccati_residual(const RiccatiCoefficients& c, const RiccatiSolution& s, double q1) {
  const detail::SlopeProblem P{c, static_cast<double>(branch_sign(s.branch))};
  return P.residual(q1, s.at(q1), s.derivative_at(q1));
}

struct LinearOracleOptions {
  double rtol = 1e-11;
  double atol = 1e-13;
  double seed_decades = 25.0;  // start at q1 = target * exp(-seed_decades)
};

/// Independent evaluation of the unstable slope at q1_target through the
/// linear equation y'' + (a - b'/b) y' - b c y = 0 in the time variable of the
/// inner motion, with z = y' / (b y), a = 2 delta, b = b220, c = alpha.
/// The state uses u = log q1 so that the start near O is well scaled.
inline double riccati_to_linear_oracle(const HamiltonianModel& m, const LoopProfile& prof, double q1_target,
                                       const LinearOracleOptions& o = {}) {
  if (!(q1_target > 0.0)) throw DomainError("linear oracle: target must be positive");
  m.require_in_domain(q1_target);
  const RiccatiCoefficients c = riccati_coefficients(m, prof);
  const RiccatiInitial init = riccati_initial(c);

  using State = std::array<double, 3>;  // (log q1, y, y')
  auto sys = [&](const State& x, State& dx, double) {
    const double q = std::exp(x[0]);
    const double qdot = c.beta(q) * c.dS0(q);
    const double b = c.b220(q);
    const double bdot = m.derivative(Coef::b220, q) * qdot;
    dx[0] = qdot / q;
    dx[1] = x[2];
    dx[2] = -(2.0 * c.delta(q) - bdot / b) * x[2] + b * c.alpha(q) * x[1];
  };
  const double u_target = std::log(q1_target);
  const double q_seed = q1_target * std::exp(-o.seed_decades);
  State x{std::log(q_seed), 1.0, c.b220(q_seed) * init.T0};

  const double kappa = std::sqrt(-fd::second_derivative(m.V0, 0.0) * c.beta(0.0));
  DenseRun<3> run(sys, x, 0.0, 1e-3 / kappa, {o.rtol, o.atol}, 0.05 / kappa);
  while (true) {
    const double y_prev = run.state()[1];
    run.step();
    State s = run.state();
    if ((s[1] > 0) != (y_prev > 0) || s[1] == 0.0) {
      const double tz = bisect([&](double t) { return run.state_at(t)[1]; }, run.previous_time(), run.time(),
                               1e-15 * std::max(1.0, run.time()));
      throw GraphFormLost(std::exp(run.state_at(tz)[0]), "linear oracle: ");
    }
    if (s[0] >= u_target) {
      const double tc = bisect([&](double t) { return run.state_at(t)[0] - u_target; }, run.previous_time(),
                               run.time(), 1e-15 * std::max(1.0, run.time()));
      const State e = run.state_at(tc);
      return e[2] / (c.b220(q1_target) * e[1]);
    }
    if (std::abs(s[1]) > 1e100) {
      const double k = 1.0 / std::abs(s[1]);
      s[1] *= k;
      s[2] *= k;
      run.reset(s);
    }
  }
}

inline double riccati_to_linear_oracle(const HamiltonianModel& m, double q1_target, const LinearOracleOptions& o = {}) {
  return riccati_to_linear_oracle(m, loop_profile(m), q1_target, o);
}

}  // namespace transverse

#endif  // TRANSVERSE_RICCATI_HPP
