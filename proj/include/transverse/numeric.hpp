#ifndef TRANSVERSE_NUMERIC_HPP
#define TRANSVERSE_NUMERIC_HPP

// Small numerical toolbox shared by the modules: intervals, finite
// differences, adaptive quadrature, bisection, and a dense-output
// Dormand-Prince runner.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "transverse/errors.hpp"

namespace transverse {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

using ScalarFn = std::function<double(double)>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
  double width() const noexcept { return hi - lo; }
};

/// Uniform grid of `n` points on [a, b], endpoints included.
inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = a;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.back() = b;
  return out;
}

namespace fd {

/// Step used for first derivatives of model coefficients.
inline double first_step(double x) { return 1e-6 * std::max(1.0, std::abs(x)); }

/// Fourth-order central difference.
template <class F>
double derivative(const F& f, double x, double h) {
  return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
}

template <class F>
double derivative(const F& f, double x) {
  return derivative(f, x, first_step(x));
}

/// Fourth-order central second difference. The larger default step keeps the
/// rounding term small; the coefficients it is used on are analytic.
template <class F>
double second_derivative(const F& f, double x, double h) {
  return (-f(x - 2 * h) + 16 * f(x - h) - 30 * f(x) + 16 * f(x + h) - f(x + 2 * h)) /
         (12 * h * h);
}

template <class F>
double second_derivative(const F& f, double x) {
  return second_derivative(f, x, 1e-3 * std::max(1.0, std::abs(x)));
}

}  // namespace fd

/// Adaptive Gauss-Kronrod (15/31) quadrature. Returns the integral and writes
/// the error estimate to `error` when given. Bisection depth is capped so that
/// a relative tolerance below the integrand's rounding level cannot stall it;
/// callers keep intervals short enough for the cap to be harmless.
template <class F>
double integrate(const F& f, double a, double b, double tol = 1e-13, double* error = nullptr, unsigned max_depth = 8) {
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, max_depth, tol, &err);
  if (!std::isfinite(value)) throw NumericalFailure("quadrature produced a non-finite value");
  if (error) *error = err;
  return value;
}

/// Bisection on a sign change of `f` over [a, b] down to an absolute bracket
/// width `xtol`.
template <class F>
double bisect(const F& f, double a, double b, double xtol = 1e-12) {
  double fa = f(a);
  const double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0) == (fb > 0)) throw NumericalFailure("bisection: root not bracketed");
  for (int it = 0; it < 400 && std::abs(b - a) > xtol; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm > 0) == (fa > 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

struct OdeTolerances {
  double rtol = 1e-9;
  double atol = 1e-12;
};

/// Step-by-step Dormand-Prince 5(4) integration with continuous extension.
/// Integrates backwards when `dt0 < 0`; internally the stepper always runs
/// forward in s = dir * t, since a capped step size is applied as a positive
/// bound.
template <std::size_t N>
class DenseRun {
 public:
  using State = std::array<double, N>;
  using System = std::function<void(const State&, State&, double)>;

  DenseRun(System sys, const State& x0, double t0, double dt0, OdeTolerances tol, double max_dt)
      : sys_(std::move(sys)),
        stepper_(boost::numeric::odeint::make_dense_output(
            tol.atol, tol.rtol, std::abs(max_dt), boost::numeric::odeint::runge_kutta_dopri5<State>())),
        dir_(dt0 < 0 ? -1.0 : 1.0) {
    stepper_.initialize(x0, dir_ * t0, std::abs(dt0));
  }

  /// Advances one accepted step. Throws on step-size underflow or non-finite state.
  void step() {
    auto rhs = [this](const State& x, State& dx, double s) {
      sys_(x, dx, dir_ * s);
      if (dir_ < 0) {
        for (auto& v : dx) v = -v;
      }
    };
    try {
      stepper_.do_step(rhs);
    } catch (const boost::numeric::odeint::step_adjustment_error&) {
      throw NumericalFailure("integration failure: step size underflow near t=" + std::to_string(time()));
    }
    ++steps_;
    for (double v : stepper_.current_state()) {
      if (!std::isfinite(v)) {
        throw NumericalFailure("integration failure: non-finite state near t=" + std::to_string(time()));
      }
    }
    const double dt = std::abs(stepper_.current_time_step());
    if (dt < 1e-14 * std::max(1.0, std::abs(time()))) {
      throw NumericalFailure("integration failure: step size underflow near t=" + std::to_string(time()));
    }
  }

  double time() const { return dir_ * stepper_.current_time(); }
  double previous_time() const { return dir_ * stepper_.previous_time(); }
  const State& state() const { return stepper_.current_state(); }
  std::size_t steps() const noexcept { return steps_; }
  bool forward() const noexcept { return dir_ > 0; }

  /// State at `t` inside the last accepted step.
  State state_at(double t) const {
    State x{};
    stepper_.calc_state(dir_ * t, x);
    return x;
  }

  /// Restarts the stepper from a modified state (used for rescaling).
  void reset(const State& x) {
    stepper_.initialize(x, stepper_.current_time(), std::abs(stepper_.current_time_step()));
  }

  /// True once `target` lies within the last accepted step.
  bool reached(double target) const { return forward() ? time() >= target : time() <= target; }

 private:
  System sys_;
  decltype(boost::numeric::odeint::make_dense_output(
      1.0, 1.0, 1.0, boost::numeric::odeint::runge_kutta_dopri5<State>())) stepper_;
  double dir_;
  std::size_t steps_ = 0;
};

/// Integrates `sys` from t0 to t1 and returns the end state.
template <std::size_t N>
std::array<double, N> integrate_to(typename DenseRun<N>::System sys, const std::array<double, N>& x0,
                                   double t0, double t1, OdeTolerances tol) {
  if (t1 == t0) return x0;
  const double span = std::abs(t1 - t0);
  const double dir = t1 > t0 ? 1.0 : -1.0;
  DenseRun<N> run(std::move(sys), x0, t0, dir * std::min(1e-3, span * 1e-3), tol, span);
  while (!run.reached(t1)) run.step();
  return run.state_at(t1);
}

}  // namespace transverse

#endif  // TRANSVERSE_NUMERIC_HPP
