#ifndef TRANSVERSE_CHART_TRANSITION_HPP
#define TRANSVERSE_CHART_TRANSITION_HPP

#include <functional>

#include "transverse/model.hpp"

namespace transverse {

/// Partial derivatives of a chart transition chi at (q1, 0) that enter the
/// second-order chain rule in q2.
struct TransitionJet {
  double dchi1_dq1 = 1.0;
  double dchi1_dq2 = 0.0;
  double dchi2_dq2 = 1.0;
  double d2chi1_dq2 = 0.0;
  double d2chi2_dq2 = 0.0;
};

/// Configuration-space change q~ = chi(q) between the unstable chart and the
/// chart where the stable manifold is described. Both charts keep the loop on
/// their q2 = 0 line: chi(q1, 0) = (chi0(q1), 0).
struct ChartTransition {
  std::function<Point2(const Point2&)> chi;
  ScalarFn chi0;
  std::function<TransitionJet(double)> jet2;

  static ChartTransition identity() {
    return {[](const Point2& q) { return q; }, [](double q1) { return q1; }, [](double) { return TransitionJet{}; }};
  }

  /// Shift q~ = (q1 - period, q2), used on the torus.
  static ChartTransition shift(double period) {
    return {[period](const Point2& q) { return Point2{q[0] - period, q[1]}; },
            [period](double q1) { return q1 - period; }, [](double) { return TransitionJet{}; }};
  }
};

}  // namespace transverse

#endif  // TRANSVERSE_CHART_TRANSITION_HPP
