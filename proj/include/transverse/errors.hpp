#ifndef TRANSVERSE_ERRORS_HPP
#define TRANSVERSE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace transverse {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the interval where a function is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Built-in model parameters violate their admissibility constraints.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// The requested operation does not apply to this model (e.g. loop action
/// on a non-periodic configuration space).
class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

/// The model's hypotheses fail in a way that prevents the computation.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

/// The loop cannot be placed on q2 = 0: -2 V0 / beta is negative somewhere
/// inside the loop interval.
class NoLoopError : public HypothesisError {
 public:
  using HypothesisError::HypothesisError;
};

/// V1 is inconsistent with V0 along the loop (restriction residual too large).
class InconsistentModelError : public HypothesisError {
 public:
  using HypothesisError::HypothesisError;
};

/// Numerical failure: step-size underflow, non-finite values, quadrature
/// that cannot reach its target.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// The Riccati slope exceeded its cap: the manifold is no longer a graph
/// over the configuration space past `where()`.
class GraphFormLost : public NumericalFailure {
 public:
  explicit GraphFormLost(double q1, const std::string& context = "")
      : NumericalFailure(context + "graph form lost / blow-up at q1=" + std::to_string(q1)), q1_(q1) {}
  double where() const noexcept { return q1_; }

 private:
  double q1_;
};

}  // namespace transverse

#endif  // TRANSVERSE_ERRORS_HPP
