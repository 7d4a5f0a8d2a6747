#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace markovlens {

/// Short %.6g rendering of a number for error messages.
inline std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

/// Base class for every error raised by the library. `stage()` names the
/// pipeline stage that failed so reports can point at it.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// A documented precondition was violated by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public ContractViolation {
 public:
  using ContractViolation::ContractViolation;
};

/// Gram-Schmidt received only numerically vanishing inputs.
class EmptyBasisError : public Error {
 public:
  using Error::Error;
};

/// Negative Choi spectrum beyond tolerance where a CP map was required.
class NotCompletelyPositive : public Error {
 public:
  using Error::Error;
};

/// Generator requested at a time where the map is not invertible.
class SingularGenerator : public Error {
 public:
  SingularGenerator(double time, double smallest_singular_value)
      : Error("generator",
              "map is not invertible at t=" + std::to_string(time) +
                  " (smallest singular value " +
                  std::to_string(smallest_singular_value) + ")"),
        time_(time),
        sigma_min_(smallest_singular_value) {}

  double time() const noexcept { return time_; }
  double smallest_singular_value() const noexcept { return sigma_min_; }

 private:
  double time_;
  double sigma_min_;
};

/// Kernel inclusion fails between two times, so no propagator exists.
class NotDivisible : public Error {
 public:
  NotDivisible(double s, double t, double residual)
      : Error("propagator", "kernel of Lambda_s is not contained in kernel of "
                            "Lambda_t for s=" + std::to_string(s) +
                                " t=" + std::to_string(t) + " (residual " +
                                std::to_string(residual) + ")"),
        s_(s), t_(t), residual_(residual) {}

  double s() const noexcept { return s_; }
  double t() const noexcept { return t_; }
  double residual() const noexcept { return residual_; }

 private:
  double s_, t_, residual_;
};

/// Limit of propagators did not settle within the step budget.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// A computed object failed one of its structural checks.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Linear constraints of a feasibility problem are inconsistent.
class MalformedConstraints : public Error {
 public:
  using Error::Error;
};

/// Numerical integration did not reach the requested accuracy.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

}  // namespace markovlens
