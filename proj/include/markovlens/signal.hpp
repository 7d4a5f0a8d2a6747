#pragma once

// Closed set of analytic scalar signals used as G(t), F(t), rates gamma(t)
// and damping eigenvalues lambda(t). Each signal knows its value and its
// integral from 0, both in closed form.

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace markovlens {

namespace signals {
/// exp(-rate t)
struct ExpDecay {
  double rate;
};
/// cos(omega t) for t < t_star, exactly 0 for t >= t_star.
struct CosineClipped {
  double omega;
  double t_star;
};
/// Linear interpolation between (t, value) knots; constant outside.
struct PiecewiseLinear {
  std::vector<std::pair<double, double>> knots;
};
/// 1/(t1 - t) for t < t1, +inf afterwards. Its integral diverges at t1.
struct InverseGap {
  double t1;
};
/// amplitude sin(omega t + phase) + offset
struct Sinusoidal {
  double amplitude;
  double omega;
  double phase;
  double offset;
};
struct Constant {
  double value;
};
}  // namespace signals

class ScalarSignal {
 public:
  using Variant = std::variant<signals::ExpDecay, signals::CosineClipped,
                               signals::PiecewiseLinear, signals::InverseGap,
                               signals::Sinusoidal, signals::Constant>;

  ScalarSignal() : v_(signals::Constant{0.0}) {}
  /// Validates parameters (knots strictly increasing, finite values).
  ScalarSignal(Variant v);  // NOLINT(google-explicit-constructor)

  static ScalarSignal exp_decay(double rate) { return {signals::ExpDecay{rate}}; }
  static ScalarSignal cosine_clipped(double omega, double t_star) {
    return {signals::CosineClipped{omega, t_star}};
  }
  static ScalarSignal piecewise_linear(std::vector<std::pair<double, double>> knots) {
    return {signals::PiecewiseLinear{std::move(knots)}};
  }
  static ScalarSignal inverse_gap(double t1) { return {signals::InverseGap{t1}}; }
  static ScalarSignal sinusoidal(double amplitude, double omega, double phase = 0.0,
                                 double offset = 0.0) {
    return {signals::Sinusoidal{amplitude, omega, phase, offset}};
  }
  static ScalarSignal constant(double c) { return {signals::Constant{c}}; }

  double operator()(double t) const { return value(t); }
  double value(double t) const;
  /// Integral of the signal over [0, t]; may be +inf.
  double integral(double t) const;

  const Variant& variant() const noexcept { return v_; }
  std::string tag() const;

 private:
  Variant v_;
};

}  // namespace markovlens
