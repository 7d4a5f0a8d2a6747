#include "markovlens/signal.hpp"

#include <cmath>
#include <limits>

#include "markovlens/error.hpp"

namespace markovlens {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(double x, const char* what) {
  if (!std::isfinite(x))
    throw ContractViolation("signal", std::string(what) + " must be finite");
}
}  // namespace

ScalarSignal::ScalarSignal(Variant v) : v_(std::move(v)) {
  std::visit(overloaded{
                 [](const signals::ExpDecay& s) { require_finite(s.rate, "rate"); },
                 [](const signals::CosineClipped& s) {
                   require_finite(s.omega, "omega");
                   if (std::isnan(s.t_star))
                     throw ContractViolation("signal", "t_star is NaN");
                 },
                 [](const signals::PiecewiseLinear& s) {
                   if (s.knots.empty())
                     throw ContractViolation("signal", "piecewise_linear needs knots");
                   for (std::size_t i = 0; i < s.knots.size(); ++i) {
                     require_finite(s.knots[i].first, "knot time");
                     require_finite(s.knots[i].second, "knot value");
                     if (i > 0 && !(s.knots[i].first > s.knots[i - 1].first))
                       throw ContractViolation("signal",
                                               "knot times must be strictly increasing");
                   }
                 },
                 [](const signals::InverseGap& s) {
                   if (!(s.t1 > 0.0) || !std::isfinite(s.t1))
                     throw ContractViolation("signal", "inverse_gap needs t1 > 0");
                 },
                 [](const signals::Sinusoidal& s) {
                   require_finite(s.amplitude, "amplitude");
                   require_finite(s.omega, "omega");
                   require_finite(s.phase, "phase");
                   require_finite(s.offset, "offset");
                 },
                 [](const signals::Constant& s) { require_finite(s.value, "value"); },
             },
             v_);
}

double ScalarSignal::value(double t) const {
  return std::visit(
      overloaded{
          [t](const signals::ExpDecay& s) { return std::exp(-s.rate * t); },
          [t](const signals::CosineClipped& s) {
            return t >= s.t_star ? 0.0 : std::cos(s.omega * t);
          },
          [t](const signals::PiecewiseLinear& s) {
            const auto& k = s.knots;
            if (t <= k.front().first) return k.front().second;
            if (t >= k.back().first) return k.back().second;
            for (std::size_t i = 1; i < k.size(); ++i) {
              if (t <= k[i].first) {
                const double w = (t - k[i - 1].first) / (k[i].first - k[i - 1].first);
                return (1.0 - w) * k[i - 1].second + w * k[i].second;
              }
            }
            return k.back().second;
          },
          [t](const signals::InverseGap& s) {
            return t < s.t1 ? 1.0 / (s.t1 - t) : kInf;
          },
          [t](const signals::Sinusoidal& s) {
            return s.amplitude * std::sin(s.omega * t + s.phase) + s.offset;
          },
          [](const signals::Constant& s) { return s.value; },
      },
      v_);
}

double ScalarSignal::integral(double t) const {
  return std::visit(
      overloaded{
          [t](const signals::ExpDecay& s) {
            if (s.rate == 0.0) return t;
            return -std::expm1(-s.rate * t) / s.rate;
          },
          [t](const signals::CosineClipped& s) {
            const double u = std::min(t, s.t_star);
            if (s.omega == 0.0) return u;
            return std::sin(s.omega * u) / s.omega;
          },
          [t](const signals::PiecewiseLinear& s) {
            // Exact trapezoids of the piecewise-linear interpolant.
            const auto& k = s.knots;
            auto f = [&](double x) { return ScalarSignal(s).value(x); };
            std::vector<double> pts{0.0};
            for (const auto& [kt, kv] : k)
              if (kt > 0.0 && kt < t) pts.push_back(kt);
            pts.push_back(t);
            double acc = 0.0;
            for (std::size_t i = 1; i < pts.size(); ++i)
              acc += 0.5 * (pts[i] - pts[i - 1]) * (f(pts[i]) + f(pts[i - 1]));
            return acc;
          },
          [t](const signals::InverseGap& s) {
            return t < s.t1 ? -std::log1p(-t / s.t1) : kInf;
          },
          [t](const signals::Sinusoidal& s) {
            const double lin = s.offset * t;
            if (s.omega == 0.0) return lin + s.amplitude * std::sin(s.phase) * t;
            return lin + s.amplitude * (std::cos(s.phase) - std::cos(s.omega * t + s.phase)) /
                             s.omega;
          },
          [t](const signals::Constant& s) { return s.value * t; },
      },
      v_);
}

std::string ScalarSignal::tag() const {
  return std::visit(overloaded{
                        [](const signals::ExpDecay&) { return std::string("exp_decay"); },
                        [](const signals::CosineClipped&) {
                          return std::string("cosine_clipped");
                        },
                        [](const signals::PiecewiseLinear&) {
                          return std::string("piecewise_linear");
                        },
                        [](const signals::InverseGap&) { return std::string("inverse_gap"); },
                        [](const signals::Sinusoidal&) { return std::string("sinusoidal"); },
                        [](const signals::Constant&) { return std::string("constant"); },
                    },
                    v_);
}

}  // namespace markovlens
