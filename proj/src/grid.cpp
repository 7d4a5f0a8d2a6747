#include "markovlens/grid.hpp"

#include <algorithm>
#include <cmath>

#include "markovlens/error.hpp"

namespace markovlens {

namespace {
constexpr double kMergeTol = 1e-12;
}

TimeGrid::TimeGrid(std::vector<double> times, std::vector<double> breakpoints)
    : times_(std::move(times)), breakpoints_(std::move(breakpoints)) {
  if (times_.size() < 2) throw ContractViolation("grid", "need at least two times");
  if (times_.front() != 0.0) throw ContractViolation("grid", "grid must start at 0");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1]) || !std::isfinite(times_[i]))
      throw ContractViolation("grid", "times must be strictly increasing and finite");
  std::sort(breakpoints_.begin(), breakpoints_.end());
  for (double b : breakpoints_) {
    auto it = std::lower_bound(times_.begin(), times_.end(), b - kMergeTol);
    if (it == times_.end() || std::abs(*it - b) > kMergeTol)
      throw ContractViolation("grid", "breakpoints must be grid times");
  }
}

TimeGrid TimeGrid::uniform(double t_max, std::size_t n_points) {
  if (!(t_max > 0.0) || n_points < 2)
    throw ContractViolation("grid", "uniform grid needs t_max > 0 and n_points >= 2");
  std::vector<double> t(n_points);
  for (std::size_t i = 0; i < n_points; ++i)
    t[i] = t_max * static_cast<double>(i) / static_cast<double>(n_points - 1);
  t.back() = t_max;
  return TimeGrid(std::move(t));
}

double TimeGrid::max_spacing() const {
  double h = 0.0;
  for (std::size_t i = 1; i < times_.size(); ++i) h = std::max(h, times_[i] - times_[i - 1]);
  return h;
}

TimeGrid TimeGrid::with_breakpoints(const std::vector<double>& extra) const {
  std::vector<double> t = times_;
  std::vector<double> b = breakpoints_;
  for (double x : extra) {
    auto it = std::lower_bound(t.begin(), t.end(), x - kMergeTol);
    if (it != t.end() && std::abs(*it - x) <= kMergeTol) {
      b.push_back(*it);
    } else {
      t.insert(it, x);
      b.push_back(x);
    }
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return TimeGrid(std::move(t), std::move(b));
}

}  // namespace markovlens
