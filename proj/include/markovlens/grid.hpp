#pragma once

#include <cstddef>
#include <vector>

namespace markovlens {

/// Strictly increasing times starting at 0, with a flagged subset of
/// rank-drop times.
class TimeGrid {
 public:
  TimeGrid() = default;
  explicit TimeGrid(std::vector<double> times, std::vector<double> breakpoints = {});

  /// n_points equally spaced times on [0, t_max], endpoints included.
  static TimeGrid uniform(double t_max, std::size_t n_points);

  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  std::size_t size() const noexcept { return times_.size(); }
  double operator[](std::size_t i) const { return times_[i]; }
  double t_max() const { return times_.back(); }
  double max_spacing() const;

  /// Copy with extra breakpoints inserted into both lists (merging duplicates
  /// closer than 1e-12).
  TimeGrid with_breakpoints(const std::vector<double>& extra) const;

 private:
  std::vector<double> times_;
  std::vector<double> breakpoints_;
};

}  // namespace markovlens
