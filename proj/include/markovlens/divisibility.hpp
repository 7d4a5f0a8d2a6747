#pragma once

// Divisibility analysis of a dynamical map family on a time grid: numerical
// rank profiles, kernel/image subspaces, pseudoinverse propagators, limit
// projectors at rank-drop times and the CP-divisibility verdict.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "markovlens/dynamics.hpp"
#include "markovlens/grid.hpp"
#include "markovlens/subspace.hpp"
#include "markovlens/superop.hpp"

namespace markovlens {

struct Tolerances {
  /// Singular values <= rank_rtol * sigma_max(Lambda_0) count as zero.
  double rank_rtol = kRankTol;
  double kernel_tol = 1e-8;
  double image_tol = 1e-8;
  /// Slack on the smallest Choi eigenvalue.
  double choi_tol = 1e-7;
  double tp_tol = 1e-7;
  /// Absolute time precision of breakpoint bisection.
  double bisect_tol = 1e-6;
  int positivity_samples = 500;
  std::uint64_t positivity_seed = 0;
  /// Check every pair s < t instead of consecutive pairs only.
  bool exhaustive_pairs = false;
};

struct RankProfile {
  /// Grid times plus refined breakpoints, sorted.
  std::vector<double> times;
  std::vector<int> ranks;
  std::vector<RealVector> singular_values;
  double rtol = kRankTol;
  /// Absolute cut: rtol * sigma_max(Lambda_0).
  double threshold = 0.0;
  /// Times where the rank changes, refined to bisect_tol. Rank-drop dips
  /// between grid points with equal rank are included.
  std::vector<double> breakpoints;

  TimeGrid grid() const { return TimeGrid(times, breakpoints); }
  bool invertible_everywhere() const;
};

RankProfile rank_profile(const MapFamily& family, const TimeGrid& grid,
                         double rtol = kRankTol, double bisect_tol = 1e-6);

/// Absolute singular-value cut used for `family`: rtol * sigma_max(Lambda_0).
double rank_threshold(const MapFamily& family, double rtol);

/// Hermitian orthonormal bases of Ker and Im of the natural matrix; values
/// <= threshold count as zero. Relative variants scale by sigma_max(S).
SubspaceBasis kernel_basis_abs(const Superoperator& s, double threshold);
SubspaceBasis image_basis_abs(const Superoperator& s, double threshold);
SubspaceBasis kernel_basis(const Superoperator& s, double rtol = kRankTol);
SubspaceBasis image_basis(const Superoperator& s, double rtol = kRankTol);

struct DivisibilityCheck {
  bool divisible;
  double worst_residual;
  std::optional<double> first_violation_time;
  RankProfile profile;
};

/// Kernel inclusion Ker(Lambda_s) within Ker(Lambda_t) for consecutive pairs of
/// the grid augmented with detected breakpoints.
DivisibilityCheck is_divisible(const MapFamily& family, const TimeGrid& grid,
                               const Tolerances& tol = {});

struct ImageCheck {
  bool nonincreasing;
  double worst_residual;
  std::optional<double> first_violation_time;
};

/// ||(1 - P_s) P_t||_2 over consecutive pairs of the augmented grid.
ImageCheck is_image_nonincreasing(const MapFamily& family, const TimeGrid& grid,
                                  const Tolerances& tol = {});

struct PropagatorResult {
  Superoperator v;
  double s = 0.0;
  double t = 0.0;
  SubspaceBasis domain;
  double composition_residual = 0.0;
  double tp_on_domain_residual = 0.0;
  PropertyCheck cp_full{false, 0.0};
  double tp_full_residual = 0.0;
};

/// V = N_t N_s^+ with truncated pseudoinverse. Raises NotDivisible when
/// ||N_t K_s|| exceeds kernel_tol.
PropagatorResult propagator(const MapFamily& family, double t, double s,
                            const Tolerances& tol = {});

struct LimitOptions {
  /// Initial gap; <= 0 selects 1e-2 * t_max clamped into the open interval
  /// between the previous breakpoint and t_star.
  double eps0 = 0.0;
  double shrink = 0.5;
  int max_steps = 40;
  double tol = 1e-8;
  double rank_rtol = kRankTol;
};

struct LimitProjector {
  Superoperator projector;
  double t_star = 0.0;
  int steps = 0;
  double final_eps = 0.0;
  double cauchy_residual = 0.0;
  double idempotence_residual = 0.0;
  double tp_on_domain_residual = 0.0;
  double tp_full_residual = 0.0;
  double choi_min = 0.0;
  double image_residual = 0.0;
};

/// Pi = lim_{eps -> 0+} V_{t*, t*-eps}. V is built from the rank-truncated
/// N_{t*}. Raises DivergenceError without Cauchy convergence and
/// ValidationError naming the failed property otherwise.
LimitProjector limit_projector(const MapFamily& family, double t_star,
                               const LimitOptions& options = {}, double t_prev = 0.0);

/// Limit projectors for every breakpoint of a profile, computed once.
class ProjectorChain {
 public:
  ProjectorChain(const MapFamily& family, std::vector<double> breakpoints,
                 LimitOptions options = {});

  const std::vector<LimitProjector>& projectors() const noexcept { return projectors_; }
  /// Pi_{t_i} ... Pi_{t_1} over breakpoints t_j <= s; identity if none.
  Superoperator product_up_to(double s) const;

 private:
  Eigen::Index d_;
  std::vector<LimitProjector> projectors_;
};

/// V_{t,s} Pi_{t_i} ... Pi_{t_1} for the breakpoints at or before s.
PropagatorResult composite_propagator(const MapFamily& family, double t, double s,
                                      const ProjectorChain& chain,
                                      const Tolerances& tol = {});

enum class DivisibilityStatus {
  NOT_DIVISIBLE,
  DIVISIBLE_ONLY,
  CP_ON_IMAGE_ONLY,
  P_DIVISIBLE,
  CP_DIVISIBLE,
};

std::string to_string(DivisibilityStatus s);

struct PairEvidence {
  double s;
  double t;
  double choi_min;
  double tp_residual;
  double composition_residual;
  bool composite;
};

struct DivisibilityVerdict {
  DivisibilityStatus status = DivisibilityStatus::NOT_DIVISIBLE;
  RankProfile profile;
  bool invertible_everywhere = false;
  bool image_nonincreasing = false;
  double image_residual = 0.0;
  double worst_kernel_residual = 0.0;
  std::optional<double> first_violation_time;
  double worst_choi_min = 0.0;
  std::optional<std::pair<double, double>> worst_choi_pair;
  double worst_tp_residual = 0.0;
  double worst_composition_residual = 0.0;
  /// Sampled positivity of the propagators; set only when it was checked.
  std::optional<double> positivity_min;
  std::vector<LimitProjector> projectors;
  std::vector<PairEvidence> pairs;
  std::vector<std::string> notes;
};

DivisibilityVerdict cp_divisibility_verdict(const MapFamily& family, const TimeGrid& grid,
                                            const Tolerances& tol = {});

/// Smallest output eigenvalue of S over random pure-state inputs.
double sampled_positivity_min(const Superoperator& s, int n_samples, std::uint64_t seed);

}  // namespace markovlens
