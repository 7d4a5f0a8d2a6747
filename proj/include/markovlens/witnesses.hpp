#pragma once

// Information-backflow witnesses: trace-norm trajectories
// t -> ||(1_a (x) Lambda_t) X||_1 and their finite-difference derivatives.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "markovlens/dynamics.hpp"
#include "markovlens/grid.hpp"
#include "markovlens/linalg.hpp"

namespace markovlens {

enum class AncillaKind { none, d, d_plus_1 };

std::string to_string(AncillaKind k);
/// Accepts "none", "d", "d_plus_1"; raises ContractViolation otherwise.
AncillaKind ancilla_kind_from_string(const std::string& s);
Eigen::Index ancilla_dim(AncillaKind k, Eigen::Index d);

struct WitnessRecord {
  Matrix witness;
  AncillaKind ancilla_kind = AncillaKind::none;
  std::vector<double> times;
  std::vector<double> norms;
  /// Central differences at the interior times times[1..n-2].
  std::vector<double> derivatives;
  /// Largest derivative; positive values signal backflow.
  double max_backflow = 0.0;
  double max_backflow_time = 0.0;
  /// Grid bracket [t_{i-1}, t_{i+1}] around the largest derivative.
  std::pair<double, double> bracket{0.0, 0.0};
  /// Interior times whose second difference spikes (trace-norm kinks).
  std::vector<double> kink_times;
  bool max_at_kink = false;
  /// Truncation allowance 10 * h_max^2; backflow below it is not reported.
  double tolerance = 0.0;

  bool violation_found() const { return max_backflow > tolerance; }
  double derivative_time(std::size_t i) const { return times[i + 1]; }
};

/// Fills derivatives, max_backflow, kinks and tolerance from times and norms.
void finalize_record(WitnessRecord& r);

/// Trajectory of ||(1_a (x) Lambda_t) X||_1 with a = ancilla_dim(kind, d).
WitnessRecord helstrom_witness(const MapFamily& family, const Matrix& x, AncillaKind kind,
                               const TimeGrid& grid);

/// ||Lambda_t(rho1 - rho2)||_1.
WitnessRecord blp_sigma(const MapFamily& family, const DensityMatrix& rho1,
                        const DensityMatrix& rho2, const TimeGrid& grid);

/// Delta = X (+) (-Tr X) |d+1><d+1| (x) rho_S on H' (x) H with dim H' = d+1;
/// H sits in the first d ancilla levels.
Matrix embed_delta(const Matrix& x, const DensityMatrix& rho_s);

/// Delta = scale (rho1 - rho2) for a traceless Hermitian Delta.
struct DensityPair {
  Matrix rho1;
  Matrix rho2;
  double scale;
};
DensityPair split_traceless(const Matrix& delta);

/// ||(1_{d+1} (x) Lambda_t)(rho1 - rho2)||_1 for densities on H' (x) H.
WitnessRecord bogna_witness(const MapFamily& family, const DensityMatrix& rho1,
                            const DensityMatrix& rho2, const TimeGrid& grid);

struct ScanOptions {
  AncillaKind ancilla_kind = AncillaKind::d;
  int n_samples = 64;
  int n_refine = 16;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Randomized search for the witness with the largest backflow. The result
/// depends only on (seed, n_samples, n_refine), never on threads.
WitnessRecord witness_scan(const MapFamily& family, const TimeGrid& grid,
                           const ScanOptions& options);

}  // namespace markovlens
