#pragma once

// Deterministic random ensembles. Every generator takes an explicit engine so
// results depend only on the seed.

#include <cstdint>
#include <random>
#include <vector>

#include "markovlens/linalg.hpp"

namespace markovlens {

using Rng = std::mt19937_64;

/// Engine seeded from (seed, stream) so independent tasks get independent,
/// reproducible streams.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Matrix with i.i.d. standard complex Gaussian entries.
Matrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng);
/// Haar-distributed normalized state vector.
Vector random_pure_state(Eigen::Index d, Rng& rng);
/// (G + G^dagger)/2 for Ginibre G, normalized to unit trace norm.
Matrix random_hermitian_unit_trace_norm(Eigen::Index d, Rng& rng);
/// W W^dagger / Tr for Ginibre W (full rank with probability one).
Matrix random_density(Eigen::Index d, Rng& rng, Eigen::Index rank = 0);
Matrix random_unitary(Eigen::Index d, Rng& rng);
/// Random Kraus set {K_i} with sum K_i^dagger K_i = I.
std::vector<Matrix> random_kraus(Eigen::Index d, Eigen::Index n_kraus, Rng& rng);

}  // namespace markovlens
