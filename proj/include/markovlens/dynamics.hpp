#pragma once

// Time-parameterized dynamical maps t -> Lambda_t: closed-form presets,
// families integrated from a time-local generator, generator extraction and
// the canonical GKLS split.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "markovlens/grid.hpp"
#include "markovlens/linalg.hpp"
#include "markovlens/signal.hpp"
#include "markovlens/superop.hpp"

namespace markovlens {

class MapFamily {
 public:
  using Evaluator = std::function<Superoperator(double)>;

  MapFamily(Eigen::Index d, double t_max, std::string kind, Evaluator evaluator);

  Eigen::Index dim() const noexcept { return d_; }
  double t_max() const noexcept { return t_max_; }
  const std::string& kind() const noexcept { return kind_; }

  /// Lambda_t for t >= 0. Times past t_max are evaluated by the same rule.
  Superoperator operator()(double t) const { return evaluate(t); }
  Superoperator evaluate(double t) const;

 private:
  Eigen::Index d_;
  double t_max_;
  std::string kind_;
  Evaluator eval_;
};

using GeneratorFn = std::function<Superoperator(double)>;

// Presets ------------------------------------------------------------------

MapFamily identity_family(Eigen::Index d, double t_max);

/// Qubit amplitude damping driven by G(t): rho_00 -> |G|^2 rho_00,
/// rho_01 -> G rho_01, rho_11 -> (1-|G|^2) rho_00 + rho_11. Index 0 is the
/// excited state, index 1 the ground state.
MapFamily preset_amplitude_damping(const ScalarSignal& g, double t_max);

/// Amplitude damping from its generator data: G(t) = exp(-Gamma(t)/2 - i S(t)/2)
/// with Gamma, S the integrals of the decay rate and the frequency shift.
MapFamily preset_amplitude_damping_rates(const ScalarSignal& rate,
                                         const ScalarSignal& shift, double t_max);

/// Time-dependent Pauli channel from its damping eigenvalues:
/// Lambda(sigma_i) = lambda_i(t) sigma_i, Lambda(I) = I.
MapFamily preset_pauli_lambda(const ScalarSignal& l1, const ScalarSignal& l2,
                              const ScalarSignal& l3, double t_max);

/// Pauli channel from rates: lambda_i = exp(-Gamma_j - Gamma_k).
MapFamily preset_pauli_rates(const ScalarSignal& g1, const ScalarSignal& g2,
                             const ScalarSignal& g3, double t_max);

/// Lambda_t(rho) = (1 - F) rho + F omega Tr(rho).
MapFamily preset_equilibrium_relaxation(const DensityMatrix& omega,
                                        const ScalarSignal& f, double t_max);

// Generators ---------------------------------------------------------------

/// Natural matrix of rho -> A rho B.
Matrix sandwich_natural(const Matrix& a, const Matrix& b);

struct JumpTerm {
  Matrix op;
  ScalarSignal rate;
};

/// rho -> -i[H, rho] + sum_k gamma_k(t) (L_k rho L_k^dag - {L_k^dag L_k, rho}/2).
GeneratorFn gkls_generator(const Matrix& hamiltonian, std::vector<JumpTerm> jumps);

/// Generator of the amplitude-damping preset:
/// -i s(t)/2 [sigma_+ sigma_-, rho] + gamma(t) D[sigma_-](rho).
GeneratorFn amplitude_damping_generator(const ScalarSignal& rate,
                                        const ScalarSignal& shift);

/// (1/2) sum_k gamma_k(t) (sigma_k rho sigma_k - rho).
GeneratorFn pauli_generator(const ScalarSignal& g1, const ScalarSignal& g2,
                            const ScalarSignal& g3);

struct IntegrationOptions {
  double max_substep = 1e-2;
  /// Allowed max-abs discrepancy between step h and step h/2 solutions.
  double tol = 1e-8;
};

/// Solves d/dt Lambda = L_t Lambda, Lambda_0 = 1 with classical RK4 over the
/// grid. Each interval is integrated at step h and h/2; a discrepancy above
/// tol raises IntegrationError. Off-grid times are integrated from the
/// nearest earlier grid point.
MapFamily integrate_generator(GeneratorFn generator, Eigen::Index d, const TimeGrid& grid,
                              IntegrationOptions options = {});

/// L_t = (d/dt Lambda_t) Lambda_t^{-1} by central differences of step h
/// (second-order one-sided differences when t < h). Raises SingularGenerator
/// when the smallest singular value of Lambda_t is <= rank_tol.
Superoperator generator_from_family(const MapFamily& family, double t, double h,
                                    double rank_tol = 1e-9);

struct GKLSDecomposition {
  Matrix hamiltonian;
  /// Coefficients in the traceless basis F_1..F_{d^2-1}.
  Matrix kossakowski;
  /// Eigenvalues of the Kossakowski matrix, descending.
  RealVector rates;
  std::vector<Matrix> lindblad_ops;

  Superoperator reconstruct() const;
};

/// Canonical split of a Hermiticity-preserving, trace-annihilating generator.
GKLSDecomposition canonical_gkls(const Superoperator& generator, double tol = 1e-8);

struct DampingBasis {
  Eigen::VectorXcd eigenvalues;
  /// Lambda rho = sum_a lambda_a F_a Tr(G_a^dag rho), Tr(F_a^dag G_b) = delta_ab.
  std::vector<Matrix> right;
  std::vector<Matrix> left;
  double condition_number;
  double reconstruction_residual;
};

/// Biorthonormal eigen-decomposition of Lambda_t. Raises ValidationError when
/// the eigenvector matrix has condition number >= 1/tol.
DampingBasis damping_basis(const MapFamily& family, double t, double tol = 1e-8);
DampingBasis damping_basis(const Superoperator& map, double tol = 1e-8);

}  // namespace markovlens
