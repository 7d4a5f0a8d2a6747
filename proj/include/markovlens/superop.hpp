#pragma once

// Superoperators in the natural representation: a d^2 x d^2 matrix acting on
// column-stacked operators. The Choi matrix convention is the unnormalized
// C = sum_ij |i><j| (x) Phi(|i><j|); block (i, j) of C is Phi(|i><j|).

#include <cstdint>
#include <vector>

#include "markovlens/linalg.hpp"

namespace markovlens {

class Superoperator {
 public:
  Superoperator() = default;
  /// `natural` must be d^2 x d^2.
  Superoperator(Eigen::Index d, Matrix natural);

  static Superoperator identity(Eigen::Index d);
  static Superoperator zero(Eigen::Index d);
  /// X -> A X B.
  static Superoperator sandwich(const Matrix& a, const Matrix& b);

  Eigen::Index dim() const noexcept { return d_; }
  const Matrix& natural() const noexcept { return n_; }

  Matrix apply(const Matrix& a) const;

 private:
  Eigen::Index d_ = 0;
  Matrix n_;
};

Superoperator compose(const Superoperator& second, const Superoperator& first);
Superoperator add(const Superoperator& a, const Superoperator& b);
Superoperator scale(const Superoperator& a, cplx c);
double hs_distance(const Superoperator& a, const Superoperator& b);

class ChoiMatrix {
 public:
  ChoiMatrix() = default;
  ChoiMatrix(Eigen::Index d, Matrix c);

  Eigen::Index dim() const noexcept { return d_; }
  const Matrix& matrix() const noexcept { return c_; }
  /// Phi(|i><j|).
  Matrix block(Eigen::Index i, Eigen::Index j) const;

 private:
  Eigen::Index d_ = 0;
  Matrix c_;
};

ChoiMatrix to_choi(const Superoperator& s);
Superoperator from_choi(const ChoiMatrix& c);

struct PropertyCheck {
  bool holds;
  /// min Choi eigenvalue for CP checks, a residual norm otherwise.
  double value;
};

/// CP iff the map is Hermiticity preserving and its Choi matrix is PSD.
PropertyCheck is_cp(const Superoperator& s, double tol);
/// Residual ||Tr_out(C) - I||_F (the map's trace functional against Tr).
PropertyCheck is_tp(const Superoperator& s, double tol);
/// Residual max|C - C^dagger|.
PropertyCheck is_hp(const Superoperator& s, double tol);

/// Trace-preservation residual restricted to span(domain): max |Tr S(B) - Tr B|.
double tp_residual_on(const Superoperator& s, const std::vector<Matrix>& domain);

/// Kraus operators from a Choi matrix. Eigenvalues in [-tol, 0) are clipped;
/// anything below -tol raises NotCompletelyPositive.
std::vector<Matrix> kraus_from_choi(const ChoiMatrix& c, double tol);
Superoperator from_kraus(const std::vector<Matrix>& kraus);

/// 1_a (x) S acting on (a d) x (a d) operators; S acts on the second factor.
Superoperator tensor_with_identity(const Superoperator& s, Eigen::Index a);

/// Apply 1_a (x) S blockwise without forming the enlarged natural matrix.
Matrix apply_with_ancilla(const Superoperator& s, const Matrix& x, Eigen::Index a);

/// Lower-bound estimate of the induced trace norm over Hermitian inputs.
/// Maximizes ||S(X)||_1 over normalized rank-one projectors, differences of
/// random pure states and the canonical Hermitian basis. Not a certified value.
double induced_trace_norm_estimate(const Superoperator& s, int n_samples = 200,
                                   std::uint64_t seed = 0);

/// Same estimate restricted to Hermitian inputs from span(domain). Random
/// samples are followed by a short hill climb on the ratio ||S(X)||_1/||X||_1.
double induced_trace_norm_estimate(const Superoperator& s,
                                   const std::vector<Matrix>& domain,
                                   int n_samples = 200, std::uint64_t seed = 0);

// Standard maps used throughout.
namespace channels {
Superoperator transpose(Eigen::Index d);
/// X -> omega Tr(X).
Superoperator replacement(const Matrix& omega);
/// X -> I Tr(X) / d.
Superoperator depolarizing(Eigen::Index d);
/// X -> (X + sigma_z X sigma_z)/2.
Superoperator dephasing_z();
}  // namespace channels

}  // namespace markovlens
