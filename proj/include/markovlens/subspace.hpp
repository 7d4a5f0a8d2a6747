#pragma once

#include <vector>

#include "markovlens/linalg.hpp"
#include "markovlens/superop.hpp"

namespace markovlens {

inline constexpr double kRankTol = 1e-9;

/// Hilbert-Schmidt orthonormal Hermitian basis {G_a} of an operator subspace.
class SubspaceBasis {
 public:
  SubspaceBasis() = default;
  /// Validates orthonormality (1e-10) and Hermiticity of every element.
  SubspaceBasis(Eigen::Index d, std::vector<Matrix> elements, double tol);

  Eigen::Index dim() const noexcept { return d_; }
  std::size_t size() const noexcept { return elements_.size(); }
  bool empty() const noexcept { return elements_.empty(); }
  const std::vector<Matrix>& elements() const noexcept { return elements_; }
  const Matrix& operator[](std::size_t i) const { return elements_[i]; }
  double tol() const noexcept { return tol_; }

  /// d^2 x k matrix whose columns are vec(G_a).
  Matrix vec_columns() const;

 private:
  Eigen::Index d_ = 0;
  std::vector<Matrix> elements_;
  double tol_ = kRankTol;
};

/// Modified Gram-Schmidt with one reorthogonalization pass. Vectors whose
/// residual HS norm falls below tol * (largest input norm) are dropped.
SubspaceBasis gram_schmidt_hermitian(const std::vector<HermitianMatrix>& spanning,
                                     double tol = kRankTol);
SubspaceBasis gram_schmidt_hermitian(const std::vector<Matrix>& spanning,
                                     double tol = kRankTol);

/// Pi(X) = sum_a Tr(G_a X) G_a.
Superoperator orthogonal_projector(const SubspaceBasis& m);

}  // namespace markovlens
