#include "markovlens/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "markovlens/error.hpp"

namespace markovlens {

SubspaceBasis::SubspaceBasis(Eigen::Index d, std::vector<Matrix> elements, double tol)
    : d_(d), elements_(std::move(elements)), tol_(tol) {
  for (std::size_t a = 0; a < elements_.size(); ++a) {
    const Matrix& g = elements_[a];
    if (g.rows() != d || g.cols() != d)
      throw DimensionMismatch("operator_core", "basis element has wrong dimension");
    if (hermiticity_residual(g) > kDensityTol)
      throw ContractViolation("operator_core", "basis element is not Hermitian");
    for (std::size_t b = 0; b <= a; ++b) {
      const double want = a == b ? 1.0 : 0.0;
      if (std::abs(hs_inner(elements_[b], g) - want) > kDensityTol)
        throw ContractViolation("operator_core", "basis is not HS-orthonormal");
    }
  }
}

Matrix SubspaceBasis::vec_columns() const {
  Matrix cols(d_ * d_, static_cast<Eigen::Index>(elements_.size()));
  for (std::size_t a = 0; a < elements_.size(); ++a)
    cols.col(static_cast<Eigen::Index>(a)) = vec(elements_[a]);
  return cols;
}

SubspaceBasis gram_schmidt_hermitian(const std::vector<HermitianMatrix>& spanning,
                                     double tol) {
  std::vector<Matrix> raw;
  raw.reserve(spanning.size());
  for (const auto& h : spanning) raw.push_back(h.matrix());
  return gram_schmidt_hermitian(raw, tol);
}

SubspaceBasis gram_schmidt_hermitian(const std::vector<Matrix>& spanning, double tol) {
  if (spanning.empty())
    throw ContractViolation("operator_core", "Gram-Schmidt needs a nonempty list");
  const Eigen::Index d = spanning.front().rows();
  double largest = 0.0;
  for (const auto& s : spanning) {
    if (s.rows() != d || s.cols() != d)
      throw DimensionMismatch("operator_core", "spanning set dimensions differ");
    largest = std::max(largest, s.norm());
  }
  if (largest == 0.0)
    throw EmptyBasisError("operator_core", "all spanning elements are zero");

  std::vector<Matrix> basis;
  for (const auto& s : spanning) {
    Matrix v = HermitianMatrix(s, kDensityTol).matrix();
    // Inner products of Hermitian matrices are real; keeping only the real
    // part keeps every iterate exactly Hermitian.
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& g : basis) v -= hs_inner(g, v).real() * g;
    const double nv = v.norm();
    if (nv < tol * largest) continue;
    v /= nv;
    basis.push_back(0.5 * (v + v.adjoint()));
  }
  if (basis.empty())
    throw EmptyBasisError("operator_core", "spanning set is numerically zero");
  return SubspaceBasis(d, std::move(basis), tol);
}

Superoperator orthogonal_projector(const SubspaceBasis& m) {
  const Matrix cols = m.vec_columns();
  // Tr(G X) = vec(G)^dagger vec(X) for Hermitian G.
  return Superoperator(m.dim(), cols * cols.adjoint());
}

}  // namespace markovlens
