#pragma once

// Complex matrix foundations: Hermitian operators, Hilbert-Schmidt geometry,
// trace norms and positivity tests. Operators are d x d Eigen matrices;
// vectorization is column stacking throughout the library.

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace markovlens {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kDensityTol = 1e-10;

/// Largest entrywise |A - A^dagger|.
double hermiticity_residual(const Matrix& a);

/// A square matrix equal to its adjoint within 1e-12 (entrywise absolute).
/// The stored entries are symmetrized exactly on construction.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const Matrix& m, double tol = kHermitianTol);

  /// Hermitian part (A + A^dagger)/2 of an arbitrary square matrix.
  static HermitianMatrix hermitian_part(const Matrix& m);

  const Matrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }
  operator const Matrix&() const noexcept { return m_; }

 private:
  Matrix m_;
};

/// Positive semidefinite, unit-trace Hermitian matrix.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(const Matrix& m, double tol = kDensityTol);

  const Matrix& matrix() const noexcept { return h_.matrix(); }
  const HermitianMatrix& hermitian() const noexcept { return h_; }
  Eigen::Index dim() const noexcept { return h_.dim(); }
  operator const Matrix&() const noexcept { return h_.matrix(); }

 private:
  HermitianMatrix h_;
};

/// Real eigenvalues in ascending order.
RealVector hermitian_eigenvalues(const HermitianMatrix& a);

/// Sum of absolute eigenvalues.
double trace_norm(const HermitianMatrix& a);

/// Tr(A^dagger B).
cplx hs_inner(const Matrix& a, const Matrix& b);

/// sqrt(Tr(A^dagger A)).
double hs_norm(const Matrix& a);

struct PsdResult {
  bool psd;
  double min_eigenvalue;
};

/// psd iff the smallest eigenvalue is >= -tol.
PsdResult psd_check(const HermitianMatrix& a, double tol);

// Column-stacking vectorization.
Vector vec(const Matrix& a);
Matrix unvec(const Vector& v, Eigen::Index d);

Matrix kron(const Matrix& a, const Matrix& b);

/// |i><j| as a d x d matrix.
Matrix matrix_unit(Eigen::Index d, Eigen::Index i, Eigen::Index j);

/// Canonical HS-orthonormal Hermitian basis of d x d operators:
/// E_ii, (E_ij + E_ji)/sqrt2, i(E_ij - E_ji)/sqrt2 for i < j.
std::vector<Matrix> hermitian_operator_basis(Eigen::Index d);

/// HS-orthonormal Hermitian basis whose first element is I/sqrt(d) and whose
/// remaining d^2 - 1 elements are traceless (normalized generalized Gell-Mann).
std::vector<Matrix> traceless_operator_basis(Eigen::Index d);

namespace pauli {
Matrix identity();
Matrix x();
Matrix y();
Matrix z();
/// sigma_- = |1><0| in the (excited, ground) ordering.
Matrix lowering();
Matrix raising();
/// sigma_0..sigma_3.
Matrix sigma(int k);
/// Ground-state projector P0 = sigma_- sigma_+ = |1><1|.
Matrix ground_projector();
}  // namespace pauli

/// Maximally entangled projector |Omega><Omega| with |Omega> = sum_i |ii>/sqrt(d).
Matrix max_entangled_projector(Eigen::Index d);

/// Positive square root and pseudo-inverse square root restricted to the
/// support (eigenvalues above tol).
std::pair<Matrix, Matrix> psd_sqrt_and_pinv_sqrt(const HermitianMatrix& a,
                                                 double tol);

}  // namespace markovlens
