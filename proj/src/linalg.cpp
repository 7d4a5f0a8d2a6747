#include "markovlens/linalg.hpp"

#include <cmath>
#include <string>

#include "markovlens/error.hpp"

namespace markovlens {

double hermiticity_residual(const Matrix& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

HermitianMatrix::HermitianMatrix(const Matrix& m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw ContractViolation("operator_core", "Hermitian matrix must be square and nonempty");
  const double r = hermiticity_residual(m);
  if (!(r <= tol))
    throw ContractViolation("operator_core", "matrix is not Hermitian (asymmetry " +
                                                 format_number(r) + ")");
  m_ = 0.5 * (m + m.adjoint());
}

HermitianMatrix HermitianMatrix::hermitian_part(const Matrix& m) {
  if (m.rows() != m.cols())
    throw DimensionMismatch("operator_core", "Hermitian part of a non-square matrix");
  return HermitianMatrix(0.5 * (m + m.adjoint()));
}

DensityMatrix::DensityMatrix(const Matrix& m, double tol) : h_(m, tol) {
  const double tr = h_.matrix().trace().real();
  if (std::abs(tr - 1.0) > tol)
    throw ContractViolation("operator_core",
                            "density matrix trace is " + format_number(tr));
  const double lo = hermitian_eigenvalues(h_).minCoeff();
  if (lo < -tol)
    throw ContractViolation("operator_core", "density matrix has eigenvalue " +
                                                 format_number(lo));
}

RealVector hermitian_eigenvalues(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double trace_norm(const HermitianMatrix& a) {
  return hermitian_eigenvalues(a).cwiseAbs().sum();
}

cplx hs_inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("operator_core", "hs_inner dimension mismatch");
  return (a.conjugate().cwiseProduct(b)).sum();
}

double hs_norm(const Matrix& a) { return a.norm(); }

PsdResult psd_check(const HermitianMatrix& a, double tol) {
  const double lo = hermitian_eigenvalues(a).minCoeff();
  return {lo >= -tol, lo};
}

Vector vec(const Matrix& a) {
  return Eigen::Map<const Vector>(a.data(), a.size());
}

Matrix unvec(const Vector& v, Eigen::Index d) {
  if (v.size() != d * d)
    throw DimensionMismatch("operator_core", "unvec length is not d^2");
  return Eigen::Map<const Matrix>(v.data(), d, d);
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix matrix_unit(Eigen::Index d, Eigen::Index i, Eigen::Index j) {
  Matrix e = Matrix::Zero(d, d);
  e(i, j) = 1.0;
  return e;
}

std::vector<Matrix> hermitian_operator_basis(Eigen::Index d) {
  std::vector<Matrix> basis;
  basis.reserve(static_cast<std::size_t>(d * d));
  const double r = 1.0 / std::sqrt(2.0);
  const cplx I(0.0, 1.0);
  for (Eigen::Index i = 0; i < d; ++i) basis.push_back(matrix_unit(d, i, i));
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      basis.push_back(r * (matrix_unit(d, i, j) + matrix_unit(d, j, i)));
      basis.push_back(r * I * (matrix_unit(d, i, j) - matrix_unit(d, j, i)));
    }
  }
  return basis;
}

std::vector<Matrix> traceless_operator_basis(Eigen::Index d) {
  std::vector<Matrix> basis;
  basis.reserve(static_cast<std::size_t>(d * d));
  basis.push_back(Matrix::Identity(d, d) / std::sqrt(static_cast<double>(d)));
  const double r = 1.0 / std::sqrt(2.0);
  const cplx I(0.0, 1.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      basis.push_back(r * (matrix_unit(d, i, j) + matrix_unit(d, j, i)));
      basis.push_back(r * I * (matrix_unit(d, j, i) - matrix_unit(d, i, j)));
    }
  }
  // Diagonal generators: (sum_{j<l} E_jj - l E_ll) / sqrt(l(l+1)).
  for (Eigen::Index l = 1; l < d; ++l) {
    Matrix g = Matrix::Zero(d, d);
    for (Eigen::Index j = 0; j < l; ++j) g(j, j) = 1.0;
    g(l, l) = -static_cast<double>(l);
    basis.push_back(g / std::sqrt(static_cast<double>(l * (l + 1))));
  }
  return basis;
}

namespace pauli {
Matrix identity() { return Matrix::Identity(2, 2); }
Matrix x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
Matrix y() {
  Matrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}
Matrix z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
Matrix lowering() { return matrix_unit(2, 1, 0); }
Matrix raising() { return matrix_unit(2, 0, 1); }
Matrix sigma(int k) {
  switch (k) {
    case 0: return identity();
    case 1: return x();
    case 2: return y();
    case 3: return z();
    default: throw ContractViolation("operator_core", "Pauli index must be 0..3");
  }
}
Matrix ground_projector() { return lowering() * raising(); }
}  // namespace pauli

Matrix max_entangled_projector(Eigen::Index d) {
  Vector omega = Vector::Zero(d * d);
  for (Eigen::Index i = 0; i < d; ++i) omega(i * d + i) = 1.0;
  omega /= std::sqrt(static_cast<double>(d));
  return omega * omega.adjoint();
}

std::pair<Matrix, Matrix> psd_sqrt_and_pinv_sqrt(const HermitianMatrix& a,
                                                 double tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix());
  const auto& w = es.eigenvalues();
  RealVector s = RealVector::Zero(w.size());
  RealVector si = RealVector::Zero(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    if (w(k) > tol) {
      s(k) = std::sqrt(w(k));
      si(k) = 1.0 / s(k);
    }
  }
  const Matrix& u = es.eigenvectors();
  return {u * s.cast<cplx>().asDiagonal() * u.adjoint(),
          u * si.cast<cplx>().asDiagonal() * u.adjoint()};
}

}  // namespace markovlens
