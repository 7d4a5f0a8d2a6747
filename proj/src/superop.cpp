#include "markovlens/superop.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "markovlens/error.hpp"
#include "markovlens/random.hpp"

namespace markovlens {

Superoperator::Superoperator(Eigen::Index d, Matrix natural)
    : d_(d), n_(std::move(natural)) {
  if (d <= 0 || n_.rows() != d * d || n_.cols() != d * d)
    throw DimensionMismatch("superop", "natural matrix must be d^2 x d^2 for d=" +
                                           std::to_string(d));
}

Superoperator Superoperator::identity(Eigen::Index d) {
  return Superoperator(d, Matrix::Identity(d * d, d * d));
}

Superoperator Superoperator::zero(Eigen::Index d) {
  return Superoperator(d, Matrix::Zero(d * d, d * d));
}

Superoperator Superoperator::sandwich(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw DimensionMismatch("superop", "sandwich factors must be square and equal");
  return Superoperator(a.rows(), kron(b.transpose(), a));
}

Matrix Superoperator::apply(const Matrix& a) const {
  if (a.rows() != d_ || a.cols() != d_)
    throw DimensionMismatch("superop", "operator dimension does not match superoperator");
  return unvec(n_ * vec(a), d_);
}

namespace {
void require_same_dim(const Superoperator& a, const Superoperator& b) {
  if (a.dim() != b.dim())
    throw DimensionMismatch("superop", "superoperator dimensions differ");
}
}  // namespace

Superoperator compose(const Superoperator& second, const Superoperator& first) {
  require_same_dim(second, first);
  return Superoperator(first.dim(), second.natural() * first.natural());
}

Superoperator add(const Superoperator& a, const Superoperator& b) {
  require_same_dim(a, b);
  return Superoperator(a.dim(), a.natural() + b.natural());
}

Superoperator scale(const Superoperator& a, cplx c) {
  return Superoperator(a.dim(), c * a.natural());
}

double hs_distance(const Superoperator& a, const Superoperator& b) {
  require_same_dim(a, b);
  return (a.natural() - b.natural()).norm();
}

ChoiMatrix::ChoiMatrix(Eigen::Index d, Matrix c) : d_(d), c_(std::move(c)) {
  if (d <= 0 || c_.rows() != d * d || c_.cols() != d * d)
    throw DimensionMismatch("superop", "Choi matrix must be d^2 x d^2");
}

Matrix ChoiMatrix::block(Eigen::Index i, Eigen::Index j) const {
  return c_.block(i * d_, j * d_, d_, d_);
}

ChoiMatrix to_choi(const Superoperator& s) {
  const Eigen::Index d = s.dim();
  const Matrix& n = s.natural();
  Matrix c(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index k = 0; k < d; ++k)
        for (Eigen::Index l = 0; l < d; ++l)
          c(i * d + k, j * d + l) = n(k + d * l, i + d * j);
  return ChoiMatrix(d, std::move(c));
}

Superoperator from_choi(const ChoiMatrix& choi) {
  const Eigen::Index d = choi.dim();
  const Matrix& c = choi.matrix();
  Matrix n(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index k = 0; k < d; ++k)
        for (Eigen::Index l = 0; l < d; ++l)
          n(k + d * l, i + d * j) = c(i * d + k, j * d + l);
  return Superoperator(d, std::move(n));
}

PropertyCheck is_hp(const Superoperator& s, double tol) {
  const double r = hermiticity_residual(to_choi(s).matrix());
  return {r <= tol, r};
}

PropertyCheck is_cp(const Superoperator& s, double tol) {
  const Matrix c = to_choi(s).matrix();
  const double herm = hermiticity_residual(c);
  const double lo = hermitian_eigenvalues(HermitianMatrix::hermitian_part(c)).minCoeff();
  return {herm <= tol && lo >= -tol, lo};
}

PropertyCheck is_tp(const Superoperator& s, double tol) {
  const Eigen::Index d = s.dim();
  const Matrix& n = s.natural();
  // Row functional of the trace: sum_k row (k + d k).
  Matrix t = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index k = 0; k < d; ++k) t(i, j) += n(k + d * k, i + d * j);
  const double r = (t - Matrix::Identity(d, d)).norm();
  return {r <= tol, r};
}

double tp_residual_on(const Superoperator& s, const std::vector<Matrix>& domain) {
  double worst = 0.0;
  for (const auto& b : domain)
    worst = std::max(worst, std::abs(s.apply(b).trace() - b.trace()));
  return worst;
}

std::vector<Matrix> kraus_from_choi(const ChoiMatrix& choi, double tol) {
  const Eigen::Index d = choi.dim();
  Eigen::SelfAdjointEigenSolver<Matrix> es(
      HermitianMatrix::hermitian_part(choi.matrix()).matrix());
  const RealVector& w = es.eigenvalues();
  if (w.minCoeff() < -tol)
    throw NotCompletelyPositive("superop", "Choi matrix has eigenvalue " +
                                               format_number(w.minCoeff()));
  const double cutoff = tol * std::max(1.0, w.maxCoeff());
  std::vector<Matrix> kraus;
  for (Eigen::Index k = w.size() - 1; k >= 0; --k) {
    if (w(k) <= cutoff) continue;
    // v(i d + r) = K(r, i), i.e. K = unvec(v) under column stacking.
    kraus.push_back(std::sqrt(w(k)) * unvec(es.eigenvectors().col(k), d));
  }
  return kraus;
}

Superoperator from_kraus(const std::vector<Matrix>& kraus) {
  if (kraus.empty()) throw ContractViolation("superop", "empty Kraus set");
  const Eigen::Index d = kraus.front().rows();
  Matrix n = Matrix::Zero(d * d, d * d);
  for (const auto& k : kraus) n += kron(k.conjugate(), k);
  return Superoperator(d, std::move(n));
}

Superoperator tensor_with_identity(const Superoperator& s, Eigen::Index a) {
  if (a < 1) throw ContractViolation("superop", "ancilla dimension must be >= 1");
  const Eigen::Index d = s.dim();
  const Eigen::Index D = a * d;
  const Matrix& n = s.natural();
  Matrix big = Matrix::Zero(D * D, D * D);
  for (Eigen::Index p = 0; p < a; ++p)
    for (Eigen::Index q = 0; q < a; ++q)
      for (Eigen::Index k = 0; k < d; ++k)
        for (Eigen::Index l = 0; l < d; ++l) {
          const Eigen::Index col = (p * d + k) + D * (q * d + l);
          for (Eigen::Index k2 = 0; k2 < d; ++k2)
            for (Eigen::Index l2 = 0; l2 < d; ++l2)
              big((p * d + k2) + D * (q * d + l2), col) = n(k2 + d * l2, k + d * l);
        }
  return Superoperator(D, std::move(big));
}

Matrix apply_with_ancilla(const Superoperator& s, const Matrix& x, Eigen::Index a) {
  const Eigen::Index d = s.dim();
  if (x.rows() != a * d || x.cols() != a * d)
    throw DimensionMismatch("superop", "operator does not live on ancilla (x) system");
  Matrix out(a * d, a * d);
  for (Eigen::Index p = 0; p < a; ++p)
    for (Eigen::Index q = 0; q < a; ++q)
      out.block(p * d, q * d, d, d) = s.apply(x.block(p * d, q * d, d, d));
  return out;
}

namespace {
double output_trace_norm(const Superoperator& s, const Matrix& x) {
  return trace_norm(HermitianMatrix::hermitian_part(s.apply(x)));
}
}  // namespace

double induced_trace_norm_estimate(const Superoperator& s, int n_samples,
                                   std::uint64_t seed) {
  const Eigen::Index d = s.dim();
  double best = 0.0;
  for (const auto& b : hermitian_operator_basis(d))
    best = std::max(best, output_trace_norm(s, b / trace_norm(HermitianMatrix(b))));
  Rng rng = make_rng(seed, 0x1d);
  for (int k = 0; k < n_samples; ++k) {
    const Vector psi = random_pure_state(d, rng);
    const Vector phi = random_pure_state(d, rng);
    const Matrix p = psi * psi.adjoint();
    const Matrix q = phi * phi.adjoint();
    best = std::max(best, output_trace_norm(s, p));
    const Matrix diff = p - q;
    const double nd = trace_norm(HermitianMatrix::hermitian_part(diff));
    if (nd > 1e-12) best = std::max(best, output_trace_norm(s, diff / nd));
  }
  return best;
}

double induced_trace_norm_estimate(const Superoperator& s,
                                   const std::vector<Matrix>& domain,
                                   int n_samples, std::uint64_t seed) {
  if (domain.empty()) return 0.0;
  const auto k = static_cast<Eigen::Index>(domain.size());
  auto ratio = [&](const RealVector& c) {
    Matrix x = Matrix::Zero(s.dim(), s.dim());
    for (Eigen::Index a = 0; a < k; ++a) x += c(a) * domain[static_cast<std::size_t>(a)];
    const double nx = trace_norm(HermitianMatrix::hermitian_part(x));
    if (nx < 1e-14) return 0.0;
    return output_trace_norm(s, x) / nx;
  };
  double best = 0.0;
  RealVector best_c = RealVector::Unit(k, 0);
  for (Eigen::Index a = 0; a < k; ++a) {
    const RealVector e = RealVector::Unit(k, a);
    const double r = ratio(e);
    if (r > best) {
      best = r;
      best_c = e;
    }
  }
  Rng rng = make_rng(seed, 0x2d);
  std::normal_distribution<double> n(0.0, 1.0);
  auto gaussian = [&]() {
    RealVector c(k);
    for (Eigen::Index a = 0; a < k; ++a) c(a) = n(rng);
    return c;
  };
  for (int i = 0; i < n_samples; ++i) {
    const RealVector c = gaussian();
    const double r = ratio(c);
    if (r > best) {
      best = r;
      best_c = c;
    }
  }
  double step = 0.5;
  for (int i = 0; i < n_samples && step > 1e-9; ++i) {
    RealVector c = best_c / best_c.norm() + step * gaussian();
    const double r = ratio(c);
    if (r > best) {
      best = r;
      best_c = c;
    } else {
      step *= 0.7;
    }
  }
  return best;
}

namespace channels {

Superoperator transpose(Eigen::Index d) {
  Matrix n = Matrix::Zero(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) n(j + d * i, i + d * j) = 1.0;
  return Superoperator(d, std::move(n));
}

Superoperator replacement(const Matrix& omega) {
  const Eigen::Index d = omega.rows();
  return Superoperator(d, vec(omega) * vec(Matrix::Identity(d, d)).transpose());
}

Superoperator depolarizing(Eigen::Index d) {
  return replacement(Matrix::Identity(d, d) / static_cast<double>(d));
}

Superoperator dephasing_z() {
  return scale(add(Superoperator::identity(2),
                   Superoperator::sandwich(pauli::z(), pauli::z())),
               0.5);
}

}  // namespace channels
}  // namespace markovlens
