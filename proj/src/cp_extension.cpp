#include "markovlens/cp_extension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "markovlens/error.hpp"

namespace markovlens {

void SubspaceMapSpec::validate() const {
  if (domain.empty()) throw ContractViolation("cp_extension", "empty domain");
  if (images.size() != domain.size())
    throw ContractViolation("cp_extension", "one image per domain element is required");
  const Eigen::Index d = domain.dim();
  for (const auto& y : images) {
    if (y.rows() != d || y.cols() != d)
      throw DimensionMismatch("cp_extension", "image has wrong dimension");
    if (hermiticity_residual(y) > kDensityTol)
      throw ContractViolation("cp_extension", "image is not Hermitian");
  }
}

SubspaceMapSpec restrict_map(const Superoperator& v, const SubspaceBasis& domain,
                             bool require_tp) {
  if (v.dim() != domain.dim())
    throw DimensionMismatch("cp_extension", "map and domain dimensions differ");
  SubspaceMapSpec spec{domain, {}, require_tp};
  for (const auto& g : domain.elements()) {
    const Matrix y = v.apply(g);
    const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
    if (hermiticity_residual(y) > 1e-8 * scale)
      throw ContractViolation("cp_extension", "map does not preserve Hermiticity on the domain");
    spec.images.push_back(0.5 * (y + y.adjoint()));
  }
  return spec;
}

PositiveGeneration positively_generated_check(const SubspaceBasis& m, double tol) {
  PositiveGeneration out;
  if (m.empty()) return out;
  const Eigen::Index d = m.dim();
  const auto k = static_cast<Eigen::Index>(m.size());

  Matrix sq = Matrix::Zero(d, d);
  for (const auto& g : m.elements()) sq += g * g;
  Eigen::SelfAdjointEigenSolver<Matrix> es(HermitianMatrix::hermitian_part(sq).matrix());
  const double top = es.eigenvalues().maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < d; ++i)
    if (es.eigenvalues()(i) > tol * top) keep.push_back(i);
  Matrix w(d, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    w.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]);
  out.support = w * w.adjoint();

  std::vector<Matrix> compressed;
  for (const auto& g : m.elements()) compressed.push_back(w.adjoint() * g * w);

  auto combine = [&](const RealVector& c) {
    Matrix x = Matrix::Zero(w.cols(), w.cols());
    for (Eigen::Index a = 0; a < k; ++a) x += c(a) * compressed[static_cast<std::size_t>(a)];
    return Matrix(0.5 * (x + x.adjoint()));
  };

  // Start from the component of the support projector inside M.
  RealVector c(k);
  for (Eigen::Index a = 0; a < k; ++a) c(a) = hs_inner(m[static_cast<std::size_t>(a)], out.support).real();
  if (c.norm() < 1e-12) c = RealVector::Unit(k, 0);
  c.normalize();

  RealVector best_c = c;
  double best = -std::numeric_limits<double>::infinity();
  int stall = 0;
  constexpr int kMaxIter = 500;
  for (int it = 0; it < kMaxIter; ++it) {
    Eigen::SelfAdjointEigenSolver<Matrix> ev(combine(c));
    const double lo = ev.eigenvalues()(0);
    out.iterations = it + 1;
    if (lo > best + 1e-14) {
      best = lo;
      best_c = c;
      stall = 0;
    } else if (++stall > 60) {
      break;
    }
    // Supergradient of lambda_min: v^dagger G'_a v for the lowest eigenvector.
    const Vector v = ev.eigenvectors().col(0);
    RealVector grad(k);
    for (Eigen::Index a = 0; a < k; ++a)
      grad(a) = (v.adjoint() * compressed[static_cast<std::size_t>(a)] * v)(0, 0).real();
    grad -= grad.dot(c) * c;
    if (grad.norm() < 1e-15) break;
    c += (0.5 / std::sqrt(it + 1.0)) * grad;
    c.normalize();
  }

  out.min_eigenvalue_on_support = best;
  out.positively_generated = best > tol;
  Matrix cert = Matrix::Zero(d, d);
  for (Eigen::Index a = 0; a < k; ++a) cert += best_c(a) * m[static_cast<std::size_t>(a)];
  out.certificate = 0.5 * (cert + cert.adjoint());
  return out;
}

JencovaReduction jencova_reduce(const SubspaceBasis& m, double tol) {
  const PositiveGeneration pg = positively_generated_check(m, tol);
  if (!pg.positively_generated) {
    std::ostringstream os;
    os << "subspace is not spanned by positive operators (best smallest eigenvalue on "
          "the joint support "
       << pg.min_eigenvalue_on_support << ")";
    throw ValidationError("cp_extension", os.str());
  }
  JencovaReduction r;
  r.rho = pg.certificate / pg.certificate.trace().real();
  r.support = pg.support;
  const auto [sq, pinv_sq] = psd_sqrt_and_pinv_sqrt(HermitianMatrix::hermitian_part(r.rho), tol);
  r.rho_sqrt = sq;
  r.rho_pinv_sqrt = pinv_sq;
  std::vector<Matrix> conj;
  for (const auto& g : m.elements()) {
    const Matrix x = r.conjugate(g);
    conj.push_back(0.5 * (x + x.adjoint()));
  }
  r.reduced = gram_schmidt_hermitian(conj, kRankTol);
  return r;
}

std::string to_string(FeasibilityStatus s) {
  switch (s) {
    case FeasibilityStatus::FEASIBLE: return "FEASIBLE";
    case FeasibilityStatus::INFEASIBLE_EVIDENCE: return "INFEASIBLE_EVIDENCE";
    case FeasibilityStatus::MAX_ITER: return "MAX_ITER";
  }
  return "UNKNOWN";
}

namespace {

// Real coordinates of Hermitian D x D matrices in the canonical basis. The
// basis vectors vec(E_k) form a unitary matrix, so coordinates are isometric.
class HermitianCoords {
 public:
  explicit HermitianCoords(Eigen::Index dim) : dim_(dim) {
    const std::vector<Matrix> basis = hermitian_operator_basis(dim);
    b_.resize(dim * dim, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t k = 0; k < basis.size(); ++k) b_.col(static_cast<Eigen::Index>(k)) = vec(basis[k]);
  }

  Eigen::Index size() const { return b_.cols(); }
  RealVector coords(const Matrix& h) const { return (b_.adjoint() * vec(h)).real(); }
  Matrix matrix(const RealVector& x) const {
    const Matrix m = unvec(b_ * x.cast<cplx>(), dim_);
    return 0.5 * (m + m.adjoint());
  }

 private:
  Eigen::Index dim_;
  Matrix b_;
};

struct AffineSet {
  Eigen::MatrixXd a;
  RealVector b;
  Eigen::MatrixXd q;  // A^+ A
  RealVector c;       // A^+ b

  RealVector project(const RealVector& x) const { return x - q * x + c; }
  double residual(const RealVector& x) const { return (a * x - b).norm(); }
};

AffineSet build_constraints(const SubspaceMapSpec& spec, const HermitianCoords& hc) {
  const Eigen::Index d = spec.dim();
  const std::vector<Matrix> out_basis = hermitian_operator_basis(d);
  const Eigen::Index n = hc.size();
  std::vector<RealVector> rows;
  std::vector<double> rhs;
  // Tr[M C] for Hermitian M, expressed in coordinates.
  auto row_of = [&](const Matrix& m) { return hc.coords(m); };
  for (std::size_t a = 0; a < spec.domain.size(); ++a) {
    const Matrix gt = spec.domain[a].transpose();
    for (const auto& h : out_basis) {
      rows.push_back(row_of(kron(gt, h)));
      rhs.push_back(hs_inner(h, spec.images[a]).real());
    }
  }
  if (spec.require_tp) {
    const Matrix id = Matrix::Identity(d, d);
    for (const auto& h : out_basis) {
      rows.push_back(row_of(kron(h, id)));
      rhs.push_back(h.trace().real());
    }
  }
  AffineSet s;
  s.a.resize(static_cast<Eigen::Index>(rows.size()), n);
  s.b.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s.a.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    s.b(static_cast<Eigen::Index>(i)) = rhs[i];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(s.a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& sv = svd.singularValues();
  const double cut = 1e-10 * std::max(1.0, sv(0));
  RealVector inv = RealVector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) inv(i) = 1.0 / sv(i);
  const Eigen::MatrixXd pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  s.q = pinv * s.a;
  s.c = pinv * s.b;
  const double inconsistency = (s.a * s.c - s.b).norm();
  if (inconsistency > 1e-8 * std::max(1.0, s.b.norm())) {
    std::ostringstream os;
    os << "action and trace constraints are inconsistent (least-squares residual "
       << inconsistency << ")";
    throw MalformedConstraints("cp_extension", os.str());
  }
  return s;
}

struct PsdProjection {
  RealVector point;
  double min_eigenvalue;
};

PsdProjection project_psd(const RealVector& x, const HermitianCoords& hc) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hc.matrix(x));
  RealVector w = es.eigenvalues();
  const double lo = w(0);
  w = w.cwiseMax(0.0);
  const Matrix c = es.eigenvectors() * w.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  return {hc.coords(c), lo};
}

double min_eigenvalue(const RealVector& x, const HermitianCoords& hc) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hc.matrix(x), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

FeasibilityResult extend_cp(const SubspaceMapSpec& spec, const ExtendOptions& options) {
  spec.validate();
  if (options.max_iter < 1) throw ContractViolation("cp_extension", "max_iter must be >= 1");
  const Eigen::Index d = spec.dim();
  const Eigen::Index big = d * d;
  const HermitianCoords hc(big);
  const AffineSet aff = build_constraints(spec, hc);

  Matrix start = Matrix::Identity(big, big) / static_cast<double>(d);
  if (options.warm_start) {
    if (options.warm_start->rows() != big || options.warm_start->cols() != big)
      throw DimensionMismatch("cp_extension", "warm start must be a d^2 x d^2 Choi matrix");
    start = 0.5 * (*options.warm_start + options.warm_start->adjoint());
  }
  std::optional<RealVector> ref;
  if (options.reference) ref = hc.coords(0.5 * (*options.reference + options.reference->adjoint()));

  FeasibilityResult out;
  RealVector x = aff.project(hc.coords(start));
  RealVector p = RealVector::Zero(x.size());
  RealVector y = x;
  bool found = false;
  RealVector answer;
  for (int it = 1; it <= options.max_iter; ++it) {
    const RealVector z = options.use_dykstra ? RealVector(x + p) : x;
    y = project_psd(z, hc).point;
    if (options.use_dykstra) p = z - y;
    const double res = aff.residual(y);
    out.history.push_back(res);
    x = aff.project(y);
    if (ref) out.reference_distance.push_back((x - *ref).norm());
    out.iterations = it;
    if (res < options.tol_affine) {
      answer = y;
      found = true;
      break;
    }
    if (-min_eigenvalue(x, hc) < options.tol_psd) {
      answer = x;
      found = true;
      break;
    }
  }

  if (found) {
    out.status = FeasibilityStatus::FEASIBLE;
  } else {
    answer = y;
    // Stagnation: the floor over the last 20% sits above 100 tol and improved
    // by less than 5% on the floor reached before it. A slowly decaying
    // residual (feasible set on a face of the cone) stays MAX_ITER.
    const auto n = out.history.size();
    const auto tail = static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, n / 5));
    const auto split = out.history.end() - tail;
    const double floor = *std::min_element(split, out.history.end());
    const double before = split == out.history.begin()
                              ? floor
                              : *std::min_element(out.history.begin(), split);
    const bool stagnant = floor > 100.0 * options.tol_affine && floor > 0.95 * before;
    out.status = stagnant ? FeasibilityStatus::INFEASIBLE_EVIDENCE : FeasibilityStatus::MAX_ITER;
  }
  const Matrix c = hc.matrix(answer);
  out.choi = ChoiMatrix(d, c);
  const ExtensionReport rep = verify_extension(*out.choi, spec, std::numeric_limits<double>::infinity());
  out.action_residual = rep.action_residual;
  out.tp_residual = rep.tp_residual;
  out.psd_slack = std::max(0.0, -rep.min_eigenvalue);
  return out;
}

ExtensionReport verify_extension(const ChoiMatrix& c, const SubspaceMapSpec& spec, double tol) {
  if (c.dim() != spec.dim())
    throw DimensionMismatch("cp_extension", "Choi matrix and spec dimensions differ");
  ExtensionReport r;
  r.hermiticity_residual = hermiticity_residual(c.matrix());
  const HermitianMatrix h = HermitianMatrix::hermitian_part(c.matrix());
  r.min_eigenvalue = hermitian_eigenvalues(h).minCoeff();
  const Superoperator phi = from_choi(ChoiMatrix(c.dim(), h.matrix()));
  for (std::size_t a = 0; a < spec.domain.size(); ++a)
    r.action_residual =
        std::max(r.action_residual, (phi.apply(spec.domain[a]) - spec.images[a]).norm());
  r.tp_residual = is_tp(phi, tol).value;
  r.passes = r.hermiticity_residual <= tol && r.min_eigenvalue >= -tol &&
             r.action_residual <= tol && (!spec.require_tp || r.tp_residual <= tol);
  return r;
}

}  // namespace markovlens
