#pragma once

// CP and CPTP extension of a linear map known only on an operator subspace.
// The extension problem is posed over Choi matrices: PSD cone intersected
// with the affine set fixed by the prescribed action (and trace
// preservation), solved by alternating projections.

#include <optional>
#include <string>
#include <vector>

#include "markovlens/subspace.hpp"
#include "markovlens/superop.hpp"

namespace markovlens {

struct SubspaceMapSpec {
  SubspaceBasis domain;
  /// images[a] = V(domain[a]).
  std::vector<Matrix> images;
  bool require_tp = true;

  Eigen::Index dim() const noexcept { return domain.dim(); }
  /// Checks counts, dimensions and Hermiticity of the images (1e-10).
  void validate() const;
};

/// Spec for the restriction of `v` to `domain`. Images are symmetrized after
/// a Hermiticity check at 1e-8.
SubspaceMapSpec restrict_map(const Superoperator& v, const SubspaceBasis& domain,
                             bool require_tp);

struct PositiveGeneration {
  bool positively_generated = false;
  /// HS-normalized element of M maximizing the smallest eigenvalue on the
  /// joint support; PSD when positively_generated.
  Matrix certificate;
  /// Smallest eigenvalue of the certificate restricted to the joint support.
  double min_eigenvalue_on_support = 0.0;
  /// Orthogonal projector onto the joint support of M.
  Matrix support;
  int iterations = 0;
};

/// Decides whether M is spanned by PSD operators: true iff some element of M
/// is strictly positive on the joint support of M.
PositiveGeneration positively_generated_check(const SubspaceBasis& m, double tol = 1e-9);

struct JencovaReduction {
  /// Unit-trace PSD element of M whose support contains every support in M.
  Matrix rho;
  Matrix support;
  Matrix rho_sqrt;
  Matrix rho_pinv_sqrt;
  /// rho^{-1/2} M rho^{-1/2}; contains the support projector.
  SubspaceBasis reduced;

  Matrix conjugate(const Matrix& x) const { return rho_pinv_sqrt * x * rho_pinv_sqrt; }
  Matrix unconjugate(const Matrix& x) const { return rho_sqrt * x * rho_sqrt; }
};

/// Raises ValidationError when M is not positively generated.
JencovaReduction jencova_reduce(const SubspaceBasis& m, double tol = 1e-9);

enum class FeasibilityStatus { FEASIBLE, INFEASIBLE_EVIDENCE, MAX_ITER };

std::string to_string(FeasibilityStatus s);

struct ExtendOptions {
  int max_iter = 5000;
  double tol_psd = 1e-9;
  double tol_affine = 1e-8;
  bool use_dykstra = true;
  /// Starting Choi matrix; the normalized identity Choi when absent.
  std::optional<Matrix> warm_start;
  /// When set, the HS distance from every affine iterate to this Choi matrix
  /// is recorded.
  std::optional<Matrix> reference;
};

struct FeasibilityResult {
  FeasibilityStatus status = FeasibilityStatus::MAX_ITER;
  /// Best candidate; a certificate when status is FEASIBLE.
  std::optional<ChoiMatrix> choi;
  double action_residual = 0.0;
  double tp_residual = 0.0;
  /// max(0, -lambda_min) of the returned candidate.
  double psd_slack = 0.0;
  int iterations = 0;
  /// Affine residual of the PSD iterate at every step.
  std::vector<double> history;
  std::vector<double> reference_distance;
};

/// Raises MalformedConstraints when the affine system is inconsistent.
FeasibilityResult extend_cp(const SubspaceMapSpec& spec, const ExtendOptions& options = {});

struct ExtensionReport {
  bool passes = false;
  double min_eigenvalue = 0.0;
  double hermiticity_residual = 0.0;
  double action_residual = 0.0;
  /// ||Tr_out C - I||_F; reported even when TP is not required.
  double tp_residual = 0.0;
};

/// Independent re-check of a candidate Choi matrix against a spec.
ExtensionReport verify_extension(const ChoiMatrix& c, const SubspaceMapSpec& spec, double tol);

}  // namespace markovlens
