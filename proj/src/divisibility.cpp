#include "markovlens/divisibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "markovlens/cp_extension.hpp"
#include "markovlens/error.hpp"
#include "markovlens/random.hpp"

namespace markovlens {

namespace {

struct Svd {
  Matrix u;
  Matrix v;
  RealVector s;
  int rank = 0;
};

Svd svd_of(const Matrix& n, double threshold) {
  Eigen::JacobiSVD<Matrix> svd(n, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Svd out{svd.matrixU(), svd.matrixV(), svd.singularValues(), 0};
  for (Eigen::Index k = 0; k < out.s.size(); ++k)
    if (out.s(k) > threshold) ++out.rank;
  return out;
}

int rank_of(const Matrix& n, double threshold) {
  Eigen::JacobiSVD<Matrix> svd(n);
  const RealVector& s = svd.singularValues();
  return static_cast<int>((s.array() > threshold).count());
}

Matrix pinv_from(const Svd& f) {
  const Eigen::Index r = f.rank;
  return f.v.leftCols(r) * f.s.head(r).cwiseInverse().asDiagonal() * f.u.leftCols(r).adjoint();
}

Matrix truncated_from(const Svd& f) {
  const Eigen::Index r = f.rank;
  return f.u.leftCols(r) * f.s.head(r).asDiagonal() * f.v.leftCols(r).adjoint();
}

// Hermitian orthonormal basis of the column space of `cols` (orthonormal,
// adjoint-closed as an operator subspace). The canonical Hermitian basis is
// pushed through the projector; for an adjoint-closed subspace the induced
// real map is itself an orthogonal projector, so its singular values split
// cleanly into ones and zeros.
SubspaceBasis hermitian_basis_of(const Matrix& cols, Eigen::Index d, const char* what) {
  const auto k = cols.cols();
  if (k == 0) return SubspaceBasis(d, {}, kRankTol);
  const Matrix p = cols * cols.adjoint();
  const std::vector<Matrix> herm = hermitian_operator_basis(d);
  const auto m = static_cast<Eigen::Index>(herm.size());
  Eigen::MatrixXd r(m, m);
  for (Eigen::Index b = 0; b < m; ++b) {
    Matrix x = unvec(p * vec(herm[static_cast<std::size_t>(b)]), d);
    x = 0.5 * (x + x.adjoint());
    for (Eigen::Index a = 0; a < m; ++a) r(a, b) = hs_inner(herm[static_cast<std::size_t>(a)], x).real();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullU);
  const RealVector& s = svd.singularValues();
  const auto found = static_cast<Eigen::Index>((s.array() > 0.5).count());
  if (found != k) {
    std::ostringstream os;
    os << what << " subspace is not closed under adjoints (" << found
       << " Hermitian directions for dimension " << k << ")";
    throw ValidationError("divisibility", os.str());
  }
  std::vector<Matrix> elems;
  for (Eigen::Index j = 0; j < k; ++j) {
    Matrix g = Matrix::Zero(d, d);
    for (Eigen::Index a = 0; a < m; ++a) g += svd.matrixU()(a, j) * herm[static_cast<std::size_t>(a)];
    elems.push_back(0.5 * (g + g.adjoint()));
  }
  return SubspaceBasis(d, std::move(elems), kRankTol);
}

// Values on an augmented grid, computed once per analysis.
struct GridData {
  Eigen::Index d = 0;
  double threshold = 0.0;
  std::vector<double> times;
  std::vector<Matrix> naturals;
  std::vector<Svd> svds;
};

GridData grid_data(const MapFamily& family, const RankProfile& profile) {
  GridData g;
  g.d = family.dim();
  g.threshold = profile.threshold;
  g.times = profile.times;
  for (double t : g.times) {
    g.naturals.push_back(family(t).natural());
    g.svds.push_back(svd_of(g.naturals.back(), g.threshold));
  }
  return g;
}

template <class F>
void for_each_pair(std::size_t n, bool exhaustive, F&& f) {
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (exhaustive) {
      for (std::size_t j = i + 1; j < n; ++j) f(i, j);
    } else {
      f(i, i + 1);
    }
  }
}

DivisibilityCheck divisibility_on(const GridData& g, const RankProfile& profile, bool exhaustive,
                                  double kernel_tol) {
  DivisibilityCheck out{true, 0.0, std::nullopt, profile};
  for_each_pair(g.times.size(), exhaustive, [&](std::size_t i, std::size_t j) {
    const Svd& f = g.svds[i];
    const Eigen::Index nk = f.v.cols() - f.rank;
    if (nk == 0) return;
    const Matrix k = f.v.rightCols(nk);
    const double res = svd_of(g.naturals[j] * k, 0.0).s(0);
    out.worst_residual = std::max(out.worst_residual, res);
    if (!(res < kernel_tol)) {
      out.divisible = false;
      if (!out.first_violation_time || g.times[j] < *out.first_violation_time)
        out.first_violation_time = g.times[j];
    }
  });
  return out;
}

ImageCheck image_on(const GridData& g, bool exhaustive, double image_tol) {
  ImageCheck out{true, 0.0, std::nullopt};
  const Eigen::Index m = g.d * g.d;
  for_each_pair(g.times.size(), exhaustive, [&](std::size_t i, std::size_t j) {
    const Svd& a = g.svds[i];
    const Svd& b = g.svds[j];
    if (b.rank == 0) return;
    const Matrix us = a.u.leftCols(a.rank);
    const Matrix comp = Matrix::Identity(m, m) - us * us.adjoint();
    const double res = svd_of(comp * b.u.leftCols(b.rank), 0.0).s(0);
    out.worst_residual = std::max(out.worst_residual, res);
    if (!(res < image_tol)) {
      out.nonincreasing = false;
      if (!out.first_violation_time || g.times[j] < *out.first_violation_time)
        out.first_violation_time = g.times[j];
    }
  });
  return out;
}

PropagatorResult propagator_from(Eigen::Index d, double s, double t, const Matrix& ns,
                                 const Svd& fs, const Matrix& nt, const Tolerances& tol) {
  const Eigen::Index nk = fs.v.cols() - fs.rank;
  if (nk > 0) {
    const double res = svd_of(nt * fs.v.rightCols(nk), 0.0).s(0);
    if (!(res <= tol.kernel_tol)) throw NotDivisible(s, t, res);
  }
  PropagatorResult r;
  r.s = s;
  r.t = t;
  r.v = Superoperator(d, nt * pinv_from(fs));
  r.domain = hermitian_basis_of(fs.u.leftCols(fs.rank), d, "image");
  r.composition_residual = (r.v.natural() * ns - nt).norm();
  r.tp_on_domain_residual = tp_residual_on(r.v, r.domain.elements());
  r.cp_full = is_cp(r.v, tol.choi_tol);
  r.tp_full_residual = is_tp(r.v, tol.tp_tol).value;
  return r;
}

void refresh_checks(PropagatorResult& r, const Matrix& ns, const Matrix& nt,
                    const Tolerances& tol) {
  r.composition_residual = (r.v.natural() * ns - nt).norm();
  r.tp_on_domain_residual = tp_residual_on(r.v, r.domain.elements());
  r.cp_full = is_cp(r.v, tol.choi_tol);
  r.tp_full_residual = is_tp(r.v, tol.tp_tol).value;
}

// Golden-section minimization of f on [a, b].
template <class F>
std::pair<double, double> golden_min(F&& f, double a, double b, double xtol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double e = a + inv_phi * (b - a);
  double fc = f(c), fe = f(e);
  while (b - a > xtol) {
    if (fc <= fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + inv_phi * (b - a);
      fe = f(e);
    }
  }
  return fc <= fe ? std::make_pair(c, fc) : std::make_pair(e, fe);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

}  // namespace

bool RankProfile::invertible_everywhere() const {
  if (ranks.empty()) return true;
  const int full = static_cast<int>(singular_values.front().size());
  return std::all_of(ranks.begin(), ranks.end(), [full](int r) { return r == full; });
}

double rank_threshold(const MapFamily& family, double rtol) {
  Eigen::JacobiSVD<Matrix> svd(family(0.0).natural());
  return rtol * svd.singularValues()(0);
}

RankProfile rank_profile(const MapFamily& family, const TimeGrid& grid, double rtol,
                         double bisect_tol) {
  RankProfile p;
  p.rtol = rtol;
  p.threshold = rank_threshold(family, rtol);
  const double thr = p.threshold;
  auto rank_at = [&](double t) { return rank_of(family(t).natural(), thr); };

  const auto& ts = grid.times();
  std::vector<int> ranks;
  std::vector<RealVector> svs;
  for (double t : ts) {
    Eigen::JacobiSVD<Matrix> svd(family(t).natural());
    svs.push_back(svd.singularValues());
    ranks.push_back(static_cast<int>((svs.back().array() > thr).count()));
  }

  std::vector<double> found = grid.breakpoints();
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    if (ranks[i] == ranks[i + 1]) continue;
    // Invariant: rank(lo) != target, rank(hi) == target.
    const int target = ranks[i + 1];
    double lo = ts[i], hi = ts[i + 1];
    while (hi - lo > bisect_tol) {
      const double mid = 0.5 * (lo + hi);
      if (rank_at(mid) == target) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    found.push_back(hi);
  }
  // Transient drops between neighbours of equal rank.
  for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
    const int r = ranks[i];
    if (r == 0 || ranks[i - 1] != r || ranks[i + 1] != r) continue;
    const auto idx = static_cast<Eigen::Index>(r - 1);
    const double a = svs[i - 1](idx), b = svs[i](idx), c = svs[i + 1](idx);
    if (!(b < a && b <= c)) continue;
    auto sigma_r = [&](double t) {
      Eigen::JacobiSVD<Matrix> svd(family(t).natural());
      return svd.singularValues()(idx);
    };
    const auto [tmin, fmin] = golden_min(sigma_r, ts[i - 1], ts[i + 1], 1e-13);
    if (fmin <= thr) found.push_back(tmin);
  }

  const TimeGrid aug = grid.with_breakpoints(found);
  p.times = aug.times();
  p.breakpoints = aug.breakpoints();
  for (double t : p.times) {
    Eigen::JacobiSVD<Matrix> svd(family(t).natural());
    p.singular_values.push_back(svd.singularValues());
    p.ranks.push_back(static_cast<int>((p.singular_values.back().array() > thr).count()));
  }
  return p;
}

SubspaceBasis kernel_basis_abs(const Superoperator& s, double threshold) {
  const Svd f = svd_of(s.natural(), threshold);
  return hermitian_basis_of(f.v.rightCols(f.v.cols() - f.rank), s.dim(), "kernel");
}

SubspaceBasis image_basis_abs(const Superoperator& s, double threshold) {
  const Svd f = svd_of(s.natural(), threshold);
  return hermitian_basis_of(f.u.leftCols(f.rank), s.dim(), "image");
}

SubspaceBasis kernel_basis(const Superoperator& s, double rtol) {
  Eigen::JacobiSVD<Matrix> svd(s.natural());
  return kernel_basis_abs(s, rtol * svd.singularValues()(0));
}

SubspaceBasis image_basis(const Superoperator& s, double rtol) {
  Eigen::JacobiSVD<Matrix> svd(s.natural());
  return image_basis_abs(s, rtol * svd.singularValues()(0));
}

DivisibilityCheck is_divisible(const MapFamily& family, const TimeGrid& grid,
                               const Tolerances& tol) {
  const RankProfile profile = rank_profile(family, grid, tol.rank_rtol, tol.bisect_tol);
  const GridData g = grid_data(family, profile);
  return divisibility_on(g, profile, tol.exhaustive_pairs, tol.kernel_tol);
}

ImageCheck is_image_nonincreasing(const MapFamily& family, const TimeGrid& grid,
                                  const Tolerances& tol) {
  const RankProfile profile = rank_profile(family, grid, tol.rank_rtol, tol.bisect_tol);
  const GridData g = grid_data(family, profile);
  return image_on(g, tol.exhaustive_pairs, tol.image_tol);
}

PropagatorResult propagator(const MapFamily& family, double t, double s,
                            const Tolerances& tol) {
  if (!(s >= 0.0) || !(t >= s))
    throw ContractViolation("propagator", "need 0 <= s <= t");
  const double thr = rank_threshold(family, tol.rank_rtol);
  const Matrix ns = family(s).natural();
  const Matrix nt = family(t).natural();
  return propagator_from(family.dim(), s, t, ns, svd_of(ns, thr), nt, tol);
}

LimitProjector limit_projector(const MapFamily& family, double t_star,
                               const LimitOptions& options, double t_prev) {
  if (!(t_star > t_prev))
    throw ContractViolation("limit_projector", "t_star must exceed the previous breakpoint");
  if (!(options.shrink > 0.0 && options.shrink < 1.0) || options.max_steps < 2)
    throw ContractViolation("limit_projector", "shrink must lie in (0, 1) and max_steps >= 2");
  double eps0 = options.eps0 > 0.0 ? options.eps0 : 1e-2 * family.t_max();
  eps0 = std::min(eps0, 0.5 * (t_star - t_prev));

  const Eigen::Index d = family.dim();
  const double thr = rank_threshold(family, options.rank_rtol);
  const Matrix nstar = family(t_star).natural();
  const Svd fstar = svd_of(nstar, thr);
  const Matrix nstar_trunc = truncated_from(fstar);

  LimitProjector out;
  out.t_star = t_star;
  Matrix prev;
  Svd last_left;
  bool converged = false;
  double eps = eps0;
  for (int k = 0; k < options.max_steps; ++k) {
    eps = eps0 * std::pow(options.shrink, k);
    const Svd left = svd_of(family(t_star - eps).natural(), thr);
    const Matrix v = nstar_trunc * pinv_from(left);
    out.steps = k + 1;
    last_left = left;
    if (k > 0) {
      out.cauchy_residual = (v - prev).norm();
      if (out.cauchy_residual < options.tol) {
        prev = v;
        converged = true;
        break;
      }
    }
    prev = v;
  }
  if (!converged)
    throw DivergenceError("limit_projector",
                          "propagators V(t*, t*-eps) are not Cauchy at t*=" + fmt(t_star) +
                              " after " + std::to_string(options.max_steps) +
                              " steps (last difference " + fmt(out.cauchy_residual) + ")");
  out.final_eps = eps;
  out.projector = Superoperator(d, prev);

  const double vtol = 10.0 * options.tol;
  const Matrix& pi = out.projector.natural();
  out.idempotence_residual = (pi * pi - pi).norm();
  const SubspaceBasis domain =
      hermitian_basis_of(last_left.u.leftCols(last_left.rank), d, "image");
  out.tp_on_domain_residual = tp_residual_on(out.projector, domain.elements());
  out.tp_full_residual = is_tp(out.projector, vtol).value;
  const PropertyCheck cp = is_cp(out.projector, vtol);
  out.choi_min = cp.value;
  const Svd fpi = svd_of(pi, 1e-6);
  const Matrix ppi = fpi.u.leftCols(fpi.rank) * fpi.u.leftCols(fpi.rank).adjoint();
  const Matrix pstar = fstar.u.leftCols(fstar.rank) * fstar.u.leftCols(fstar.rank).adjoint();
  out.image_residual = fpi.rank == fstar.rank ? svd_of(ppi - pstar, 0.0).s(0) : 1.0;

  std::vector<std::string> failed;
  if (!(out.idempotence_residual < vtol))
    failed.push_back("idempotence " + fmt(out.idempotence_residual));
  if (!(out.tp_on_domain_residual < vtol))
    failed.push_back("trace preservation " + fmt(out.tp_on_domain_residual));
  if (!cp.holds) failed.push_back("complete positivity " + fmt(out.choi_min));
  if (!(out.image_residual < vtol)) failed.push_back("image " + fmt(out.image_residual));
  if (!failed.empty()) {
    std::string msg = "projector at t*=" + fmt(t_star) + " fails:";
    for (const auto& f : failed) msg += " " + f + ";";
    throw ValidationError("limit_projector", msg);
  }
  return out;
}

ProjectorChain::ProjectorChain(const MapFamily& family, std::vector<double> breakpoints,
                               LimitOptions options)
    : d_(family.dim()) {
  std::sort(breakpoints.begin(), breakpoints.end());
  double prev = 0.0;
  for (double b : breakpoints) {
    projectors_.push_back(limit_projector(family, b, options, prev));
    prev = b;
  }
}

Superoperator ProjectorChain::product_up_to(double s) const {
  Superoperator acc = Superoperator::identity(d_);
  for (const auto& p : projectors_)
    if (p.t_star <= s + 1e-12) acc = compose(p.projector, acc);
  return acc;
}

PropagatorResult composite_propagator(const MapFamily& family, double t, double s,
                                      const ProjectorChain& chain, const Tolerances& tol) {
  PropagatorResult r = propagator(family, t, s, tol);
  r.v = compose(r.v, chain.product_up_to(s));
  refresh_checks(r, family(s).natural(), family(t).natural(), tol);
  return r;
}

std::string to_string(DivisibilityStatus s) {
  switch (s) {
    case DivisibilityStatus::NOT_DIVISIBLE: return "NOT_DIVISIBLE";
    case DivisibilityStatus::DIVISIBLE_ONLY: return "DIVISIBLE_ONLY";
    case DivisibilityStatus::CP_ON_IMAGE_ONLY: return "CP_ON_IMAGE_ONLY";
    case DivisibilityStatus::P_DIVISIBLE: return "P_DIVISIBLE";
    case DivisibilityStatus::CP_DIVISIBLE: return "CP_DIVISIBLE";
  }
  return "UNKNOWN";
}

double sampled_positivity_min(const Superoperator& s, int n_samples, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0x9051);
  double lo = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_samples; ++k) {
    const Vector psi = random_pure_state(s.dim(), rng);
    const Matrix out = s.apply(psi * psi.adjoint());
    lo = std::min(lo, hermitian_eigenvalues(HermitianMatrix::hermitian_part(out)).minCoeff());
  }
  return lo;
}

DivisibilityVerdict cp_divisibility_verdict(const MapFamily& family, const TimeGrid& grid,
                                            const Tolerances& tol) {
  DivisibilityVerdict out;
  out.profile = rank_profile(family, grid, tol.rank_rtol, tol.bisect_tol);
  const GridData g = grid_data(family, out.profile);
  out.invertible_everywhere = out.profile.invertible_everywhere();

  const DivisibilityCheck div = divisibility_on(g, out.profile, tol.exhaustive_pairs,
                                                tol.kernel_tol);
  out.worst_kernel_residual = div.worst_residual;
  out.first_violation_time = div.first_violation_time;
  const ImageCheck img = image_on(g, tol.exhaustive_pairs, tol.image_tol);
  out.image_nonincreasing = img.nonincreasing;
  out.image_residual = img.worst_residual;
  if (!div.divisible) {
    out.status = DivisibilityStatus::NOT_DIVISIBLE;
    out.notes.push_back("kernel inclusion fails first at t=" + fmt(*div.first_violation_time));
    return out;
  }

  out.worst_choi_min = std::numeric_limits<double>::infinity();
  auto record = [&](const PropagatorResult& r, bool composite) {
    out.pairs.push_back({r.s, r.t, r.cp_full.value, r.tp_full_residual,
                         r.composition_residual, composite});
    if (r.cp_full.value < out.worst_choi_min) {
      out.worst_choi_min = r.cp_full.value;
      out.worst_choi_pair = std::make_pair(r.s, r.t);
    }
    out.worst_tp_residual = std::max(out.worst_tp_residual, r.tp_full_residual);
    out.worst_composition_residual =
        std::max(out.worst_composition_residual, r.composition_residual);
  };
  auto cptp = [&](const PropagatorResult& r) {
    return r.cp_full.value >= -tol.choi_tol && r.tp_full_residual <= tol.tp_tol;
  };
  auto positivity_of = [&](const std::vector<PropagatorResult>& rs) {
    double lo = std::numeric_limits<double>::infinity();
    bool tp = true;
    for (std::size_t k = 0; k < rs.size(); ++k) {
      lo = std::min(lo, sampled_positivity_min(rs[k].v, tol.positivity_samples,
                                               tol.positivity_seed + k));
      tp = tp && rs[k].tp_full_residual <= tol.tp_tol;
    }
    out.positivity_min = lo;
    out.notes.push_back("positivity of propagators established by sampling " +
                        std::to_string(tol.positivity_samples) +
                        " pure states per pair; evidence, not proof");
    return tp && lo >= -tol.choi_tol;
  };

  std::vector<PropagatorResult> props;
  auto pinv_pairs = [&]() {
    props.clear();
    for_each_pair(g.times.size(), tol.exhaustive_pairs, [&](std::size_t i, std::size_t j) {
      props.push_back(propagator_from(g.d, g.times[i], g.times[j], g.naturals[i], g.svds[i],
                                      g.naturals[j], tol));
    });
  };

  if (out.invertible_everywhere) {
    pinv_pairs();
    for (const auto& r : props) record(r, false);
    if (std::all_of(props.begin(), props.end(), cptp)) {
      out.status = DivisibilityStatus::CP_DIVISIBLE;
    } else if (positivity_of(props)) {
      out.status = DivisibilityStatus::P_DIVISIBLE;
    } else {
      out.status = DivisibilityStatus::DIVISIBLE_ONLY;
    }
    return out;
  }

  if (out.image_nonincreasing) {
    try {
      const ProjectorChain chain(family, out.profile.breakpoints);
      out.projectors = chain.projectors();
      props.clear();
      for_each_pair(g.times.size(), tol.exhaustive_pairs, [&](std::size_t i, std::size_t j) {
        PropagatorResult r = propagator_from(g.d, g.times[i], g.times[j], g.naturals[i],
                                             g.svds[i], g.naturals[j], tol);
        r.v = compose(r.v, chain.product_up_to(g.times[i]));
        refresh_checks(r, g.naturals[i], g.naturals[j], tol);
        props.push_back(std::move(r));
      });
      for (const auto& r : props) record(r, true);
      if (std::all_of(props.begin(), props.end(), cptp)) {
        out.status = DivisibilityStatus::CP_DIVISIBLE;
        return out;
      }
      if (positivity_of(props)) {
        out.status = DivisibilityStatus::P_DIVISIBLE;
        return out;
      }
    } catch (const Error& e) {
      out.notes.push_back(std::string("composite propagators unavailable: ") + e.what());
    }
  } else {
    out.notes.push_back("image increases first at t=" + fmt(*img.first_violation_time) +
                        "; only propagators on the image are checked");
  }

  // Propagators restricted to Im(Lambda_s): CP directly or via extension.
  pinv_pairs();
  if (out.pairs.empty())
    for (const auto& r : props) record(r, false);
  bool all_on_image = true;
  for (const auto& r : props) {
    if (r.cp_full.value >= -tol.choi_tol) continue;
    ExtendOptions opts;
    opts.max_iter = 2000;
    opts.warm_start = HermitianMatrix::hermitian_part(to_choi(r.v).matrix()).matrix();
    const FeasibilityResult fr = extend_cp(restrict_map(r.v, r.domain, false), opts);
    if (fr.status != FeasibilityStatus::FEASIBLE) {
      all_on_image = false;
      out.notes.push_back("no CP extension found on the image for s=" + fmt(r.s) +
                          " t=" + fmt(r.t));
      break;
    }
  }
  out.status = all_on_image ? DivisibilityStatus::CP_ON_IMAGE_ONLY
                            : DivisibilityStatus::DIVISIBLE_ONLY;
  return out;
}

}  // namespace markovlens
