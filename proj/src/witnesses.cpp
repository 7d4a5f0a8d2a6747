#include "markovlens/witnesses.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "markovlens/error.hpp"
#include "markovlens/random.hpp"
#include "markovlens/superop.hpp"

namespace markovlens {

std::string to_string(AncillaKind k) {
  switch (k) {
    case AncillaKind::none: return "none";
    case AncillaKind::d: return "d";
    case AncillaKind::d_plus_1: return "d_plus_1";
  }
  return "none";
}

AncillaKind ancilla_kind_from_string(const std::string& s) {
  if (s == "none") return AncillaKind::none;
  if (s == "d") return AncillaKind::d;
  if (s == "d_plus_1") return AncillaKind::d_plus_1;
  throw ContractViolation("witnesses", "unknown ancilla kind '" + s +
                                           "' (expected none, d or d_plus_1)");
}

Eigen::Index ancilla_dim(AncillaKind k, Eigen::Index d) {
  switch (k) {
    case AncillaKind::none: return 1;
    case AncillaKind::d: return d;
    case AncillaKind::d_plus_1: return d + 1;
  }
  return 1;
}

void finalize_record(WitnessRecord& r) {
  const std::size_t n = r.times.size();
  if (n < 3 || r.norms.size() != n)
    throw ContractViolation("witnesses", "trajectory needs at least 3 aligned points");
  r.derivatives.assign(n - 2, 0.0);
  std::vector<double> second(n - 2, 0.0);
  double hmax = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hm = r.times[i] - r.times[i - 1];
    const double hp = r.times[i + 1] - r.times[i];
    const double dm = r.norms[i] - r.norms[i - 1];
    const double dp = r.norms[i + 1] - r.norms[i];
    const double den = hm * hp * (hm + hp);
    r.derivatives[i - 1] = (hm * hm * dp + hp * hp * dm) / den;
    second[i - 1] = 2.0 * (hm * dp - hp * dm) / den;
    hmax = std::max({hmax, hm, hp});
  }
  r.tolerance = 10.0 * hmax * hmax;

  std::vector<double> mags(second.size());
  std::transform(second.begin(), second.end(), mags.begin(),
                 [](double v) { return std::abs(v); });
  std::vector<double> sorted = mags;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2),
                   sorted.end());
  const double median = sorted[sorted.size() / 2];
  r.kink_times.clear();
  for (std::size_t i = 0; i < mags.size(); ++i) {
    const double h = 0.5 * (r.times[i + 2] - r.times[i]);
    if (mags[i] > 100.0 * median && mags[i] * h > 1e-6) r.kink_times.push_back(r.times[i + 1]);
  }

  const auto it = std::max_element(r.derivatives.begin(), r.derivatives.end());
  const auto i = static_cast<std::size_t>(std::distance(r.derivatives.begin(), it));
  r.max_backflow = *it;
  r.max_backflow_time = r.times[i + 1];
  r.bracket = {r.times[i], r.times[i + 2]};
  r.max_at_kink = std::find(r.kink_times.begin(), r.kink_times.end(), r.max_backflow_time) !=
                  r.kink_times.end();
}

namespace {

std::vector<Superoperator> maps_on(const MapFamily& family, const TimeGrid& grid) {
  std::vector<Superoperator> maps;
  maps.reserve(grid.size());
  for (double t : grid.times()) maps.push_back(family(t));
  return maps;
}

WitnessRecord trajectory(const std::vector<Superoperator>& maps, const TimeGrid& grid,
                         const Matrix& x, AncillaKind kind) {
  WitnessRecord r;
  r.witness = x;
  r.ancilla_kind = kind;
  r.times = grid.times();
  const Eigen::Index a = ancilla_dim(kind, maps.front().dim());
  r.norms.reserve(maps.size());
  for (const auto& s : maps)
    r.norms.push_back(trace_norm(HermitianMatrix::hermitian_part(apply_with_ancilla(s, x, a))));
  finalize_record(r);
  return r;
}

void check_witness(const Matrix& x, Eigen::Index expected) {
  if (x.rows() != expected || x.cols() != expected)
    throw DimensionMismatch("witnesses", "witness dimension " + std::to_string(x.rows()) +
                                             " does not match ancilla kind (expected " +
                                             std::to_string(expected) + ")");
  if (hermiticity_residual(x) > kDensityTol)
    throw ContractViolation("witnesses", "witness is not Hermitian");
}

}  // namespace

WitnessRecord helstrom_witness(const MapFamily& family, const Matrix& x, AncillaKind kind,
                               const TimeGrid& grid) {
  const Eigen::Index d = family.dim();
  check_witness(x, ancilla_dim(kind, d) * d);
  return trajectory(maps_on(family, grid), grid, 0.5 * (x + x.adjoint()), kind);
}

WitnessRecord blp_sigma(const MapFamily& family, const DensityMatrix& rho1,
                        const DensityMatrix& rho2, const TimeGrid& grid) {
  return helstrom_witness(family, rho1.matrix() - rho2.matrix(), AncillaKind::none, grid);
}

Matrix embed_delta(const Matrix& x, const DensityMatrix& rho_s) {
  const Eigen::Index d = rho_s.dim();
  check_witness(x, d * d);
  const Eigen::Index big = (d + 1) * d;
  Matrix delta = Matrix::Zero(big, big);
  delta.topLeftCorner(d * d, d * d) = 0.5 * (x + x.adjoint());
  delta.block(d * d, d * d, d, d) = -x.trace().real() * rho_s.matrix();
  return delta;
}

DensityPair split_traceless(const Matrix& delta) {
  const HermitianMatrix h(delta, kDensityTol);
  const Eigen::Index n = h.dim();
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
  const RealVector& w = es.eigenvalues();
  const double norm1 = w.cwiseAbs().sum();
  if (std::abs(w.sum()) > 1e-10 * std::max(1.0, norm1))
    throw ContractViolation("witnesses", "operator to split is not traceless");
  DensityPair out{Matrix::Identity(n, n) / static_cast<double>(n),
                  Matrix::Identity(n, n) / static_cast<double>(n), 0.0};
  if (norm1 < 1e-15) return out;
  const Matrix& v = es.eigenvectors();
  const RealVector pos = w.cwiseMax(0.0);
  const RealVector neg = (-w).cwiseMax(0.0);
  const Matrix p = v * pos.cast<cplx>().asDiagonal() * v.adjoint();
  const Matrix q = v * neg.cast<cplx>().asDiagonal() * v.adjoint();
  out.rho1 = p / pos.sum();
  out.rho2 = q / neg.sum();
  out.scale = 0.5 * norm1;
  return out;
}

WitnessRecord bogna_witness(const MapFamily& family, const DensityMatrix& rho1,
                            const DensityMatrix& rho2, const TimeGrid& grid) {
  const Eigen::Index d = family.dim();
  if (rho1.dim() != (d + 1) * d || rho2.dim() != (d + 1) * d)
    throw DimensionMismatch("witnesses", "states must live on a (d+1)-level ancilla (x) system");
  return helstrom_witness(family, rho1.matrix() - rho2.matrix(), AncillaKind::d_plus_1, grid);
}

WitnessRecord witness_scan(const MapFamily& family, const TimeGrid& grid,
                           const ScanOptions& options) {
  if (options.n_samples < 1) throw ContractViolation("witnesses", "n_samples must be >= 1");
  if (options.n_refine < 0) throw ContractViolation("witnesses", "n_refine must be >= 0");
  const Eigen::Index d = family.dim();
  const Eigen::Index big = ancilla_dim(options.ancilla_kind, d) * d;
  const std::vector<Superoperator> maps = maps_on(family, grid);
  const auto n = static_cast<std::size_t>(options.n_samples);

  std::vector<WitnessRecord> records(n);
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t k = first; k < n; k += stride) {
      Rng rng = make_rng(options.seed, k);
      records[k] = trajectory(maps, grid, random_hermitian_unit_trace_norm(big, rng),
                              options.ancilla_kind);
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, options.threads));
  if (threads == 1 || n == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(threads, n); ++w)
      pool.emplace_back(work, w, std::min(threads, n));
    for (auto& th : pool) th.join();
  }

  std::size_t best = 0;
  for (std::size_t k = 1; k < n; ++k)
    if (records[k].max_backflow > records[best].max_backflow) best = k;
  WitnessRecord current = std::move(records[best]);

  Rng rng = make_rng(options.seed, n);
  double scale = 0.5;
  for (int r = 0; r < options.n_refine; ++r) {
    Matrix x = current.witness + scale * random_hermitian_unit_trace_norm(big, rng);
    x = 0.5 * (x + x.adjoint());
    const double nx = trace_norm(HermitianMatrix(x));
    if (nx < 1e-14) continue;
    WitnessRecord cand = trajectory(maps, grid, x / nx, options.ancilla_kind);
    if (cand.max_backflow > current.max_backflow) {
      current = std::move(cand);
    } else {
      scale *= 0.5;
    }
  }
  return current;
}

}  // namespace markovlens
