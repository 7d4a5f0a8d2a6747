#include "markovlens/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "markovlens/error.hpp"

namespace markovlens {

MapFamily::MapFamily(Eigen::Index d, double t_max, std::string kind, Evaluator evaluator)
    : d_(d), t_max_(t_max), kind_(std::move(kind)), eval_(std::move(evaluator)) {
  if (d < 1) throw ContractViolation("dynamics", "family dimension must be positive");
  if (!(t_max > 0.0)) throw ContractViolation("dynamics", "family domain must have t_max > 0");
  if (!eval_) throw ContractViolation("dynamics", "family needs an evaluator");
}

Superoperator MapFamily::evaluate(double t) const {
  if (!(t >= 0.0)) throw ContractViolation("dynamics", "family evaluated at t < 0");
  Superoperator s = eval_(t);
  if (s.dim() != d_) throw DimensionMismatch("dynamics", "evaluator returned wrong dimension");
  return s;
}

namespace {

// Times at which preset parameters are validated.
std::vector<double> validation_times(double t_max, const std::vector<const ScalarSignal*>& sigs) {
  constexpr int kSamples = 2001;
  std::vector<double> ts;
  ts.reserve(kSamples + 16);
  for (int i = 0; i < kSamples; ++i) ts.push_back(t_max * i / (kSamples - 1));
  for (const ScalarSignal* s : sigs) {
    if (const auto* p = std::get_if<signals::PiecewiseLinear>(&s->variant()))
      for (const auto& [kt, kv] : p->knots)
        if (kt >= 0.0 && kt <= t_max) ts.push_back(kt);
    if (const auto* c = std::get_if<signals::CosineClipped>(&s->variant()))
      if (c->t_star >= 0.0 && c->t_star <= t_max) ts.push_back(c->t_star);
  }
  std::sort(ts.begin(), ts.end());
  return ts;
}

std::string at_time(double t) {
  std::ostringstream os;
  os.precision(17);
  os << " at t=" << t;
  return os.str();
}

Matrix amplitude_damping_natural(cplx g) {
  const double g2 = std::norm(g);
  Matrix n = Matrix::Zero(4, 4);
  n(0, 0) = g2;
  n(3, 0) = 1.0 - g2;
  n(1, 1) = std::conj(g);
  n(2, 2) = g;
  n(3, 3) = 1.0;
  return n;
}

Matrix pauli_natural(double l1, double l2, double l3) {
  const double lam[4] = {1.0, l1, l2, l3};
  Matrix n = Matrix::Zero(4, 4);
  for (int a = 0; a < 4; ++a) {
    const Vector v = vec(pauli::sigma(a));
    n += 0.5 * lam[a] * v * v.adjoint();
  }
  return n;
}

double exp_neg(double x) { return std::isinf(x) && x > 0 ? 0.0 : std::exp(-x); }

}  // namespace

MapFamily identity_family(Eigen::Index d, double t_max) {
  return MapFamily(d, t_max, "identity", [d](double) { return Superoperator::identity(d); });
}

MapFamily preset_amplitude_damping(const ScalarSignal& g, double t_max) {
  if (std::abs(g(0.0) - 1.0) > 1e-12)
    throw ContractViolation("dynamics", "amplitude damping needs G(0) = 1");
  for (double t : validation_times(t_max, {&g}))
    if (std::abs(g(t)) > 1.0 + 1e-12)
      throw ContractViolation("dynamics", "|G(t)| > 1 makes the map non-CP" + at_time(t));
  return MapFamily(2, t_max, "amplitude_damping",
                   [g](double t) { return Superoperator(2, amplitude_damping_natural(g(t))); });
}

MapFamily preset_amplitude_damping_rates(const ScalarSignal& rate, const ScalarSignal& shift,
                                         double t_max) {
  auto g = [rate, shift](double t) {
    const double gamma = rate.integral(t);
    if (std::isinf(gamma) && gamma > 0) return cplx(0.0, 0.0);
    return std::exp(cplx(-0.5 * gamma, -0.5 * shift.integral(t)));
  };
  for (double t : validation_times(t_max, {&rate, &shift}))
    if (std::abs(g(t)) > 1.0 + 1e-12)
      throw ContractViolation("dynamics",
                              "integrated decay rate is negative, |G(t)| > 1" + at_time(t));
  return MapFamily(2, t_max, "amplitude_damping",
                   [g](double t) { return Superoperator(2, amplitude_damping_natural(g(t))); });
}

MapFamily preset_pauli_lambda(const ScalarSignal& l1, const ScalarSignal& l2,
                              const ScalarSignal& l3, double t_max) {
  for (const ScalarSignal* s : {&l1, &l2, &l3})
    if (std::abs(s->value(0.0) - 1.0) > 1e-12)
      throw ContractViolation("dynamics", "Pauli eigenvalues must start at 1");
  for (double t : validation_times(t_max, {&l1, &l2, &l3})) {
    const double a = l1(t), b = l2(t), c = l3(t);
    // Probabilities of the Pauli mixture must be nonnegative.
    const double p[4] = {1 + a + b + c, 1 + a - b - c, 1 - a + b - c, 1 - a - b + c};
    for (double pk : p)
      if (pk < -4e-12)
        throw ContractViolation("dynamics", "Pauli channel is not CP" + at_time(t));
  }
  return MapFamily(2, t_max, "pauli", [l1, l2, l3](double t) {
    return Superoperator(2, pauli_natural(l1(t), l2(t), l3(t)));
  });
}

MapFamily preset_pauli_rates(const ScalarSignal& g1, const ScalarSignal& g2,
                             const ScalarSignal& g3, double t_max) {
  auto lam = [g1, g2, g3](double t) {
    const double a = g1.integral(t), b = g2.integral(t), c = g3.integral(t);
    return std::array<double, 3>{exp_neg(b + c), exp_neg(a + c), exp_neg(a + b)};
  };
  for (double t : validation_times(t_max, {&g1, &g2, &g3})) {
    const auto l = lam(t);
    const double p[4] = {1 + l[0] + l[1] + l[2], 1 + l[0] - l[1] - l[2],
                         1 - l[0] + l[1] - l[2], 1 - l[0] - l[1] + l[2]};
    for (double pk : p)
      if (pk < -4e-12)
        throw ContractViolation("dynamics", "Pauli channel is not CP" + at_time(t));
  }
  return MapFamily(2, t_max, "pauli", [lam](double t) {
    const auto l = lam(t);
    return Superoperator(2, pauli_natural(l[0], l[1], l[2]));
  });
}

MapFamily preset_equilibrium_relaxation(const DensityMatrix& omega, const ScalarSignal& f,
                                        double t_max) {
  if (std::abs(f(0.0)) > 1e-12)
    throw ContractViolation("dynamics", "equilibrium relaxation needs F(0) = 0");
  for (double t : validation_times(t_max, {&f})) {
    const double v = f(t);
    if (v < -1e-12 || v > 1.0 + 1e-12)
      throw ContractViolation("dynamics", "F(t) outside [0, 1]" + at_time(t));
  }
  const Eigen::Index d = omega.dim();
  const Matrix fixed = vec(omega.matrix()) * vec(Matrix::Identity(d, d)).transpose();
  return MapFamily(d, t_max, "equilibrium_relaxation", [d, fixed, f](double t) {
    const double v = f(t);
    return Superoperator(d, (1.0 - v) * Matrix::Identity(d * d, d * d) + v * fixed);
  });
}

Matrix sandwich_natural(const Matrix& a, const Matrix& b) { return kron(b.transpose(), a); }

GeneratorFn gkls_generator(const Matrix& hamiltonian, std::vector<JumpTerm> jumps) {
  const Eigen::Index d = hamiltonian.rows();
  const Matrix id = Matrix::Identity(d, d);
  const cplx I(0.0, 1.0);
  const Matrix ham = -I * (sandwich_natural(hamiltonian, id) - sandwich_natural(id, hamiltonian));
  std::vector<Matrix> dissipators;
  for (const auto& j : jumps) {
    if (j.op.rows() != d || j.op.cols() != d)
      throw DimensionMismatch("dynamics", "jump operator dimension mismatch");
    const Matrix ldl = j.op.adjoint() * j.op;
    dissipators.push_back(sandwich_natural(j.op, j.op.adjoint()) -
                          0.5 * sandwich_natural(ldl, id) - 0.5 * sandwich_natural(id, ldl));
  }
  return [d, ham, dissipators, jumps = std::move(jumps)](double t) {
    Matrix n = ham;
    for (std::size_t k = 0; k < jumps.size(); ++k) n += jumps[k].rate(t) * dissipators[k];
    return Superoperator(d, std::move(n));
  };
}

GeneratorFn amplitude_damping_generator(const ScalarSignal& rate, const ScalarSignal& shift) {
  const Matrix sp = pauli::raising();
  const Matrix sm = pauli::lowering();
  const Matrix excited = sp * sm;
  const Matrix id = Matrix::Identity(2, 2);
  const cplx I(0.0, 1.0);
  const Matrix comm = -0.5 * I * (sandwich_natural(excited, id) - sandwich_natural(id, excited));
  const Matrix diss = sandwich_natural(sm, sp) - 0.5 * sandwich_natural(excited, id) -
                      0.5 * sandwich_natural(id, excited);
  return [rate, shift, comm, diss](double t) {
    return Superoperator(2, shift(t) * comm + rate(t) * diss);
  };
}

GeneratorFn pauli_generator(const ScalarSignal& g1, const ScalarSignal& g2,
                            const ScalarSignal& g3) {
  std::vector<Matrix> terms;
  for (int k = 1; k <= 3; ++k)
    terms.push_back(0.5 * (sandwich_natural(pauli::sigma(k), pauli::sigma(k)) -
                           Matrix::Identity(4, 4)));
  return [g1, g2, g3, terms](double t) {
    return Superoperator(2, g1(t) * terms[0] + g2(t) * terms[1] + g3(t) * terms[2]);
  };
}

namespace {

Matrix rk4_steps(const GeneratorFn& gen, Matrix y, double t0, double t1, int n) {
  const double h = (t1 - t0) / n;
  for (int k = 0; k < n; ++k) {
    const double t = t0 + k * h;
    const Matrix l0 = gen(t).natural();
    const Matrix lm = gen(t + 0.5 * h).natural();
    const Matrix l1 = gen(t + h).natural();
    const Matrix k1 = l0 * y;
    const Matrix k2 = lm * (y + 0.5 * h * k1);
    const Matrix k3 = lm * (y + 0.5 * h * k2);
    const Matrix k4 = l1 * (y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

struct IntegratedStates {
  std::vector<double> times;
  std::vector<Matrix> states;
};

}  // namespace

MapFamily integrate_generator(GeneratorFn generator, Eigen::Index d, const TimeGrid& grid,
                              IntegrationOptions options) {
  if (!(options.max_substep > 0.0))
    throw ContractViolation("dynamics", "max_substep must be positive");
  auto data = std::make_shared<IntegratedStates>();
  data->times = grid.times();
  data->states.reserve(grid.size());
  Matrix y = Matrix::Identity(d * d, d * d);
  data->states.push_back(y);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double t0 = grid[i - 1], t1 = grid[i];
    const int n = std::max(1, static_cast<int>(std::ceil((t1 - t0) / options.max_substep)));
    const Matrix coarse = rk4_steps(generator, y, t0, t1, n);
    const Matrix fine = rk4_steps(generator, y, t0, t1, 2 * n);
    const double gap = (coarse - fine).cwiseAbs().maxCoeff();
    if (!(gap <= options.tol))
      throw IntegrationError("integrate_generator",
                             "step-halving discrepancy " + format_number(gap) + at_time(t1) +
                                 "; reduce max_substep");
    y = fine;
    data->states.push_back(y);
  }
  auto gen = std::move(generator);
  const double step = options.max_substep;
  return MapFamily(d, grid.t_max(), "generator", [d, data, gen, step](double t) {
    const auto& ts = data->times;
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t i = static_cast<std::size_t>(std::distance(ts.begin(), it)) - 1;
    if (ts[i] == t) return Superoperator(d, data->states[i]);
    const int n = std::max(1, static_cast<int>(std::ceil((t - ts[i]) / step)));
    return Superoperator(d, rk4_steps(gen, data->states[i], ts[i], t, 2 * n));
  });
}

Superoperator generator_from_family(const MapFamily& family, double t, double h,
                                    double rank_tol) {
  if (!(h > 0.0)) throw ContractViolation("generator", "finite-difference step must be > 0");
  const Matrix n = family(t).natural();
  Eigen::JacobiSVD<Matrix> svd(n);
  const double smin = svd.singularValues().minCoeff();
  if (!(smin > rank_tol)) throw SingularGenerator(t, smin);
  Matrix deriv;
  if (t >= h) {
    deriv = (family(t + h).natural() - family(t - h).natural()) / (2.0 * h);
  } else {
    deriv = (-3.0 * n + 4.0 * family(t + h).natural() - family(t + 2.0 * h).natural()) /
            (2.0 * h);
  }
  // L = D N^{-1}  <=>  N^T L^T = D^T.
  const Matrix lt = n.transpose().fullPivLu().solve(deriv.transpose());
  return Superoperator(family.dim(), lt.transpose());
}

Superoperator GKLSDecomposition::reconstruct() const {
  std::vector<JumpTerm> jumps;
  for (std::size_t k = 0; k < lindblad_ops.size(); ++k)
    jumps.push_back({lindblad_ops[k], ScalarSignal::constant(rates(static_cast<Eigen::Index>(k)))});
  return gkls_generator(hamiltonian, std::move(jumps))(0.0);
}

GKLSDecomposition canonical_gkls(const Superoperator& generator, double tol) {
  const Eigen::Index d = generator.dim();
  const Matrix& n = generator.natural();
  Eigen::RowVectorXcd trace_row = Eigen::RowVectorXcd::Zero(d * d);
  for (Eigen::Index k = 0; k < d; ++k) trace_row += n.row(k + d * k);
  const double tr_res = trace_row.norm();
  if (!(tr_res <= tol))
    throw ValidationError("canonical_gkls", "generator is not trace-annihilating (residual " +
                                                format_number(tr_res) + ")");
  const std::vector<Matrix> basis = traceless_operator_basis(d);
  const Eigen::Index m = d * d;
  Matrix f(m, m);
  for (Eigen::Index a = 0; a < m; ++a) f.col(a) = vec(basis[static_cast<std::size_t>(a)]);
  const Matrix choi = to_choi(generator).matrix();
  Matrix coeff = f.adjoint() * choi * f;
  coeff = 0.5 * (coeff + coeff.adjoint());

  GKLSDecomposition out;
  out.kossakowski = coeff.bottomRightCorner(m - 1, m - 1);
  Matrix k = (coeff(0, 0).real() / (2.0 * d)) * Matrix::Identity(d, d);
  for (Eigen::Index i = 1; i < m; ++i)
    k += coeff(i, 0) / std::sqrt(static_cast<double>(d)) * basis[static_cast<std::size_t>(i)];
  const cplx I(0.0, 1.0);
  out.hamiltonian = 0.5 * I * (k - k.adjoint());
  out.hamiltonian = 0.5 * (out.hamiltonian + out.hamiltonian.adjoint());

  Eigen::SelfAdjointEigenSolver<Matrix> es(out.kossakowski);
  const Eigen::Index r = m - 1;
  out.rates.resize(r);
  for (Eigen::Index j = 0; j < r; ++j) {
    const Eigen::Index src = r - 1 - j;
    out.rates(j) = es.eigenvalues()(src);
    Matrix op = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < r; ++i)
      op += es.eigenvectors()(i, src) * basis[static_cast<std::size_t>(i + 1)];
    out.lindblad_ops.push_back(op);
  }
  return out;
}

DampingBasis damping_basis(const MapFamily& family, double t, double tol) {
  return damping_basis(family(t), tol);
}

DampingBasis damping_basis(const Superoperator& map, double tol) {
  const Eigen::Index d = map.dim();
  const Matrix& n = map.natural();
  Eigen::ComplexEigenSolver<Matrix> es(n);
  if (es.info() != Eigen::Success)
    throw ValidationError("damping_basis", "eigen-decomposition failed");
  const Eigen::Index m = n.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  const auto& ev = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(ev(a)), mb = std::abs(ev(b));
    if (std::abs(ma - mb) > 1e-12) return ma > mb;
    return std::arg(ev(a)) < std::arg(ev(b));
  });
  Matrix r(m, m);
  DampingBasis out;
  out.eigenvalues.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    out.eigenvalues(j) = ev(src);
    r.col(j) = es.eigenvectors().col(src).normalized();
  }
  Eigen::JacobiSVD<Matrix> svd(r);
  const auto& sv = svd.singularValues();
  out.condition_number = sv(m - 1) > 0.0 ? sv(0) / sv(m - 1)
                                         : std::numeric_limits<double>::infinity();
  if (!(out.condition_number < 1.0 / tol))
    throw ValidationError("damping_basis",
                          "natural matrix is numerically defective (eigenvector condition "
                          "number " + format_number(out.condition_number) +
                              "); use SVD-based image/kernel analysis");
  const Matrix rinv = r.inverse();
  Matrix rebuilt = Matrix::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    out.right.push_back(unvec(r.col(j), d));
    const Vector g = rinv.row(j).adjoint();
    out.left.push_back(unvec(g, d));
    rebuilt += out.eigenvalues(j) * r.col(j) * g.adjoint();
  }
  out.reconstruction_residual = (rebuilt - n).norm();
  return out;
}

}  // namespace markovlens
