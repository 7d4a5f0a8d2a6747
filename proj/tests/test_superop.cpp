#include <doctest.h>

#include <cmath>

#include "markovlens/error.hpp"
#include "markovlens/random.hpp"
#include "markovlens/superop.hpp"
#include "oracles.hpp"

using namespace markovlens;

namespace {

Superoperator random_channel(Eigen::Index d, Eigen::Index nk, Rng& rng) {
  return from_kraus(random_kraus(d, nk, rng));
}

}  // namespace

TEST_CASE("sandwich matches the entrywise action") {
  Rng rng = make_rng(10);
  for (Eigen::Index d : {2, 3}) {
    const Matrix a = ginibre(d, d, rng), b = ginibre(d, d, rng), x = ginibre(d, d, rng);
    const Superoperator s = Superoperator::sandwich(a, b);
    CHECK((s.apply(x) - a * x * b).norm() < 1e-12);
    CHECK((oracle::apply_natural(s.natural(), x) - a * x * b).norm() < 1e-12);
  }
}

TEST_CASE("choi matrix agrees with the matrix-unit oracle") {
  Rng rng = make_rng(11);
  const auto ks = random_kraus(3, 2, rng);
  const Superoperator s = from_kraus(ks);
  const Matrix expect = oracle::choi([&](const Matrix& x) { return oracle::kraus_apply(ks, x); }, 3);
  CHECK((to_choi(s).matrix() - expect).norm() < 1e-12);
  CHECK((to_choi(s).block(0, 1) - oracle::kraus_apply(ks, oracle::unit(3, 0, 1))).norm() < 1e-12);
}

TEST_CASE("choi round trip") {
  Rng rng = make_rng(12);
  for (int k = 0; k < 50; ++k) {
    const Eigen::Index d = 2 + k % 3;
    const Superoperator s(d, ginibre(d * d, d * d, rng));
    const Superoperator back = from_choi(to_choi(s));
    CHECK(hs_distance(s, back) < 1e-12);
  }
}

TEST_CASE("kraus reconstruction") {
  Rng rng = make_rng(13);
  for (int k = 0; k < 30; ++k) {
    const Superoperator s = random_channel(2 + k % 3, 1 + k % 4, rng);
    const auto ks = kraus_from_choi(to_choi(s), 1e-10);
    CHECK(hs_distance(from_kraus(ks), s) < 1e-8);
  }
}

TEST_CASE("transpose is positive but not CP") {
  const Superoperator t = channels::transpose(2);
  const auto cp = is_cp(t, 1e-9);
  CHECK_FALSE(cp.holds);
  CHECK(cp.value == doctest::Approx(-1.0));
  CHECK(is_tp(t, 1e-12).holds);
  CHECK_THROWS_AS(kraus_from_choi(to_choi(t), 1e-9), NotCompletelyPositive);
}

TEST_CASE("standard channels") {
  Rng rng = make_rng(14);
  const Matrix rho = random_density(2, rng);
  const Matrix omega = random_density(2, rng);
  CHECK((channels::replacement(omega).apply(rho) - omega).norm() < 1e-14);
  CHECK((channels::depolarizing(2).apply(rho) - 0.5 * Matrix::Identity(2, 2)).norm() < 1e-14);
  const Matrix deph = channels::dephasing_z().apply(rho);
  CHECK(std::abs(deph(0, 1)) < 1e-15);
  CHECK(is_cp(channels::dephasing_z(), 1e-12).holds);
}

TEST_CASE("tensor with identity and blockwise application agree") {
  Rng rng = make_rng(15);
  const Superoperator s = random_channel(2, 3, rng);
  const Matrix x = ginibre(6, 6, rng);
  const Matrix full = tensor_with_identity(s, 3).apply(x);
  CHECK((apply_with_ancilla(s, x, 3) - full).norm() < 1e-12);
  // The ancilla marginal is untouched by a trace-preserving S.
  Matrix marg = Matrix::Zero(3, 3);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) {
      marg(i, j) = full.block(2 * i, 2 * j, 2, 2).trace();
      CHECK(std::abs(marg(i, j) - x.block(2 * i, 2 * j, 2, 2).trace()) < 1e-12);
    }
}

TEST_CASE("trace-norm estimate of CPTP maps never exceeds one") {
  Rng rng = make_rng(16);
  for (int k = 0; k < 10; ++k) {
    const Superoperator s = random_channel(2 + k % 2, 2, rng);
    CHECK(induced_trace_norm_estimate(s, 100, k) <= 1.0 + 1e-9);
  }
  CHECK(induced_trace_norm_estimate(Superoperator::identity(2), 50, 0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(induced_trace_norm_estimate(scale(Superoperator::identity(2), 2.0), 50, 0) ==
        doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("tp residual on a subspace") {
  // X -> sigma_z X sigma_z is TP; X -> 2 X is TP only on traceless inputs.
  const Superoperator twice = scale(Superoperator::identity(2), 2.0);
  CHECK(tp_residual_on(twice, {pauli::x(), pauli::y()}) < 1e-15);
  CHECK(tp_residual_on(twice, {pauli::identity()}) == doctest::Approx(2.0));
}

TEST_CASE("dimension errors") {
  CHECK_THROWS_AS(Superoperator(2, Matrix::Zero(3, 3)), ContractViolation);
  CHECK_THROWS_AS(compose(Superoperator::identity(2), Superoperator::identity(3)),
                  DimensionMismatch);
}
