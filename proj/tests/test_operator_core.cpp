#include <doctest.h>

#include "markovlens/error.hpp"
#include "markovlens/linalg.hpp"
#include "markovlens/random.hpp"
#include "markovlens/subspace.hpp"
#include "oracles.hpp"

using namespace markovlens;

TEST_CASE("hermitian matrix rejects non-Hermitian input") {
  Matrix m(2, 2);
  m << 1, 1, 0, 1;
  CHECK_THROWS_AS(HermitianMatrix{m}, ContractViolation);
  m(1, 0) = 1.0 + 1e-14;
  HermitianMatrix h(m);
  CHECK(hermiticity_residual(h.matrix()) == 0.0);
}

TEST_CASE("density matrix needs unit trace and PSD") {
  Matrix m = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(DensityMatrix{m}, ContractViolation);
  m *= 0.5;
  CHECK_NOTHROW(DensityMatrix{m});
  Matrix bad(2, 2);
  bad << 1.2, 0, 0, -0.2;
  CHECK_THROWS_AS(DensityMatrix{bad}, ContractViolation);
}

TEST_CASE("trace norm agrees with the real-embedding oracle") {
  Rng rng = make_rng(42, 1);
  for (int k = 0; k < 200; ++k) {
    const Eigen::Index d = 2 + k % 4;
    const Matrix g = ginibre(d, d, rng);
    const Matrix h = 0.5 * (g + g.adjoint());
    const double expect = oracle::trace_norm(h);
    CHECK(trace_norm(HermitianMatrix(h)) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("trace norm of sigma_x and of a projector") {
  CHECK(trace_norm(HermitianMatrix(pauli::x())) == doctest::Approx(2.0));
  CHECK(trace_norm(HermitianMatrix(pauli::ground_projector())) == doctest::Approx(1.0));
}

TEST_CASE("vec is column stacking") {
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  const Vector v = vec(a);
  CHECK(v(0) == cplx(1));
  CHECK(v(1) == cplx(3));
  CHECK(v(2) == cplx(2));
  CHECK(v(3) == cplx(4));
  CHECK((unvec(v, 2) - a).norm() == 0.0);
}

TEST_CASE("operator bases are HS orthonormal and Hermitian") {
  for (Eigen::Index d : {2, 3, 4}) {
    for (const auto& basis : {hermitian_operator_basis(d), traceless_operator_basis(d)}) {
      REQUIRE(basis.size() == static_cast<std::size_t>(d * d));
      for (std::size_t a = 0; a < basis.size(); ++a) {
        CHECK(hermiticity_residual(basis[a]) < 1e-14);
        for (std::size_t b = 0; b < basis.size(); ++b)
          CHECK(std::abs(hs_inner(basis[a], basis[b]) - (a == b ? 1.0 : 0.0)) < 1e-12);
      }
    }
    const auto tl = traceless_operator_basis(d);
    for (std::size_t a = 1; a < tl.size(); ++a) CHECK(std::abs(tl[a].trace()) < 1e-13);
  }
}

TEST_CASE("pauli conventions") {
  // sigma_- = |1><0| moves the excited state 0 to the ground state 1.
  Matrix e0 = oracle::unit(2, 0, 0);
  Matrix out = pauli::lowering() * e0 * pauli::lowering().adjoint();
  CHECK((out - pauli::ground_projector()).norm() < 1e-15);
  CHECK((pauli::sigma(3) - oracle::qubit::sz()).norm() == 0.0);
  CHECK((pauli::sigma(2) - oracle::qubit::sy()).norm() == 0.0);
}

TEST_CASE("psd check and square roots") {
  Rng rng = make_rng(3);
  const Matrix rho = random_density(3, rng, 2);
  const auto [s, ps] = psd_sqrt_and_pinv_sqrt(HermitianMatrix(rho), 1e-10);
  CHECK((s * s - rho).norm() < 1e-12);
  const Matrix proj = ps * rho * ps;
  CHECK((proj * proj - proj).norm() < 1e-10);
  CHECK(std::abs(proj.trace().real() - 2.0) < 1e-10);
  CHECK(psd_check(HermitianMatrix(rho), 1e-12).psd);
  CHECK_FALSE(psd_check(HermitianMatrix(pauli::z()), 1e-12).psd);
}

TEST_CASE("random ensembles are valid and seed-determined") {
  Rng a = make_rng(5, 2), b = make_rng(5, 2), c = make_rng(5, 3);
  const Matrix ha = random_hermitian_unit_trace_norm(3, a);
  const Matrix hb = random_hermitian_unit_trace_norm(3, b);
  const Matrix hc = random_hermitian_unit_trace_norm(3, c);
  CHECK((ha - hb).norm() == 0.0);
  CHECK((ha - hc).norm() > 1e-3);
  CHECK(oracle::trace_norm(ha) == doctest::Approx(1.0).epsilon(1e-12));
  const Matrix u = random_unitary(4, a);
  CHECK((u.adjoint() * u - Matrix::Identity(4, 4)).norm() < 1e-12);
  const auto ks = random_kraus(3, 4, a);
  Matrix sum = Matrix::Zero(3, 3);
  for (const auto& k : ks) sum += k.adjoint() * k;
  CHECK((sum - Matrix::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("gram schmidt drops dependent vectors") {
  std::vector<Matrix> span = {pauli::x(), pauli::z(), pauli::x() + 2.0 * pauli::z()};
  const SubspaceBasis m = gram_schmidt_hermitian(span);
  CHECK(m.size() == 2);
  const Superoperator p = orthogonal_projector(m);
  CHECK((p.apply(pauli::y())).norm() < 1e-14);
  CHECK((p.apply(pauli::x()) - pauli::x()).norm() < 1e-14);
  CHECK_THROWS_AS(gram_schmidt_hermitian(std::vector<Matrix>{Matrix::Zero(2, 2)}),
                  EmptyBasisError);
}
