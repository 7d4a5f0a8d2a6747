#include <doctest.h>

#include <cmath>

#include "markovlens/cp_extension.hpp"
#include "markovlens/divisibility.hpp"
#include "markovlens/error.hpp"
#include "markovlens/random.hpp"
#include "oracles.hpp"

using namespace markovlens;

namespace {

SubspaceMapSpec span_spec(const std::vector<Matrix>& span, const Superoperator& v, bool tp) {
  return restrict_map(v, gram_schmidt_hermitian(span), tp);
}

}  // namespace

TEST_CASE("positively generated subspaces") {
  CHECK(positively_generated_check(gram_schmidt_hermitian(std::vector<Matrix>{pauli::x()}))
            .positively_generated == false);
  const auto full = positively_generated_check(gram_schmidt_hermitian(hermitian_operator_basis(2)));
  CHECK(full.positively_generated);
  CHECK(full.min_eigenvalue_on_support > 0.0);
  // Image of amplitude damping at an intermediate time.
  Rng rng = make_rng(1);
  const auto ks = random_kraus(3, 2, rng);
  const SubspaceBasis im = image_basis(from_kraus(ks));
  CHECK(positively_generated_check(im).positively_generated);
}

TEST_CASE("jencova reduction examples") {
  const auto p0 = jencova_reduce(gram_schmidt_hermitian(std::vector<Matrix>{pauli::ground_projector()}));
  CHECK((p0.rho - pauli::ground_projector()).norm() < 1e-9);
  REQUIRE(p0.reduced.size() == 1);
  CHECK(std::abs(std::abs(hs_inner(p0.reduced[0], pauli::ground_projector())) - 1.0) < 1e-9);

  const SubspaceBasis iz = gram_schmidt_hermitian(std::vector<Matrix>{pauli::identity(), pauli::z()});
  const auto r = jencova_reduce(iz);
  CHECK((r.rho - 0.5 * pauli::identity()).norm() < 1e-8);
  for (const auto& g : iz.elements()) CHECK((r.unconjugate(r.conjugate(g)) - g).norm() < 1e-9);

  CHECK_THROWS_AS(jencova_reduce(gram_schmidt_hermitian(std::vector<Matrix>{pauli::x()})),
                  ValidationError);
}

TEST_CASE("jencova round trip on random positively generated subspaces") {
  Rng rng = make_rng(2);
  for (int k = 0; k < 20; ++k) {
    std::vector<Matrix> span;
    for (int j = 0; j < 3; ++j) span.push_back(random_density(3, rng, 1));
    const SubspaceBasis m = gram_schmidt_hermitian(span);
    const auto r = jencova_reduce(m);
    for (const auto& g : m.elements()) CHECK((r.unconjugate(r.conjugate(g)) - g).norm() < 1e-9);
    // The reduced system contains the support projector.
    const Superoperator proj = orthogonal_projector(r.reduced);
    CHECK((proj.apply(r.support) - r.support).norm() < 1e-8);
  }
}

TEST_CASE("hand-built certificates pass verification") {
  const Matrix p0 = pauli::ground_projector();
  const auto s1 = span_spec({p0}, Superoperator::identity(2), true);
  CHECK(verify_extension(to_choi(channels::replacement(p0)), s1, 1e-7).passes);

  const auto s2 = span_spec({pauli::identity(), pauli::z()}, Superoperator::identity(2), true);
  CHECK(verify_extension(to_choi(channels::dephasing_z()), s2, 1e-7).passes);

  Rng rng = make_rng(3);
  const Matrix omega = random_density(2, rng);
  const auto s3 = span_spec({omega}, Superoperator::identity(2), true);
  CHECK(verify_extension(to_choi(channels::replacement(omega)), s3, 1e-7).passes);
}

TEST_CASE("negative control: wrong action is reported") {
  const auto spec = span_spec({pauli::ground_projector()}, Superoperator::identity(2), true);
  Rng rng = make_rng(4);
  const Matrix w = ginibre(4, 4, rng);
  const ChoiMatrix c(2, w * w.adjoint());
  const ExtensionReport rep = verify_extension(c, spec, 1e-7);
  CHECK_FALSE(rep.passes);
  CHECK(rep.action_residual > 1e-7);
}

TEST_CASE("extension of a total CPTP map returns its Choi") {
  Rng rng = make_rng(5);
  const Superoperator v = from_kraus(random_kraus(2, 3, rng));
  const auto spec = restrict_map(v, gram_schmidt_hermitian(hermitian_operator_basis(2)), true);
  const FeasibilityResult r = extend_cp(spec);
  REQUIRE(r.status == FeasibilityStatus::FEASIBLE);
  CHECK(r.action_residual < 1e-9);
  CHECK((r.choi->matrix() - to_choi(v).matrix()).norm() < 1e-8);
}

TEST_CASE("extend_cp on breakpoint subspace specs") {
  const Matrix p0 = pauli::ground_projector();
  Rng rng = make_rng(6);
  const Matrix omega = random_density(2, rng);
  for (const auto& spec : {span_spec({p0}, Superoperator::identity(2), true),
                           span_spec({pauli::identity(), pauli::z()}, Superoperator::identity(2), true),
                           span_spec({omega}, Superoperator::identity(2), true)}) {
    const FeasibilityResult r = extend_cp(spec);
    REQUIRE(r.status == FeasibilityStatus::FEASIBLE);
    CHECK(r.iterations <= 5000);
    CHECK(verify_extension(*r.choi, spec, 1e-7).passes);
  }
}

TEST_CASE("transpose on the full space is not CP-extendable") {
  const auto spec = restrict_map(channels::transpose(2),
                                 gram_schmidt_hermitian(hermitian_operator_basis(2)), true);
  ExtendOptions o;
  o.max_iter = 1000;
  const FeasibilityResult r = extend_cp(spec, o);
  CHECK(r.status == FeasibilityStatus::INFEASIBLE_EVIDENCE);
  CHECK_FALSE(verify_extension(*r.choi, spec, 1e-7).passes);
}

TEST_CASE("inconsistent constraints are rejected") {
  // TP is impossible when the identity must map to twice itself.
  const auto spec = restrict_map(scale(Superoperator::identity(2), 2.0),
                                 gram_schmidt_hermitian(std::vector<Matrix>{pauli::identity()}), true);
  CHECK_THROWS_AS(extend_cp(spec), MalformedConstraints);
}

TEST_CASE("alternating projections are Fejer monotone toward a certificate") {
  const Matrix p0 = pauli::ground_projector();
  const auto spec = span_spec({p0}, Superoperator::identity(2), true);
  const Matrix cert = to_choi(channels::replacement(p0)).matrix();

  // Default start: Dykstra lands on the feasible set immediately.
  ExtendOptions d;
  d.reference = cert;
  const FeasibilityResult rd = extend_cp(spec, d);
  CHECK(rd.status == FeasibilityStatus::FEASIBLE);
  for (std::size_t i = 1; i < rd.reference_distance.size(); ++i)
    CHECK(rd.reference_distance[i] <= rd.reference_distance[i - 1] + 1e-12);

  // Random Hermitian starts, plain projections, long runs.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng = make_rng(seed, 99);
    const Matrix g = ginibre(4, 4, rng);
    ExtendOptions o;
    o.use_dykstra = false;
    o.max_iter = 1500;
    o.warm_start = Matrix(0.5 * (g + g.adjoint()));
    o.reference = cert;
    const FeasibilityResult r = extend_cp(spec, o);
    REQUIRE(r.reference_distance.size() > 100);
    for (std::size_t i = 1; i < r.reference_distance.size(); ++i)
      CHECK(r.reference_distance[i] <= r.reference_distance[i - 1] + 1e-12);
  }
}

TEST_CASE("CP on image implies a non-TP CP extension") {
  // Amplitude damping propagator restricted to its image at s.
  const MapFamily fam = preset_amplitude_damping(ScalarSignal::exp_decay(0.4), 3.0);
  const PropagatorResult p = propagator(fam, 2.0, 1.0);
  const auto spec = restrict_map(p.v, p.domain, false);
  ExtendOptions o;
  o.max_iter = 2000;
  const FeasibilityResult r = extend_cp(spec, o);
  CHECK(r.status == FeasibilityStatus::FEASIBLE);
  CHECK(verify_extension(*r.choi, spec, 1e-7).passes);
}
