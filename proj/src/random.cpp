#include "markovlens/random.hpp"

#include <cmath>

namespace markovlens {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream & 0xffffffffu),
                    static_cast<std::uint32_t>(stream >> 32), 0x6d6c656eu};
  return Rng(seq);
}

Matrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = n(rng);
      const double im = n(rng);
      g(i, j) = cplx(re, im);
    }
  return g;
}

Vector random_pure_state(Eigen::Index d, Rng& rng) {
  Vector v = ginibre(d, 1, rng).col(0);
  return v / v.norm();
}

Matrix random_hermitian_unit_trace_norm(Eigen::Index d, Rng& rng) {
  Matrix g = ginibre(d, d, rng);
  Matrix h = 0.5 * (g + g.adjoint());
  return h / trace_norm(HermitianMatrix(h));
}

Matrix random_density(Eigen::Index d, Rng& rng, Eigen::Index rank) {
  Matrix w = ginibre(d, rank > 0 ? rank : d, rng);
  Matrix rho = w * w.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

Matrix random_unitary(Eigen::Index d, Rng& rng) {
  Matrix g = ginibre(d, d, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < d; ++k) {
    const cplx rk = r(k, k);
    q.col(k) *= rk / std::abs(rk);
  }
  return q;
}

std::vector<Matrix> random_kraus(Eigen::Index d, Eigen::Index n_kraus, Rng& rng) {
  // Stack the Kraus operators as a (n d) x d isometry.
  Matrix g = ginibre(n_kraus * d, d, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix v = qr.householderQ() * Matrix::Identity(n_kraus * d, d);
  std::vector<Matrix> out;
  for (Eigen::Index k = 0; k < n_kraus; ++k) out.push_back(v.block(k * d, 0, d, d));
  return out;
}

}  // namespace markovlens
