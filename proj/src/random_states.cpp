#include "qmc/random_states.hpp"

#include <cmath>

namespace qmc {

Mat random_ginibre(Rng& rng, int rows, int cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const double re = g(rng);
      const double im = g(rng);
      m(i, j) = cplx(re, im);
    }
  return m;
}

Mat random_unitary(Rng& rng, int dim) {
  Eigen::HouseholderQR<Mat> qr(random_ginibre(rng, dim, dim));
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR();
  for (int i = 0; i < dim; ++i) {
    const cplx d = r(i, i);
    if (std::abs(d) > 0) q.col(i) *= d / std::abs(d);
  }
  return q;
}

Mat random_isometry(Rng& rng, int rows, int cols) {
  return random_unitary(rng, rows).leftCols(cols);
}

Vec random_pure(Rng& rng, int dim) {
  Vec v = random_ginibre(rng, dim, 1).col(0);
  return v / v.norm();
}

Mat random_density(Rng& rng, int dim, int rank) {
  if (rank < 0) rank = dim;
  const Mat g = random_ginibre(rng, dim, rank);
  Mat r = g * g.adjoint();
  r /= r.trace().real();
  return hermitize(r);
}

Mat random_contraction(Rng& rng, int dim) {
  std::uniform_real_distribution<double> u(0.02, 0.98);
  const Mat w = random_unitary(rng, dim);
  RVec ev(dim);
  for (int i = 0; i < dim; ++i) ev[i] = u(rng);
  return hermitize(w * ev.cast<cplx>().asDiagonal() * w.adjoint());
}

Mat random_psd(Rng& rng, int dim, double scale) {
  const Mat g = random_ginibre(rng, dim, dim);
  return hermitize(scale * g * g.adjoint() / static_cast<double>(dim));
}

RVec random_distribution(Rng& rng, int dim, bool allow_zero) {
  std::exponential_distribution<double> e(1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RVec p(dim);
  for (int i = 0; i < dim; ++i) {
    p[i] = e(rng) + (allow_zero ? 0.0 : 0.05);
    if (allow_zero && u(rng) < 0.25) p[i] = 0.0;
  }
  if (p.sum() <= 0) p[0] = 1.0;
  return p / p.sum();
}

}  // namespace qmc
