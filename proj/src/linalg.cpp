#include "qmc/linalg.hpp"

#include <cmath>

namespace qmc {

Mat hermitize(const Mat& a) { return 0.5 * (a + a.adjoint()); }

Eigh eigh(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(a));
  return {es.eigenvalues(), es.eigenvectors()};
}

Eigh psd_eigh(const Mat& a) {
  Eigh e = eigh(a);
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    if (e.values[i] < 0.0 && e.values[i] >= -kClampTol) e.values[i] = 0.0;
  }
  return e;
}

Mat spectral_apply(const Eigh& e, const std::function<double(double)>& f) {
  RVec d(e.values.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = f(e.values[i]);
  return e.vectors * d.cast<cplx>().asDiagonal() * e.vectors.adjoint();
}

Mat sqrtm_psd(const Mat& a) {
  // Rounding noise on zero eigenvalues would otherwise enter as sqrt(1e-17).
  const Eigh e = psd_eigh(a);
  const double floor = 1e-14 * std::max(1.0, e.values.size() ? e.values.maxCoeff() : 0.0);
  return spectral_apply(e, [floor](double x) { return x > floor ? std::sqrt(x) : 0.0; });
}

Mat pinv_sqrt_psd(const Mat& a) {
  return spectral_apply(psd_eigh(a),
                        [](double x) { return x > kSupportTol ? 1.0 / std::sqrt(x) : 0.0; });
}

Mat pinv_psd(const Mat& a) {
  return spectral_apply(psd_eigh(a), [](double x) { return x > kSupportTol ? 1.0 / x : 0.0; });
}

Mat support_projector(const Mat& a) {
  return spectral_apply(psd_eigh(a), [](double x) { return x > kSupportTol ? 1.0 : 0.0; });
}

double trace_norm(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues().sum();
}

double min_eigenvalue(const Mat& a) { return eigh(a).values.minCoeff(); }
double max_eigenvalue(const Mat& a) { return eigh(a).values.maxCoeff(); }

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vec kron(const Vec& a, const Vec& b) {
  Vec out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
  return out;
}

bool is_isometry(const Mat& v, double tol) {
  Mat g = v.adjoint() * v;
  return (g - Mat::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() <= tol;
}

bool is_hermitian(const Mat& a, double tol) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return true;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

}  // namespace qmc
