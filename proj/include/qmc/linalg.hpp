#pragma once

#include <complex>
#include <functional>

#include <Eigen/Dense>

namespace qmc {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

// Eigenvalues in [-kClampTol, 0) are treated as exact zeros.
inline constexpr double kClampTol = 1e-10;
// Eigenvalues above this define the support.
inline constexpr double kSupportTol = 1e-12;

struct Eigh {
  RVec values;  // ascending
  Mat vectors;  // columns
};

Mat hermitize(const Mat& a);

// Plain Hermitian eigendecomposition; no clamping (input may be indefinite).
Eigh eigh(const Mat& a);

// Same kernel, with eigenvalues in [-kClampTol, 0) set to zero.
Eigh psd_eigh(const Mat& a);

Mat spectral_apply(const Eigh& e, const std::function<double(double)>& f);

Mat sqrtm_psd(const Mat& a);
// (A)^{-1/2} restricted to the support of A.
Mat pinv_sqrt_psd(const Mat& a);
Mat pinv_psd(const Mat& a);
Mat support_projector(const Mat& a);

double trace_norm(const Mat& a);
double min_eigenvalue(const Mat& a);
double max_eigenvalue(const Mat& a);

Mat kron(const Mat& a, const Mat& b);
Vec kron(const Vec& a, const Vec& b);

bool is_isometry(const Mat& v, double tol = 1e-10);
bool is_hermitian(const Mat& a, double tol = 1e-12);

// x log2 x with the 0 log 0 = 0 convention.
double xlog2x(double x);

}  // namespace qmc
