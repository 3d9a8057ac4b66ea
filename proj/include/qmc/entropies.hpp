#pragma once

#include <string>
#include <vector>

#include "qmc/state.hpp"

namespace qmc {

// All logarithms are base 2.

struct RelEntropyResult {
  double D = 0.0;
  double V = 0.0;
  bool infinite = false;
  std::string diagnostic;
};

// Support of rho must lie in the support of sigma (leakage > 1e-10 gives
// the infinite sentinel).
RelEntropyResult rel_entropy_and_variance(const Mat& rho, const Mat& sigma);
double rel_entropy(const Mat& rho, const Mat& sigma);
// Tr A log A - Tr A log B for PSD A of any trace; +inf on support violation.
double rel_entropy_unnormalized(const Mat& a, const Mat& b);
// Mass of rho outside supp(sigma).
double support_leakage(const Mat& rho, const Mat& sigma);

double dmax(const Mat& rho, const Mat& sigma);

enum class Certified { exact, upper_bound };

struct SmoothResult {
  double value = 0.0;
  double epsilon = 0.0;
  Mat witness;
  Certified certified = Certified::upper_bound;
  double distance = 0.0;  // purified distance of the witness to the input
};

SmoothResult dmax_smooth_upper(const Mat& rho, const Mat& sigma, double eps);
SmoothResult dmax_smooth_classical(const RVec& p, const RVec& q, double eps);
// Diagonal-matrix front end; throws on off-diagonal entries above 1e-12.
SmoothResult dmax_smooth_classical(const Mat& rho, const Mat& sigma, double eps);

struct OptimalTest {
  Mat op;
  double typeI = 0.0;
  double typeII = 0.0;
  double value = 0.0;
  double threshold = 0.0;
  bool infinite = false;
};

inline constexpr double kDhCap = 50.0;

OptimalTest dh_eps(const Mat& rho, const Mat& sigma, double eps);

double von_neumann(const Mat& rho);
double entropy_of(const DensityOperator& rho, const std::vector<std::string>& regs);

struct RatePartition {
  std::vector<std::string> R, A, B, C;
};

struct VnRates {
  double S = 0.0;
  double H_C_given_RB = 0.0;
  double I_RC_given_B = 0.0;
  double I_AB = 0.0;
};

VnRates vn_rates(const DensityOperator& psi, const RatePartition& part);

// -dmax(rho_AB || I_A (x) rho_B): conditional min-entropy with the marginal fixed.
double hmin_fixed_marginal(const DensityOperator& rho, const std::vector<std::string>& a,
                           const std::vector<std::string>& b);

double phi_inv(double eps);

enum class Direction { dmax, dh };

// n D + sqrt(n V) Phi^{-1}(eps); the O(log n) term is not modeled.
double second_order_estimate(double D, double V, int n, double eps, Direction dir);

}  // namespace qmc
