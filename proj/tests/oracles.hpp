#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

// min sum pi_i q_i s.t. sum pi_i p_i >= 1 - eps, 0 <= pi <= 1, by vertex
// enumeration (every vertex has at most one fractional coordinate).
inline double threshold_lp(const std::vector<double>& p, const std::vector<double>& q, double eps) {
  const int d = static_cast<int>(p.size());
  double best = std::numeric_limits<double>::infinity();
  const double need = 1.0 - eps;
  for (int mask = 0; mask < (1 << d); ++mask) {
    double ps = 0, qs = 0;
    for (int i = 0; i < d; ++i)
      if (mask >> i & 1) {
        ps += p[i];
        qs += q[i];
      }
    if (ps >= need - 1e-15) best = std::min(best, qs);
    for (int k = 0; k < d; ++k) {
      if (mask >> k & 1 || p[k] <= 0) continue;
      const double frac = (need - ps) / p[k];
      if (frac < 0 || frac > 1) continue;
      best = std::min(best, qs + frac * q[k]);
    }
  }
  return -std::log2(best);
}

// Smooth dmax on a grid: smallest lambda such that some r on the lattice with
// sum r = 1, r <= 2^lambda q has purified distance <= eps to p (two outcomes).
inline double smooth_dmax_grid2(double p0, double q0, double eps, double step) {
  double best = std::numeric_limits<double>::infinity();
  const double p1 = 1 - p0, q1 = 1 - q0;
  for (double r0 = 0; r0 <= 1 + 1e-12; r0 += step) {
    const double r1 = 1 - r0;
    const double f = std::sqrt(p0 * std::max(r0, 0.0)) + std::sqrt(p1 * std::max(r1, 0.0));
    if (std::sqrt(std::max(0.0, 1 - f * f)) > eps) continue;
    double lam = -std::numeric_limits<double>::infinity();
    if (r0 > 0) lam = std::max(lam, std::log2(r0 / q0));
    if (r1 > 0) lam = std::max(lam, std::log2(r1 / q1));
    best = std::min(best, lam);
  }
  return best;
}

inline double binary_entropy(double x) {
  if (x <= 0 || x >= 1) return 0;
  return -x * std::log2(x) - (1 - x) * std::log2(1 - x);
}

}  // namespace oracle
