#include "qmc/entropies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

namespace qmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLeakTol = 1e-10;

Mat log2_on_support(const Eigh& e) {
  return spectral_apply(e, [](double x) { return x > kSupportTol ? std::log2(x) : 0.0; });
}

Mat kernel_projector(const Eigh& e) {
  return spectral_apply(e, [](double x) { return x > kSupportTol ? 0.0 : 1.0; });
}

}  // namespace

double support_leakage(const Mat& rho, const Mat& sigma) {
  const Eigh es = psd_eigh(sigma);
  return std::max(0.0, (kernel_projector(es) * rho).trace().real());
}

RelEntropyResult rel_entropy_and_variance(const Mat& rho, const Mat& sigma) {
  RelEntropyResult r;
  const Eigh er = psd_eigh(rho);
  const Eigh es = psd_eigh(sigma);
  const double leak = std::max(0.0, (kernel_projector(es) * rho).trace().real());
  if (leak > kLeakTol) {
    r.D = kInf;
    r.V = kInf;
    r.infinite = true;
    r.diagnostic = "support of rho not contained in support of sigma (leaked mass " + std::to_string(leak) + ")";
    return r;
  }
  const Mat l = log2_on_support(er) - log2_on_support(es);
  const Mat sq = sqrtm_psd(rho);
  r.D = (rho * l).trace().real();
  const double second = (l * sq).squaredNorm();
  r.V = std::max(0.0, second - r.D * r.D);
  return r;
}

double rel_entropy(const Mat& rho, const Mat& sigma) { return rel_entropy_and_variance(rho, sigma).D; }

double rel_entropy_unnormalized(const Mat& a, const Mat& b) {
  const Eigh ea = psd_eigh(a);
  const Eigh eb = psd_eigh(b);
  const double leak = std::max(0.0, (kernel_projector(eb) * a).trace().real());
  if (leak > kLeakTol) return kInf;
  double s = 0.0;
  for (Eigen::Index i = 0; i < ea.values.size(); ++i) s += xlog2x(std::max(0.0, ea.values[i]));
  return s - (a * log2_on_support(eb)).trace().real();
}

double dmax(const Mat& rho, const Mat& sigma) {
  if (support_leakage(rho, sigma) > kLeakTol) return kInf;
  const Mat s = pinv_sqrt_psd(sigma);
  const double top = max_eigenvalue(hermitize(s * rho * s));
  if (top <= 0.0) return -kInf;
  return std::log2(top);
}

namespace {

struct Truncation {
  Mat sqrt_sigma;
  Eigh m;
};

double truncated_value(const Truncation& tr, double lambda, Mat* witness) {
  const double cap = std::exp2(lambda);
  const Mat ml = spectral_apply(tr.m, [cap](double x) { return std::clamp(x, 0.0, cap); });
  Mat r = hermitize(tr.sqrt_sigma * ml * tr.sqrt_sigma);
  const double t = r.trace().real();
  if (witness) *witness = r / t;
  return lambda - std::log2(t);
}

}  // namespace

SmoothResult dmax_smooth_upper(const Mat& rho, const Mat& sigma, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("smoothing parameter must lie in (0, 1)");
  const double top = dmax(rho, sigma);
  if (!std::isfinite(top)) throw ValidationError("dmax_smooth_upper: support of rho not contained in support of sigma");
  Truncation tr;
  tr.sqrt_sigma = sqrtm_psd(sigma);
  const Mat s = pinv_sqrt_psd(sigma);
  tr.m = psd_eigh(hermitize(s * rho * s));

  auto feasible = [&](double lambda, Mat* w) {
    Mat cand;
    truncated_value(tr, lambda, &cand);
    const double d = purified_from_fidelity(fidelity(cand, rho));
    if (w) *w = cand;
    return d <= eps;
  };
  double lo = top - 60.0;
  double hi = top;
  for (int it = 0; it < 64; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid, nullptr)) hi = mid;
    else lo = mid;
  }
  SmoothResult res;
  res.epsilon = eps;
  res.certified = Certified::upper_bound;
  res.value = std::min(top, truncated_value(tr, hi, &res.witness));
  res.distance = purified_from_fidelity(fidelity(res.witness, rho));
  return res;
}

namespace {

// max sum sqrt(p_i r_i) over 0 <= r_i <= cap_i, sum r = 1. Returns -1 when infeasible.
double water_fill(const RVec& p, const RVec& cap, RVec* r_out) {
  const Eigen::Index d = p.size();
  if (cap.sum() < 1.0 - 1e-15) return -1.0;
  std::vector<Eigen::Index> on;
  double cap_off = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (p[i] > 0) on.push_back(i);
    else cap_off += cap[i];
  }
  RVec r = RVec::Zero(d);
  double cap_on = 0.0;
  for (auto i : on) cap_on += cap[i];
  if (cap_on <= 1.0) {
    for (auto i : on) r[i] = cap[i];
    double rest = 1.0 - cap_on;
    for (Eigen::Index i = 0; i < d && rest > 0; ++i)
      if (p[i] <= 0) {
        r[i] = std::min(cap[i], rest);
        rest -= r[i];
      }
  } else {
    // r_i = min(cap_i, c p_i); ratios cap_i/p_i sorted ascending saturate first.
    std::sort(on.begin(), on.end(), [&](auto a, auto b) { return cap[a] * p[b] < cap[b] * p[a]; });
    double used = 0.0;
    double p_rest = 0.0;
    for (auto i : on) p_rest += p[i];
    std::size_t k = 0;
    double c = 0.0;
    for (; k < on.size(); ++k) {
      c = (1.0 - used) / p_rest;
      const auto i = on[k];
      if (c * p[i] <= cap[i]) break;
      used += cap[i];
      p_rest -= p[i];
    }
    for (std::size_t j = 0; j < on.size(); ++j) {
      const auto i = on[j];
      r[i] = j < k ? cap[i] : c * p[i];
    }
  }
  double f = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) f += std::sqrt(p[i] * r[i]);
  if (r_out) *r_out = r;
  return f;
}

}  // namespace

SmoothResult dmax_smooth_classical(const RVec& p, const RVec& q, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("smoothing parameter must lie in (0, 1)");
  if (p.size() != q.size()) throw ValidationError("distribution sizes differ");
  double top = -kInf;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] <= 0) continue;
    if (q[i] <= 0) throw ValidationError("dmax_smooth_classical: support of p not contained in support of q");
    top = std::max(top, std::log2(p[i] / q[i]));
  }
  const double need = std::sqrt(1.0 - eps * eps);
  auto fid = [&](double lambda, RVec* r) { return water_fill(p, std::exp2(lambda) * q, r); };
  double lo = std::min(0.0, top) - 60.0;
  double hi = top;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (fid(mid, nullptr) >= need) hi = mid;
    else lo = mid;
  }
  RVec r;
  const double f = fid(hi, &r);
  SmoothResult res;
  res.value = hi;
  res.epsilon = eps;
  res.certified = Certified::exact;
  res.witness = r.cast<cplx>().asDiagonal();
  res.distance = purified_from_fidelity(f);
  return res;
}

SmoothResult dmax_smooth_classical(const Mat& rho, const Mat& sigma, double eps) {
  auto off_diag = [](const Mat& m) {
    Mat o = m;
    o.diagonal().setZero();
    return o.cwiseAbs().maxCoeff();
  };
  if (off_diag(rho) > 1e-12 || off_diag(sigma) > 1e-12)
    throw ValidationError("dmax_smooth_classical requires diagonal inputs");
  return dmax_smooth_classical(RVec(rho.diagonal().real()), RVec(sigma.diagonal().real()), eps);
}

OptimalTest dh_eps(const Mat& rho, const Mat& sigma, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("type-I budget must lie in (0, 1)");
  const double target = 1.0 - eps;
  const double nr = std::max(std::abs(max_eigenvalue(rho)), 1e-300);
  const double ns = std::max(std::abs(max_eigenvalue(sigma)), 1e-300);
  const auto d = rho.rows();

  struct Split {
    Mat pos, zero;
    double f, g;
  };
  auto split = [&](double t) {
    const Eigh e = eigh(hermitize(rho - t * sigma));
    const double tol = 1e-11 * (nr + t * ns);
    RVec mp = RVec::Zero(d), mz = RVec::Zero(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (e.values[i] > tol) mp[i] = 1.0;
      else if (e.values[i] >= -tol) mz[i] = 1.0;
    }
    Split s;
    s.pos = e.vectors * mp.cast<cplx>().asDiagonal() * e.vectors.adjoint();
    s.zero = e.vectors * mz.cast<cplx>().asDiagonal() * e.vectors.adjoint();
    s.f = (s.pos * rho).trace().real();
    s.g = s.f + (s.zero * rho).trace().real();
    return s;
  };

  double lo = -60.0, hi = 60.0;
  Split cur = split(std::exp2(hi));
  double t = std::exp2(hi);
  bool found = false;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    t = std::exp2(mid);
    cur = split(t);
    if (cur.g < target) hi = mid;
    else if (cur.f > target) lo = mid;
    else {
      found = true;
      break;
    }
    if (hi - lo < 1e-15) break;
  }
  if (!found) {
    t = std::exp2(hi);
    cur = split(t);
  }
  Mat op;
  if (cur.f > target) {
    op = (target / cur.f) * cur.pos;
  } else {
    const double z = cur.g - cur.f;
    double gamma = z > 0 ? (target - cur.f) / z : 0.0;
    gamma = std::clamp(gamma, 0.0, 1.0);
    op = cur.pos + gamma * cur.zero;
  }
  op = hermitize(op);
  OptimalTest out;
  out.op = op;
  out.threshold = t;
  out.typeI = 1.0 - (op * rho).trace().real();
  out.typeII = std::max(0.0, (op * sigma).trace().real());
  if (out.typeII < 1e-15) {
    out.infinite = true;
    out.value = kDhCap;
  } else {
    out.value = std::min(kDhCap, -std::log2(out.typeII));
  }
  return out;
}

double von_neumann(const Mat& rho) {
  const Eigh e = psd_eigh(rho);
  double s = 0.0;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) s -= xlog2x(std::max(0.0, e.values[i]));
  return s;
}

double entropy_of(const DensityOperator& rho, const std::vector<std::string>& regs) {
  if (regs.empty()) return 0.0;
  return von_neumann(marginal(rho, regs).matrix());
}

namespace {

std::vector<std::string> join(std::initializer_list<const std::vector<std::string>*> parts) {
  std::vector<std::string> out;
  for (const auto* p : parts) out.insert(out.end(), p->begin(), p->end());
  return out;
}

}  // namespace

VnRates vn_rates(const DensityOperator& psi, const RatePartition& pt) {
  for (const auto* g : {&pt.R, &pt.A, &pt.B, &pt.C})
    for (const auto& nm : *g) require_register(psi.regs(), nm);
  VnRates r;
  r.S = von_neumann(psi.matrix());
  const double s_rb = entropy_of(psi, join({&pt.R, &pt.B}));
  const double s_rbc = entropy_of(psi, join({&pt.R, &pt.B, &pt.C}));
  const double s_bc = entropy_of(psi, join({&pt.B, &pt.C}));
  const double s_b = entropy_of(psi, pt.B);
  r.H_C_given_RB = s_rbc - s_rb;
  r.I_RC_given_B = s_rb + s_bc - s_b - s_rbc;
  r.I_AB = entropy_of(psi, pt.A) + s_b - entropy_of(psi, join({&pt.A, &pt.B}));
  return r;
}

double hmin_fixed_marginal(const DensityOperator& rho, const std::vector<std::string>& a,
                           const std::vector<std::string>& b) {
  std::vector<std::string> order = a;
  order.insert(order.end(), b.begin(), b.end());
  const DensityOperator ab = marginal(rho, order);
  const DensityOperator rb = marginal(rho, b);
  std::size_t da = 1;
  for (const auto& nm : a) da *= static_cast<std::size_t>(rho.regs()[require_register(rho.regs(), nm)].dim);
  const auto n = static_cast<Eigen::Index>(da);
  return -dmax(ab.matrix(), kron(Mat::Identity(n, n), rb.matrix()));
}

double phi_inv(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("phi_inv argument must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), eps);
}

double second_order_estimate(double D, double V, int n, double eps, Direction) {
  if (n < 1) throw ValidationError("second_order_estimate needs n >= 1");
  const double nn = static_cast<double>(n);
  if (V == 0.0) return nn * D;
  return nn * D + std::sqrt(nn * V) * phi_inv(eps);
}

}  // namespace qmc
