#include "qmc/convex_split.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "qmc/entropies.hpp"

namespace qmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// A -> Tr A log A - Tr A log S for a fixed reference S.
class RelToFixed {
 public:
  explicit RelToFixed(const Mat& s) {
    const Eigh e = psd_eigh(s);
    log_ = spectral_apply(e, [](double x) { return x > kSupportTol ? std::log2(x) : 0.0; });
    ker_ = spectral_apply(e, [](double x) { return x > kSupportTol ? 0.0 : 1.0; });
  }
  double operator()(const Mat& a) const {
    if ((ker_ * a).trace().real() > 1e-10) return kInf;
    const Eigh e = psd_eigh(a);
    double s = 0.0;
    for (Eigen::Index i = 0; i < e.values.size(); ++i) s += xlog2x(std::max(0.0, e.values[i]));
    return s - (a * log_).trace().real();
  }

 private:
  Mat log_;
  Mat ker_;
};

template <class F>
std::vector<double> map_terms(std::size_t count, Exec exec, F f) {
  std::vector<double> out(count, 0.0);
  const auto n = static_cast<long long>(count);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (long long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
  } else {
    for (long long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
  }
  return out;
}

double ordered_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

Mat block_average(const CqSource& src, const RVec& sigma, const int* str, int n) {
  const auto d = static_cast<Eigen::Index>(src.dim_p());
  Mat b = Mat::Zero(d, d);
  for (int j = 0; j < n; ++j) {
    const int c = str[j];
    if (src.p[c] > 0) b += (src.p[c] / sigma[c]) * src.rho[c];
  }
  return b / static_cast<double>(n);
}

Mat type_average(const CqSource& src, const RVec& sigma, const std::vector<int>& counts, int n) {
  const auto d = static_cast<Eigen::Index>(src.dim_p());
  Mat b = Mat::Zero(d, d);
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] > 0 && src.p[c] > 0) b += (counts[c] * src.p[c] / sigma[c]) * src.rho[c];
  return b / static_cast<double>(n);
}

double log_multinomial(const std::vector<int>& counts, int n, const RVec& w) {
  double l = std::lgamma(n + 1.0);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) continue;
    if (w[c] <= 0) return -kInf;
    l += -std::lgamma(counts[c] + 1.0) + counts[c] * std::log(w[c]);
  }
  return l;
}

void check_support(const CqSource& src, const RVec& sigma) {
  if (sigma.size() != src.p.size()) throw ValidationError("side distribution alphabet does not match Q");
  for (Eigen::Index c = 0; c < sigma.size(); ++c)
    if (src.p[c] > 0 && sigma[c] <= 0) throw ValidationError("supp(rho_Q) not contained in supp(sigma_Q)");
}

}  // namespace

Mat CqSource::marginal() const {
  const auto d = static_cast<Eigen::Index>(dim_p());
  Mat m = Mat::Zero(d, d);
  for (int c = 0; c < alphabet(); ++c)
    if (p[c] > 0) m += p[c] * rho[c];
  return m;
}

Mat CqSource::dense() const {
  const int q = alphabet();
  const int d = dim_p();
  Mat m = Mat::Zero(d * q, d * q);
  for (int c = 0; c < q; ++c) {
    if (p[c] <= 0) continue;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) m(a * q + c, b * q + c) = p[c] * rho[c](a, b);
  }
  return m;
}

CqSource CqSource::from_state(const CqState& s, const std::string& reg) {
  const int pos = require_register(s.classical_regs(), reg);
  const int q = s.classical_regs()[pos].dim;
  CqState only = cq_partial_trace(s, [&] {
    std::vector<std::string> other;
    for (const auto& r : s.classical_regs())
      if (r.name != reg) other.push_back(r.name);
    return other;
  }());
  CqSource src;
  src.p_regs = s.quantum_regs();
  src.p = RVec::Zero(q);
  const auto d = static_cast<Eigen::Index>(s.quantum_dim());
  src.rho.assign(q, Mat::Zero(d, d));
  for (const auto& [k, b] : only.blocks()) {
    src.p[k[0]] = b.weight;
    src.rho[k[0]] = b.rho;
  }
  return src;
}

RVec side_marginal(const LiftedFamily& fam) {
  RVec s(fam.target_size());
  for (int c = 0; c < fam.target_size(); ++c)
    s[c] = boost::rational_cast<double>(fam.marginal()[c]);
  return s;
}

double convex_split_k(const CqSource& src, const RVec& sigma) {
  check_support(src, sigma);
  const Mat rp = src.marginal();
  double k = -kInf;
  for (int c = 0; c < src.alphabet(); ++c) {
    if (src.p[c] <= 0) continue;
    k = std::max(k, std::log2(src.p[c] / sigma[c]) + dmax(src.rho[c], rp));
  }
  return k;
}

CqState build_tau(const CqSource& src, const LiftedFamily& fam) {
  const RVec sigma = side_marginal(fam);
  check_support(src, sigma);
  const int n = fam.n();
  RegList cregs;
  for (int j = 1; j <= n; ++j) cregs.push_back(classical("Q" + std::to_string(j), fam.target_size()));
  CqState tau(cregs, src.p_regs);
  const double w = 1.0 / static_cast<double>(fam.num_seeds());
  for (std::size_t s = 0; s < fam.num_seeds(); ++s) {
    const auto str = fam.string(s);
    Mat b = block_average(src, sigma, str.data(), n);
    const double g = b.trace().real();
    if (g <= 0) continue;
    tau.add(str, w * g, b / g);
  }
  return tau;
}

CqState build_tau_iid(const CqSource& src, const RVec& sigma, int n) {
  check_support(src, sigma);
  const int q = src.alphabet();
  double total = 1;
  for (int j = 0; j < n; ++j) total *= q;
  if (total * src.dim_p() > static_cast<double>(kDenseCap))
    throw BudgetExceeded("i.i.d. tau with q^n = " + std::to_string(static_cast<long long>(total)) + " strings");
  RegList cregs;
  for (int j = 1; j <= n; ++j) cregs.push_back(classical("Q" + std::to_string(j), q));
  CqState tau(cregs, src.p_regs);
  std::vector<int> str(n, 0);
  for (long long idx = 0; idx < static_cast<long long>(total); ++idx) {
    long long v = idx;
    double w = 1.0;
    for (int j = n; j-- > 0;) {
      str[j] = static_cast<int>(v % q);
      v /= q;
      w *= sigma[str[j]];
    }
    if (w <= 0) continue;
    Mat b = block_average(src, sigma, str.data(), n);
    const double g = b.trace().real();
    if (g > 0) tau.add(str, w * g, b / g);
  }
  return tau;
}

LemmaCheck verify_pairwise(const CqSource& src, const LiftedFamily& fam, Exec exec) {
  const RVec sigma = side_marginal(fam);
  LemmaCheck r;
  r.k = convex_split_k(src, sigma);
  const int n = fam.n();
  const RelToFixed rel(src.marginal());
  const double w = 1.0 / static_cast<double>(fam.num_seeds());
  const auto terms = map_terms(fam.num_seeds(), exec, [&](std::size_t s) {
    std::vector<int> str(n);
    for (int j = 0; j < n; ++j) str[j] = fam.value(s, j);
    return w * rel(block_average(src, sigma, str.data(), n));
  });
  r.D = ordered_sum(terms);
  r.blocks = fam.num_seeds();
  r.bound = std::log2(1.0 + std::exp2(r.k) / n);
  r.proof_bound = std::log2(1.0 + (std::exp2(r.k) - 1.0) / n);
  r.pass = r.D <= r.bound + 1e-9;
  return r;
}

std::uint64_t type_count(int q, int n) {
  // C(n + q - 1, q - 1)
  long double c = 1;
  for (int i = 1; i < q; ++i) c = c * (n + i) / i;
  return static_cast<std::uint64_t>(c + 0.5L);
}

std::vector<std::vector<int>> enumerate_types(int q, int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(q, 0);
  auto rec = [&](auto&& self, int pos, int left) -> void {
    if (pos == q - 1) {
      cur[pos] = left;
      out.push_back(cur);
      return;
    }
    for (int v = left; v >= 0; --v) {
      cur[pos] = v;
      self(self, pos + 1, left - v);
    }
  };
  rec(rec, 0, n);
  return out;
}

LemmaCheck verify_iid(const CqSource& src, const RVec& sigma, int n, Exec exec) {
  LemmaCheck r;
  r.k = convex_split_k(src, sigma);
  const auto types = enumerate_types(src.alphabet(), n);
  const RelToFixed rel(src.marginal());
  const auto terms = map_terms(types.size(), exec, [&](std::size_t i) {
    const double lw = log_multinomial(types[i], n, sigma);
    if (!std::isfinite(lw)) return 0.0;
    return std::exp(lw) * rel(type_average(src, sigma, types[i], n));
  });
  r.D = ordered_sum(terms);
  r.blocks = types.size();
  r.bound = std::log2(1.0 + std::exp2(r.k) / n);
  r.proof_bound = std::log2(1.0 + (std::exp2(r.k) - 1.0) / n);
  r.pass = r.D <= r.bound + 1e-9;
  return r;
}

CoveringResult covering_check(const CqSource& src, int n, int trials, std::uint64_t seed) {
  CoveringResult r;
  r.k = convex_split_k(src, src.p);
  r.bound = std::sqrt(std::exp2(r.k) / n);
  const Mat rp = src.marginal();
  const int q = src.alphabet();
  if (type_count(q, n) <= (std::uint64_t{1} << 16)) {
    const auto types = enumerate_types(q, n);
    double mean = 0.0;
    for (const auto& t : types) {
      const double lw = log_multinomial(t, n, src.p);
      if (!std::isfinite(lw)) continue;
      Mat avg = Mat::Zero(rp.rows(), rp.cols());
      for (int c = 0; c < q; ++c)
        if (t[c]) avg += static_cast<double>(t[c]) * src.rho[c];
      mean += std::exp(lw) * 2.0 * trace_distance(avg / static_cast<double>(n), rp);
    }
    r.mean = mean;
    r.exact = true;
    r.pass = r.mean <= r.bound + 1e-9;
    return r;
  }
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick(src.p.data(), src.p.data() + q);
  double s1 = 0.0, s2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    Mat avg = Mat::Zero(rp.rows(), rp.cols());
    for (int i = 0; i < n; ++i) avg += src.rho[pick(rng)];
    const double v = 2.0 * trace_distance(avg / static_cast<double>(n), rp);
    s1 += v;
    s2 += v * v;
  }
  r.mean = s1 / trials;
  const double var = trials > 1 ? std::max(0.0, (s2 - trials * r.mean * r.mean) / (trials - 1)) : 0.0;
  r.stderr_ = std::sqrt(var / trials);
  r.pass = r.mean <= r.bound + 3 * r.stderr_;
  return r;
}

double tau_purified_distance(const CqSource& src, const LiftedFamily& fam) {
  const RVec sigma = side_marginal(fam);
  check_support(src, sigma);
  const Mat sq = sqrtm_psd(src.marginal());
  const int n = fam.n();
  const double w = 1.0 / static_cast<double>(fam.num_seeds());
  const auto terms = map_terms(fam.num_seeds(), Exec::parallel, [&](std::size_t s) {
    std::vector<int> str(n);
    for (int j = 0; j < n; ++j) str[j] = fam.value(s, j);
    return w * trace_norm(sqrtm_psd(block_average(src, sigma, str.data(), n)) * sq);
  });
  return purified_from_fidelity(ordered_sum(terms));
}

CorollaryCheck corollary_check(const CqSource& src, double eps, double delta) {
  CorollaryCheck r;
  r.eps = eps;
  r.delta = delta;
  const int q = src.alphabet();
  const int d = src.dim_p();
  const RVec sigma = RVec::Constant(q, 1.0 / q);
  const Mat ref = kron(src.marginal(), Mat(sigma.cast<cplx>().asDiagonal()));
  const SmoothResult sm = dmax_smooth_upper(src.dense(), ref, eps);
  r.witness_distance = sm.distance;
  CqSource w;
  w.p_regs = src.p_regs;
  w.p = RVec::Zero(q);
  w.rho.assign(q, Mat::Zero(d, d));
  for (int c = 0; c < q; ++c) {
    Mat blk(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) blk(a, b) = sm.witness(a * q + c, b * q + c);
    const double t = blk.trace().real();
    w.p[c] = t;
    if (t > 0) w.rho[c] = blk / t;
  }
  r.k_witness = convex_split_k(w, sigma);
  r.n = static_cast<int>(std::ceil(std::exp2(r.k_witness) / (delta * delta) - 1e-12));
  r.n = std::max(r.n, 1);
  auto fam = build_family(static_cast<std::uint64_t>(q), r.n);
  std::vector<int> id(q);
  std::iota(id.begin(), id.end(), 0);
  r.P = tau_purified_distance(src, lift_marginal(fam, id, q));
  r.bound = 2 * eps + delta;
  r.pass = r.P <= r.bound + 1e-9;
  return r;
}

Fact9Check fact9_dense(const Mat& rho_pq, int dp, int dq, const Mat& sigma_q, int n) {
  double total = dp;
  for (int j = 0; j < n; ++j) total *= dq;
  if (total > 1024) throw BudgetExceeded("dense convex split limited to total dimension 1024");
  RegList regs{quantum("P", dp)};
  for (int j = 1; j <= n; ++j) regs.push_back(quantum("Q" + std::to_string(j), dq));
  const Mat rp = partial_trace_matrix(rho_pq, {quantum("P", dp), quantum("Q", dq)}, {0});
  const auto D = static_cast<Eigen::Index>(total);
  Mat tau = Mat::Zero(D, D);
  for (int j = 1; j <= n; ++j) {
    Mat m = rho_pq;
    RegList order{quantum("P", dp), quantum("Q" + std::to_string(j), dq)};
    for (int i = 1; i <= n; ++i) {
      if (i == j) continue;
      m = kron(m, sigma_q);
      order.push_back(quantum("Q" + std::to_string(i), dq));
    }
    std::vector<std::string> names = names_of(regs);
    tau += permute(DensityOperator(m, order, false), names).matrix();
  }
  tau /= static_cast<double>(n);
  Mat ref = rp;
  for (int j = 0; j < n; ++j) ref = kron(ref, sigma_q);
  Fact9Check r;
  const double k = dmax(rho_pq, kron(rp, sigma_q));
  r.D = rel_entropy(tau, ref);
  r.bound = std::log2(1.0 + std::exp2(k) / n);
  r.pass = r.D <= r.bound + 1e-9;
  return r;
}

}  // namespace qmc
