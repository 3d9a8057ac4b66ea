#include "qmc/compression.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "compression_engine.hpp"

namespace qmc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int merged_dim(const StateVector& psi, const std::vector<std::string>& names) {
  int d = 1;
  for (const auto& nm : names) d *= psi.regs()[require_register(psi.regs(), nm)].dim;
  return d;
}

Mat diag_of(const RVec& v) { return v.cast<cplx>().asDiagonal(); }

struct Resolved {
  CoherentMeasurement cm;
  RVec sigma;
  bool uniform = true;
};

Resolved resolve(const CompressionScenario& sc) {
  Resolved r;
  CoherentMeasurement cm = coherent_measure(sc.psi, sc.R, sc.A, sc.B, sc.povm);
  const int nc = cm.alphabet();
  if (!sc.sigma) {
    const int qc = embed_alphabet(nc).q;
    r.cm = pad_alphabet(cm, qc);
    r.sigma = RVec::Constant(qc, 1.0 / qc);
  } else {
    const RVec& s = *sc.sigma;
    if (s.size() < nc) throw ValidationError("sigma_C is shorter than the POVM alphabet");
    if (s.minCoeff() < 0.0 || std::abs(s.sum() - 1.0) > 1e-12)
      throw ValidationError("sigma_C must be a probability vector");
    r.cm = pad_alphabet(cm, static_cast<int>(s.size()));
    r.sigma = s;
    r.uniform = false;
  }
  for (int c = 0; c < r.cm.alphabet(); ++c)
    if (r.cm.p[c] > 1e-14 && r.sigma[c] <= 0.0)
      throw ValidationError("support violation: p(" + std::to_string(c) + ") > 0 but sigma_C vanishes there");
  return r;
}

double shannon(const RVec& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) h -= xlog2x(p[i]);
  return h;
}

// Value at position `pos` after Alice's (or Bob's) swaps: block j1 onto
// positions 0..b-1, then local position j2 onto 0 (j2 < 0: no second swap).
int after_block(const std::vector<int>& s, int j1, int b, int pos) {
  if (j1 > 0) {
    if (pos < b) return s[j1 * b + pos];
    if (pos >= j1 * b && pos < j1 * b + b) return s[pos - j1 * b];
  }
  return s[pos];
}

int first_after_swaps(const std::vector<int>& s, int j1, int b, int j2) {
  return after_block(s, j1, b, j2 >= 0 ? j2 : 0);
}

int second_after_swaps(const std::vector<int>& s, int j1, int b, int j2) {
  return after_block(s, j1, b, j2 == 1 ? 0 : 1);
}

double log2_pow2_ceil_ratio(int n, int b) {
  int m = 0;
  const long long blocks = (n + b - 1) / b;
  while ((1LL << m) < blocks) ++m;
  return m;
}

}  // namespace

void Povm::validate(double tol) const {
  if (elements.empty()) throw ValidationError("POVM has no elements");
  const auto d = elements[0].rows();
  Mat sum = Mat::Zero(d, d);
  for (const auto& e : elements) {
    if (e.rows() != d || e.cols() != d) throw ValidationError("POVM elements must share one square shape");
    if (!is_hermitian(e, tol)) throw ValidationError("POVM element is not Hermitian");
    if (min_eigenvalue(e) < -tol) throw ValidationError("POVM element is not PSD");
    sum += e;
  }
  const Mat diff = sum - Mat::Identity(d, d);
  if (std::max(std::abs(min_eigenvalue(diff)), std::abs(max_eigenvalue(diff))) > tol)
    throw ValidationError("POVM elements do not sum to the identity");
}

RegList CoherentMeasurement::rab_regs() const {
  return {quantum("R", dR), quantum("A", dA), quantum("B", dB)};
}

CqState CoherentMeasurement::state() const {
  CqState s({classical("C", alphabet()), classical("Cbar", alphabet())}, rab_regs());
  for (int c = 0; c < alphabet(); ++c)
    if (p[c] > 1e-14) s.add({c, c}, p[c], psi[c] * psi[c].adjoint());
  return s;
}

namespace detail {

Mat rab_to_matrix(const Vec& v, int dR, int dA, int dB) {
  Mat m(dR * dB, dA);
  for (int r = 0; r < dR; ++r)
    for (int a = 0; a < dA; ++a)
      for (int b = 0; b < dB; ++b) m(r * dB + b, a) = v[(r * dA + a) * dB + b];
  return m;
}

Vec matrix_to_rab(const Mat& m, int dR, int dA, int dB) {
  Vec v(dR * dA * dB);
  for (int r = 0; r < dR; ++r)
    for (int a = 0; a < dA; ++a)
      for (int b = 0; b < dB; ++b) v[(r * dA + a) * dB + b] = m(r * dB + b, a);
  return v;
}

}  // namespace detail

Mat CoherentMeasurement::rb() const {
  const int d = dR * dB;
  Mat out = Mat::Zero(d, d);
  for (int c = 0; c < alphabet(); ++c) {
    if (p[c] <= 1e-14) continue;
    const Mat m = detail::rab_to_matrix(psi[c], dR, dA, dB);
    out += p[c] * m * m.adjoint();
  }
  return out;
}

Mat CoherentMeasurement::rbc() const {
  const int d = dR * dB;
  const int q = alphabet();
  Mat out = Mat::Zero(d * q, d * q);
  for (int c = 0; c < q; ++c) {
    if (p[c] <= 1e-14) continue;
    const Mat m = detail::rab_to_matrix(psi[c], dR, dA, dB);
    const Mat blk = p[c] * m * m.adjoint();
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out(i * q + c, j * q + c) = blk(i, j);
  }
  return out;
}

Mat CoherentMeasurement::cb() const {
  const int q = alphabet();
  Mat out = Mat::Zero(q * dB, q * dB);
  for (int c = 0; c < q; ++c) {
    if (p[c] <= 1e-14) continue;
    const Mat m = detail::rab_to_matrix(psi[c], dR, dA, dB);
    const Mat rbm = m * m.adjoint();
    for (int r = 0; r < dR; ++r) out.block(c * dB, c * dB, dB, dB) += p[c] * rbm.block(r * dB, r * dB, dB, dB);
  }
  return out;
}

Mat CoherentMeasurement::b() const {
  const int q = alphabet();
  const Mat full = cb();
  Mat out = Mat::Zero(dB, dB);
  for (int c = 0; c < q; ++c) out += full.block(c * dB, c * dB, dB, dB);
  return out;
}

CoherentMeasurement coherent_measure(const StateVector& psi, const std::vector<std::string>& R,
                                     const std::vector<std::string>& A, const std::vector<std::string>& B,
                                     const Povm& povm) {
  povm.validate();
  std::vector<std::string> order = R;
  order.insert(order.end(), A.begin(), A.end());
  order.insert(order.end(), B.begin(), B.end());
  if (order.size() != psi.regs().size()) throw ValidationError("R, A, B must partition the input registers");
  const StateVector v = permute(psi, order);
  CoherentMeasurement cm;
  cm.dR = merged_dim(psi, R);
  cm.dA = merged_dim(psi, A);
  cm.dB = merged_dim(psi, B);
  if (povm.dim() != cm.dA) throw ValidationError("POVM dimension does not match register A");
  const int q = povm.outcomes();
  cm.p = RVec::Zero(q);
  cm.psi.assign(q, Vec::Zero(cm.dim_rab()));
  const Mat m = detail::rab_to_matrix(v.amps(), cm.dR, cm.dA, cm.dB);
  for (int c = 0; c < q; ++c) {
    const Mat k = sqrtm_psd(povm.elements[c]);
    const Mat post = m * k.transpose();  // (I_RB (x) K) acting on the A index
    const double pc = post.squaredNorm();
    if (pc < 1e-14) continue;
    cm.p[c] = pc;
    cm.psi[c] = detail::matrix_to_rab(post / std::sqrt(pc), cm.dR, cm.dA, cm.dB);
  }
  return cm;
}

CoherentMeasurement pad_alphabet(const CoherentMeasurement& cm, int size) {
  if (size < cm.alphabet()) throw ValidationError("cannot shrink the outcome alphabet");
  CoherentMeasurement out = cm;
  out.p = RVec::Zero(size);
  out.p.head(cm.alphabet()) = cm.p;
  out.psi.resize(size, Vec::Zero(cm.dim_rab()));
  return out;
}

UhlmannResult uhlmann_branch_isometry(const Mat& S, const Mat& T) {
  if (S.rows() != T.rows()) throw ValidationError("Uhlmann: purifications act on different systems");
  const auto dx = S.cols();
  auto dy = T.cols();
  Eigen::JacobiSVD<Mat> ss(S, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smax = ss.singularValues().size() ? ss.singularValues()[0] : 0.0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < ss.singularValues().size(); ++i)
    if (ss.singularValues()[i] > 1e-12 * std::max(1.0, smax)) ++r;
  UhlmannResult res;
  const Eigen::Index dyp = std::max(dy, dx);
  res.padded_dim = static_cast<int>(dyp);
  Mat Tp = Mat::Zero(T.rows(), dyp);
  Tp.leftCols(dy) = T;
  dy = dyp;

  const Mat W = ss.matrixV();                  // columns span X; first r span the support
  const Mat A = S * W.leftCols(r);             // coordinates on the support
  const Mat K = Tp.adjoint() * A;              // dy x r
  Eigen::JacobiSVD<Mat> ks(K, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat Ur = ks.matrixU().leftCols(r);
  const Mat Vr = (Ur * ks.matrixV().adjoint()).conjugate();  // coordinates -> Y
  res.overlap = ks.singularValues().sum();

  // Extend to all of X: the complement of the support goes to the part of Y
  // orthogonal to range(Vr).
  const Eigen::Index rest = dx - r;
  Mat V = Mat::Zero(dy, dx);
  // x -> coordinates: conj(W)^dag-like map; S rows live in span(conj(W_r)).
  const Mat Bsupp = W.leftCols(r).conjugate();
  V = Vr * Bsupp.adjoint();
  if (rest > 0) {
    Mat comp = Mat::Identity(dy, dy) - Vr * Vr.adjoint();
    Eigen::JacobiSVD<Mat> cs(comp, Eigen::ComputeFullU);
    const Mat Bc = W.rightCols(rest).conjugate();
    V += cs.matrixU().leftCols(rest) * Bc.adjoint();
  }
  res.V = V;
  return res;
}

DecoderPlan make_decoder(const CoherentMeasurement& cm, const RVec& sigma, double eps2) {
  const int q = cm.alphabet();
  const int dB = cm.dB;
  if (sigma.size() != q) throw ValidationError("sigma_C has the wrong alphabet size");
  const Mat rho = cm.cb();
  const Mat psiB = cm.b();
  const Mat ref = kron(diag_of(sigma), psiB);
  const OptimalTest t = dh_eps(rho, ref, eps2);
  DecoderPlan plan;
  plan.eps2 = eps2;
  plan.blocks.resize(q);
  for (int c = 0; c < q; ++c) plan.blocks[c] = hermitize(t.op.block(c * dB, c * dB, dB, dB));
  double acc = 0.0, t2 = 0.0;
  for (int c = 0; c < q; ++c) {
    acc += (plan.blocks[c] * rho.block(c * dB, c * dB, dB, dB)).trace().real();
    t2 += sigma[c] * (plan.blocks[c] * psiB).trace().real();
  }
  plan.typeI = std::max(0.0, 1.0 - acc);
  plan.typeII = std::max(0.0, t2);
  plan.dh = plan.typeII > 0.0 ? std::min(kDhCap, -std::log2(plan.typeII)) : kDhCap;
  return plan;
}

std::vector<Mat> decoder_kraus(const DecoderPlan& plan, const std::vector<int>& cs) {
  const auto dB = plan.blocks.at(0).rows();
  Mat pi = Mat::Zero(dB, dB);
  for (int c : cs) pi += plan.blocks.at(c);
  pi = hermitize(pi);
  const Mat ih = pinv_sqrt_psd(pi);
  std::vector<Mat> k;
  k.reserve(cs.size() + 1);
  k.push_back(Mat::Identity(dB, dB) - support_projector(pi));
  for (int c : cs) k.push_back(sqrtm_psd(hermitize(ih * plan.blocks[c] * ih)));
  return k;
}

namespace detail {

LiftedFamily family_for(const RVec& sigma, bool uniform, int n) {
  const int qc = static_cast<int>(sigma.size());
  if (uniform) {
    std::vector<int> id(qc);
    std::iota(id.begin(), id.end(), 0);
    return lift_marginal(build_family(qc, n), id, qc);
  }
  for (std::uint64_t Q = 2; Q <= (1u << 16); Q *= 2) {
    bool ok = true;
    std::vector<Rational> r;
    for (int c = 0; c < qc && ok; ++c) {
      const double x = sigma[c] * static_cast<double>(Q);
      const double k = std::round(x);
      if (std::abs(x - k) > 1e-9) ok = false;
      r.emplace_back(static_cast<std::int64_t>(k), static_cast<std::int64_t>(Q));
    }
    if (!ok) continue;
    return lift_marginal(build_family(Q, n), lift_map_for(r, Q), qc);
  }
  throw ValidationError("sigma_C is not a dyadic distribution with denominator <= 2^16");
}

namespace {

std::uint64_t base_alphabet_for(const RVec& sigma, bool uniform) {
  if (uniform) return static_cast<std::uint64_t>(sigma.size());
  for (std::uint64_t Q = 2; Q <= (1u << 16); Q *= 2) {
    bool ok = true;
    for (Eigen::Index c = 0; c < sigma.size() && ok; ++c) {
      const double x = sigma[c] * static_cast<double>(Q);
      if (std::abs(x - std::round(x)) > 1e-9) ok = false;
    }
    if (ok) return Q;
  }
  throw ValidationError("sigma_C is not a dyadic distribution with denominator <= 2^16");
}

}  // namespace

Engine::Engine(const CompressionScenario& sc, const Params& params) {
  Resolved r = resolve(sc);
  cm = r.cm;
  sigma = r.sigma;
  qc = cm.alphabet();
  n = params.n;
  b = params.b;
  if (n <= 0 || b <= 0)
    throw BudgetExceeded("theorem-mode n = " + std::to_string(params.n_theorem) + ", b = " +
                         std::to_string(params.b_theorem) + " cannot be simulated; supply n and b overrides");
  if (n < 2) throw ValidationError("n must be at least 2");
  const std::uint64_t base = base_alphabet_for(sigma, r.uniform);
  const int t = family_degree(base, n);
  const double seeds = std::pow(static_cast<double>(base), t + 1);
  const double product = seeds * n * cm.dim_rab();
  if (product > kProtocolBudget)
    throw BudgetExceeded("q^(t+1) * n * dim(RAB) = " + std::to_string(product) + " exceeds 2^26");
  fam = family_for(sigma, r.uniform, n);
  Q = static_cast<int>(fam->base().q());
  dRB = cm.dR * cm.dB;
  sigma_entropy = shannon(sigma);

  psi_m.resize(qc);
  Mat s = Mat::Zero(dRB, cm.dA * qc);
  for (int c = 0; c < qc; ++c) {
    psi_m[c] = rab_to_matrix(cm.psi[c], cm.dR, cm.dA, cm.dB);
    for (int a = 0; a < cm.dA; ++a) s.col(a * qc + c) = std::sqrt(cm.p[c]) * psi_m[c].col(a);
  }
  Eigen::JacobiSVD<Mat> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smax = svd.singularValues()[0];
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > 1e-12 * std::max(1.0, smax)) ++rank;
  src = s * svd.matrixV().leftCols(rank);
  Jd = n;
  if (static_cast<Eigen::Index>(cm.dA) * n < rank) Jd = static_cast<int>((rank + cm.dA - 1) / cm.dA);
  plan = make_decoder(cm, sigma, sc.eps * sc.eps);
}

BranchOut Engine::run(std::size_t sA, std::size_t sB, bool ideal, bool keep_vectors) const {
  BranchOut out;
  const std::vector<int> strA = fam->string(sA);
  const std::vector<int> strB = fam->string(sB);
  const int dA = cm.dA;
  const int dB = cm.dB;

  double g = 0.0;
  for (int j = 0; j < n; ++j) g += cm.p[strA[j]] / sigma[strA[j]];
  g /= n;
  out.gamma = g;
  Mat T = Mat::Zero(dRB, dA * Jd);
  if (g > 0.0) {
    for (int j = 0; j < n; ++j) {
      const int c = strA[j];
      if (cm.p[c] <= 0.0) continue;
      const double coef = std::sqrt(cm.p[c] / (n * sigma[c] * g));
      for (int a = 0; a < dA; ++a) T.col(a * Jd + j) = coef * psi_m[c].col(a);
    }
  }
  out.theta_norm_error = g > 0.0 ? std::abs(T.squaredNorm() - 1.0) : 0.0;

  Mat E;
  if (ideal) {
    E = T;
    out.overlap = 1.0;
    out.fid_marginal = 1.0;
  } else {
    const Mat K = T.adjoint() * src;
    Eigen::JacobiSVD<Mat> ks(K, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Mat Vr = (ks.matrixU() * ks.matrixV().adjoint()).conjugate();
    E = src * Vr.transpose();
    out.overlap = ks.singularValues().sum();
    out.fid_marginal = fidelity(Mat(src * src.adjoint()), Mat(T * T.adjoint()));
  }

  std::vector<std::vector<Mat>> kraus(static_cast<std::size_t>((n + b - 1) / b));
  Mat Ej(dRB, dA), v(dRB, dA);
  for (int j = 0; j < Jd; ++j) {
    for (int a = 0; a < dA; ++a) Ej.col(a) = E.col(a * Jd + j);
    const double pj = Ej.squaredNorm();
    if (pj <= 1e-300) continue;
    if (j >= n) {
      out.pad += pj;
      continue;
    }
    const int j1 = j / b;
    const int j2 = j % b;
    auto& ks = kraus[static_cast<std::size_t>(j1)];
    if (ks.empty()) {
      std::vector<int> cs(strB.begin() + j1 * b, strB.begin() + j1 * b + b);
      ks = decoder_kraus(plan, cs);
      Mat sum = Mat::Zero(dB, dB);
      for (const auto& k : ks) sum += k.adjoint() * k;
      const Mat diff = sum - Mat::Identity(dB, dB);
      out.completeness = std::max(out.completeness, diff.cwiseAbs().maxCoeff());
    }
    const int c1 = first_after_swaps(strA, j1, b, j2);
    const int c2 = second_after_swaps(strA, j1, b, j2);
    for (int o = 0; o <= b; ++o) {
      for (int r = 0; r < cm.dR; ++r) v.middleRows(r * dB, dB) = ks[o] * Ej.middleRows(r * dB, dB);
      const double po = v.squaredNorm();
      if (po <= 1e-300) continue;
      Rec rec;
      rec.c1 = c1;
      rec.c2 = c2;
      rec.c1p = first_after_swaps(strB, j1, b, o - 1);
      rec.c2p = second_after_swaps(strB, j1, b, o - 1);
      rec.j = j;
      rec.jp = o > 0 ? j1 * b + o - 1 : n;
      rec.prob = po;
      rec.correct = rec.jp == j;
      rec.match = rec.c1 == rec.c1p && rec.c2 == rec.c2p && rec.correct;
      rec.ov = 0.0;
      if (rec.c1 == rec.c1p && cm.p[c1] > 0.0) rec.ov = std::norm((psi_m[c1].conjugate().cwiseProduct(v)).sum());
      out.recs.push_back(rec);
      if (keep_vectors) out.vecs.push_back(matrix_to_rab(v, cm.dR, cm.dA, cm.dB));
    }
  }
  return out;
}

}  // namespace detail

Params choose_params(const CompressionScenario& sc) {
  const bool desk = sc.n.has_value() || sc.b.has_value();
  if (!(sc.eps > 0.0 && sc.eps < 1.0)) throw ValidationError("eps must lie in (0, 1)");
  if (!desk && !(sc.eps < 0.1)) throw ValidationError("theorem-mode parameters need eps in (0, 1/10)");
  if (sc.n && *sc.n < 2) throw ValidationError("n override must be at least 2");
  if (sc.b && *sc.b < 1) throw ValidationError("b override must be positive");
  const Resolved r = resolve(sc);
  Params p;
  p.desk_scale = desk;
  const Mat rb = r.cm.rb();
  p.k = dmax_smooth_upper(r.cm.rbc(), kron(rb, diag_of(r.sigma)), sc.eps).value;
  p.k_prime_upper = p.k + std::log2(8.0 / std::pow(sc.eps, 3));
  p.dh = make_decoder(r.cm, r.sigma, sc.eps * sc.eps).dh;
  p.n_theorem = std::ceil(8.0 * std::exp2(p.k) / std::pow(sc.eps, 5));
  p.b_theorem = std::max(1.0, std::ceil(sc.eps * sc.eps * std::exp2(p.dh)));
  constexpr double kIntCap = static_cast<double>(1 << 30);
  p.n = sc.n ? *sc.n : (p.n_theorem <= kIntCap ? static_cast<int>(p.n_theorem) : 0);
  p.b = sc.b ? *sc.b : (p.b_theorem <= kIntCap ? static_cast<int>(p.b_theorem) : 0);
  if (p.n > 0 && p.b > 0) {
    if (sc.n && sc.b && p.b > p.n) throw ValidationError("b must not exceed n");
    if (p.n % p.b != 0) {
      p.n = (p.n / p.b + 1) * p.b;
      p.n_rounded = true;
    }
  }
  return p;
}

CompressionReport run_protocol(const CompressionScenario& sc, const ProtocolOptions& opt) {
  CompressionReport rep;
  auto t0 = Clock::now();
  rep.params = choose_params(sc);
  const Params& P = rep.params;
  const Resolved res = resolve(sc);
  rep.qc = res.cm.alphabet();
  const double eps = sc.eps;
  const double log8e5 = std::log2(8.0 / std::pow(eps, 5));
  const double n_eff = P.n > 0 ? P.n : P.n_theorem;
  const double b_eff = P.b > 0 ? P.b : P.b_theorem;

  // Randomness accounting.
  double dmax_id = 0.0;
  if (res.uniform) dmax_id = P.k - std::log2(rep.qc);
  else {
    const Mat rb = res.cm.rb();
    dmax_id = dmax_smooth_upper(res.cm.rbc(), kron(rb, Mat::Identity(rep.qc, rep.qc)), eps).value;
  }
  rep.m = P.n > 0 && P.b > 0 ? static_cast<int>(log2_pow2_ceil_ratio(P.n, P.b))
                             : static_cast<int>(std::ceil(std::log2(n_eff / b_eff)));
  rep.m_bound_printed = P.k - P.dh + 7.0 * std::log2(1.0 / eps);
  rep.m_bound_corrected = rep.m_bound_printed + 3.0 + std::log2(1.0 + std::pow(eps, 5) / (8.0 * std::exp2(P.k))) +
                          std::log2(1.0 + b_eff / n_eff) + 1.0;
  rep.r1_bound_printed = 2.0 * std::log2(rep.qc) + log8e5;
  rep.r2_printed = 2.0 * std::log2(rep.qc) + dmax_id + log8e5;
  rep.timings["params"] = seconds_since(t0);

  auto finish_accounting = [&](int Q, int t) {
    rep.q_base = Q;
    rep.t = t;
    rep.r1 = (t + 1) * std::log2(Q);
    rep.r1_bound_corrected = std::log2(n_eff) + 2.0 * std::log2(Q);
    if (!P.desk_scale)
      rep.theorem_ok = rep.m <= rep.m_bound_corrected + 1e-9 && rep.r1 <= rep.r1_bound_corrected + 1e-9 &&
                       rep.r2_proof >= rep.r2_printed - 1e-9;
  };
  rep.r2_proof = std::log2(n_eff) + shannon(res.sigma);

  if (opt.params_only) {
    int Q = res.uniform ? rep.qc : 2;
    if (!res.uniform) {
      for (std::uint64_t q = 2; q <= (1u << 16); q *= 2) {
        bool ok = true;
        for (Eigen::Index c = 0; c < res.sigma.size() && ok; ++c) {
          const double x = res.sigma[c] * static_cast<double>(q);
          if (std::abs(x - std::round(x)) > 1e-9) ok = false;
        }
        if (ok) {
          Q = static_cast<int>(q);
          break;
        }
      }
    }
    const int t = static_cast<int>(std::ceil(std::log2(n_eff) / std::log2(Q) - 1e-12));
    rep.seeds = 0;
    finish_accounting(Q, std::max(t, 0));
    rep.net_consumed = rep.r1 - rep.r2_proof;
    return rep;
  }

  t0 = Clock::now();
  const detail::Engine eng(sc, P);
  rep.seeds = eng.fam->num_seeds();
  finish_accounting(eng.Q, eng.fam->base().t());
  rep.net_consumed = rep.r1 - rep.r2_proof;
  rep.timings["setup"] = seconds_since(t0);

  t0 = Clock::now();
  const std::size_t S = rep.seeds;
  std::vector<detail::BranchOut> real(S), ideal(S);
  const auto count = static_cast<long long>(S);
  if (opt.exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (long long s = 0; s < count; ++s) {
      const auto u = static_cast<std::size_t>(s);
      real[u] = eng.run(u, u, false, opt.keep_final_state);
      ideal[u] = eng.run(u, u, true, false);
    }
  } else {
    for (long long s = 0; s < count; ++s) {
      const auto u = static_cast<std::size_t>(s);
      real[u] = eng.run(u, u, false, opt.keep_final_state);
      ideal[u] = eng.run(u, u, true, false);
    }
  }
  rep.timings["branches"] = seconds_since(t0);

  t0 = Clock::now();
  const double w = 1.0 / static_cast<double>(S);
  const int n = eng.n;
  auto key_of = [&](const detail::Rec& r) { return (static_cast<long long>(r.c1) * rep.qc + r.c2) * n + r.j; };
  std::map<long long, double> acc_real, acc_ideal;
  std::vector<double> target(rep.qc, 0.0);
  double f_enc = 0.0, f_marg = 0.0, gsum = 0.0, theta_err = 0.0, correct_real = 0.0, correct_ideal = 0.0;
  double pad = 0.0, compl_err = 0.0;
  std::optional<CqState> fs;
  if (opt.keep_final_state) {
    fs.emplace(RegList{classical("C1", rep.qc), classical("C1p", rep.qc), classical("C2", rep.qc),
                       classical("C2p", rep.qc), classical("J", eng.Jd), classical("Jp", n + 1)},
               eng.cm.rab_regs());
  }
  for (std::size_t s = 0; s < S; ++s) {
    const auto& br = real[s];
    const auto& bi = ideal[s];
    f_enc += w * std::sqrt(br.gamma) * br.overlap;
    f_marg += w * std::sqrt(br.gamma) * br.fid_marginal;
    gsum += w * br.gamma;
    theta_err = std::max(theta_err, br.theta_norm_error);
    pad += w * br.pad;
    compl_err = std::max({compl_err, br.completeness, bi.completeness});
    for (std::size_t i = 0; i < br.recs.size(); ++i) {
      const auto& r = br.recs[i];
      if (r.correct) correct_real += w * r.prob;
      if (r.match) acc_real[key_of(r)] += w * r.ov;
      if (r.c1 == r.c1p) target[r.c1] += w * r.ov;
      if (fs) fs->add_unnormalized({r.c1, r.c1p, r.c2, r.c2p, r.j, r.jp}, w * br.vecs[i] * br.vecs[i].adjoint());
    }
    const double wi = w * bi.gamma;
    for (const auto& r : bi.recs) {
      if (r.correct) correct_ideal += wi * r.prob;
      if (r.match) acc_ideal[key_of(r)] += wi * r.ov;
    }
  }
  auto final_fid = [&](const std::map<long long, double>& acc) {
    double f = 0.0;
    for (const auto& [k, a] : acc) {
      const int j = static_cast<int>(k % n);
      const int c2 = static_cast<int>((k / n) % rep.qc);
      const int c1 = static_cast<int>(k / n / rep.qc);
      (void)j;
      f += std::sqrt(std::max(0.0, eng.ideal_weight(c1, c2) * a));
    }
    return std::min(1.0, f);
  };
  double ft = 0.0;
  for (int c = 0; c < rep.qc; ++c) ft += std::sqrt(std::max(0.0, eng.cm.p[c] * target[c]));

  rep.d_enc = purified_from_fidelity(std::min(1.0, f_enc));
  rep.d_enc_marginal = purified_from_fidelity(std::min(1.0, f_marg));
  rep.gamma_sum = gsum;
  rep.theta_norm_error = theta_err;
  rep.pad_mass = pad;
  rep.decoder_completeness = compl_err;
  rep.f_real = std::clamp(1.0 - correct_real, 0.0, 1.0);
  rep.f_ideal = std::clamp(1.0 - correct_ideal, 0.0, 1.0);
  rep.hn_bound = 2.0 * eng.plan.typeI + 4.0 * (eng.b - 1) * eng.plan.typeII;
  rep.claim_distance = purified_from_fidelity(final_fid(acc_ideal));
  rep.claim_bound = std::sqrt(std::max(0.0, 1.0 - std::pow(1.0 - rep.f_ideal, 3)));
  rep.final_distance = purified_from_fidelity(final_fid(acc_real));
  rep.target_distance = purified_from_fidelity(std::min(1.0, ft));
  rep.chain_bound = rep.d_enc + rep.claim_bound;

  // Near P = 0 the square root amplifies rounding in F, so agreement in F
  // to 1e-12 also counts.
  rep.enc_ok = std::abs(rep.d_enc - rep.d_enc_marginal) <= 1e-8 || std::abs(f_enc - f_marg) <= 1e-12;
  rep.gamma_ok = std::abs(gsum - 1.0) <= 1e-10 && theta_err <= 1e-12;
  rep.hn_ok = rep.f_ideal <= rep.hn_bound + 1e-8;
  rep.chain_ok = rep.final_distance <= rep.chain_bound + 1e-6;
  rep.simulated = true;
  if (fs) rep.final_state = std::move(fs);
  rep.timings["merge"] = seconds_since(t0);
  return rep;
}

ConverseEstimate converse_estimate(const CoherentMeasurement& cm, double eps, double delta,
                                   const std::vector<Mat>& candidates) {
  const int dR = cm.dR, dB = cm.dB, q = cm.alphabet();
  const Mat rbc = cm.rbc();
  const Mat rb = cm.rb();
  Mat r = Mat::Zero(dR, dR);
  for (int i = 0; i < dR; ++i)
    for (int j = 0; j < dR; ++j)
      for (int b = 0; b < dB; ++b) r(i, j) += rb(i * dB + b, j * dB + b);
  const Mat psiB = cm.b();
  std::vector<Mat> cands = candidates;
  if (cands.empty()) {
    Mat bc = Mat::Zero(dB * q, dB * q);
    const Mat cbm = cm.cb();
    for (int c = 0; c < q; ++c)
      for (int i = 0; i < dB; ++i)
        for (int j = 0; j < dB; ++j) bc(i * q + c, j * q + c) = cbm(c * dB + i, c * dB + j);
    cands.push_back(bc);
    cands.push_back(kron(psiB, diag_of(cm.p)));
  }
  ConverseEstimate out;
  const double second = dmax_smooth_upper(rb, kron(r, psiB), delta).value;
  out.estimate = std::numeric_limits<double>::infinity();
  for (const auto& s : cands) {
    if (s.rows() != dB * q) throw ValidationError("converse candidate must act on B C");
    const double first = dmax_smooth_upper(rbc, kron(r, s), eps + delta).value;
    out.per_candidate.push_back(first - second);
    out.estimate = std::min(out.estimate, first - second);
  }
  return out;
}

PgmResult pretty_good_measure(const RVec& lambda, const std::vector<Mat>& rho, const std::vector<Mat>& P) {
  if (rho.size() != P.size() || lambda.size() != static_cast<Eigen::Index>(rho.size()))
    throw ValidationError("pretty-good measurement needs one operator per block");
  const auto d = P.at(0).rows();
  Mat sum = Mat::Zero(d, d);
  for (const auto& p : P) sum += p * p;
  if ((sum - Mat::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-9)
    throw ValidationError("measurement operators are not complete: sum P_i^2 != I");
  const int k = static_cast<int>(P.size());
  Mat avg = Mat::Zero(d, d);
  for (int i = 0; i < k; ++i) avg += lambda[i] * rho[i];
  const RegList o = {classical("O", k)};
  const RegList a = {quantum("A", static_cast<int>(d))};
  PgmResult res;
  res.post = CqState(o, a);
  CqState ideal(o, a);
  for (int i = 0; i < k; ++i) {
    res.post.add_unnormalized({i}, hermitize(P[i] * avg * P[i]));
    if (lambda[i] > 0) ideal.add({i}, lambda[i], rho[i]);
    res.p_correct += lambda[i] * (P[i] * P[i] * rho[i]).trace().real();
  }
  res.fidelity = cq_fidelity(res.post, ideal);
  res.bound = std::pow(std::max(0.0, res.p_correct), 1.5);
  res.pass = res.fidelity >= res.bound - 1e-9;
  return res;
}

GentleCheck gentle_measurement(const Mat& rho, const Mat& A) {
  GentleCheck g;
  const Mat post = A * rho * A.adjoint();
  const double p = post.trace().real();
  g.bound = std::sqrt(std::max(0.0, p));
  g.fidelity = p > 0 ? fidelity(rho, Mat(hermitize(post / p))) : 0.0;
  return g;
}

double hayashi_nagaoka_gap(const Mat& S, const Mat& T) {
  const auto d = S.rows();
  const Mat id = Mat::Identity(d, d);
  const Mat ih = pinv_sqrt_psd(hermitize(S + T));
  const Mat lhs = id - ih * S * ih;
  return min_eigenvalue(hermitize(2.0 * (id - S) + 4.0 * T - lhs));
}

}  // namespace qmc
