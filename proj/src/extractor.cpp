#include "qmc/extractor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "qmc/entropies.hpp"

namespace qmc {

namespace {

std::uint64_t ipow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

std::uint64_t next_pow2(std::uint64_t x) {
  std::uint64_t p = 1;
  while (p < x) p <<= 1;
  return p;
}

int log2_exact(std::uint64_t x) {
  int r = 0;
  while ((std::uint64_t{1} << r) < x) ++r;
  return r;
}

}  // namespace

const PairwiseFamily& ExtractorPlan::family() const {
  if (!family_) throw BudgetExceeded("extractor plan was not materialized");
  return *family_;
}

std::uint32_t ExtractorPlan::w1(int j, int c, std::uint64_t u1) const {
  const auto& p = params_;
  return w1_[(static_cast<std::uint64_t>(j) * p.q + static_cast<std::uint64_t>(c)) * p.u1_size + u1];
}

std::uint64_t ExtractorPlan::w1_inverse(std::uint32_t seed, int j) const {
  return w1_inv_[static_cast<std::uint64_t>(seed) * params_.n + static_cast<std::uint64_t>(j)];
}

std::pair<std::uint64_t, std::uint64_t> ExtractorPlan::split(std::uint64_t digits) const {
  return {digits / params_.v_size, digits % params_.v_size};
}

bool ExtractorPlan::involution_ok() const {
  if (!family_) return false;
  const auto& p = params_;
  const std::uint64_t S = family_->num_seeds();
  for (int j = 0; j < p.n; ++j) {
    std::vector<char> hit(S, 0);
    for (int c = 0; c < p.q; ++c)
      for (std::uint64_t u = 0; u < p.u1_size; ++u) {
        const std::uint32_t s = w1(j, c, u);
        if (hit[s]) return false;
        hit[s] = 1;
        if (family_->value(s, j) != c || w1_inverse(s, j) != u) return false;
      }
  }
  std::vector<char> hit(S, 0);
  for (std::uint64_t s = 0; s < S; ++s) {
    const std::uint64_t d = w2_[s];
    if (d >= S || hit[d]) return false;
    hit[d] = 1;
    if (w2_inv_[d] != s) return false;
  }
  return true;
}

ExtractorParams extractor_params(int alphabet, double k, double eps) {
  ExtractorParams p;
  if (alphabet < 2) throw ValidationError("extractor alphabet must have at least 2 symbols");
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("extractor eps must lie in (0, 1)");
  if (!(k > 0.0) || k > std::log2(static_cast<double>(alphabet)) + 1e-12)
    throw ValidationError("extractor k must lie in (0, log|C|]");
  p.alphabet = alphabet;
  p.q = embed_alphabet(alphabet).q;
  p.k = k;
  p.eps = eps;
  const double x = static_cast<double>(p.q) * std::exp2(-k) / eps;
  p.n_formula = static_cast<std::uint64_t>(std::ceil(x - 1e-12));
  const std::uint64_t n = next_pow2(p.n_formula);
  if (n > static_cast<std::uint64_t>(p.q))
    throw ValidationError("k < log(1/eps): n = " + std::to_string(n) + " exceeds |C| = " + std::to_string(p.q) +
                          ", nothing can be extracted");
  p.n = static_cast<int>(n);
  p.n_rounded = n != p.n_formula;
  p.t = family_degree(static_cast<std::uint64_t>(p.q), p.n);
  p.u1_size = ipow(p.q, p.t);
  p.j_size = n;
  p.ubar_size = p.u1_size * n;
  p.v_size = ipow(p.q, p.t + 1) / p.ubar_size;
  p.split_error = 0.0;
  const double lq = std::log2(static_cast<double>(p.q));
  p.seed_bits = p.t * lq + log2_exact(n);
  p.extracted_bits = lq - log2_exact(n);
  p.seed_bound = 2.0 * lq - k + 2.0 * std::log2(1.0 / eps);
  p.extracted_guarantee = k - std::log2(1.0 / eps) - 1.0;
  p.seed_ok = p.seed_bits <= p.seed_bound + 1e-9;
  p.extracted_ok = p.extracted_bits >= p.extracted_guarantee - 1e-9;
  return p;
}

ExtractorPlan build_plan(int alphabet, double k, double eps) {
  ExtractorPlan plan;
  plan.params_ = extractor_params(alphabet, k, eps);
  const ExtractorParams& p = plan.params_;
  const auto n = static_cast<std::uint64_t>(p.n);

  const std::uint64_t S = ipow(p.q, p.t + 1);
  if (S * n > kPlanBudget) return plan;
  plan.family_.emplace(build_family(static_cast<std::uint64_t>(p.q), p.n));
  const PairwiseFamily& fam = *plan.family_;

  plan.w1_.assign(n * p.q * p.u1_size, 0);
  plan.w1_inv_.assign(S * n, 0);
  for (int j = 0; j < p.n; ++j) {
    std::vector<std::uint64_t> next(p.q, 0);
    for (std::uint64_t s = 0; s < S; ++s) {
      const int c = fam.value(s, j);
      const std::uint64_t u = next[c]++;
      if (u >= p.u1_size) throw ValidationError("conditional support larger than |U1|");
      plan.w1_[(static_cast<std::uint64_t>(j) * p.q + c) * p.u1_size + u] = static_cast<std::uint32_t>(s);
      plan.w1_inv_[s * n + j] = u;
    }
    for (int c = 0; c < p.q; ++c)
      if (next[c] != p.u1_size) throw ValidationError("conditional support is not of size |U1|");
  }

  // Prefer W2 = "read C_1..C_{t+1}" when that is injective on the support.
  plan.w2_.assign(S, 0);
  plan.w2_inv_.assign(S, std::numeric_limits<std::uint32_t>::max());
  bool prefix = p.n >= p.t + 1;
  if (prefix) {
    for (std::uint64_t s = 0; s < S && prefix; ++s) {
      std::uint64_t d = 0;
      for (int i = 0; i <= p.t; ++i) d = d * p.q + static_cast<std::uint64_t>(fam.value(s, i));
      if (plan.w2_inv_[d] != std::numeric_limits<std::uint32_t>::max()) prefix = false;
      plan.w2_[s] = d;
      plan.w2_inv_[d] = static_cast<std::uint32_t>(s);
    }
  }
  if (!prefix) {
    for (std::uint64_t s = 0; s < S; ++s) {
      plan.w2_[s] = s;
      plan.w2_inv_[s] = static_cast<std::uint32_t>(s);
    }
  }
  plan.w2_prefix_ = prefix;
  return plan;
}

namespace {

struct Source {
  CqSource src;  // padded to q
  Mat marginal;
};

Source load_source(const CqState& s, const std::string& creg, int q) {
  if (s.classical_regs().size() != 1)
    throw ValidationError("extractor source must have exactly one classical register");
  Source out;
  out.src = CqSource::from_state(s, creg);
  if (out.src.alphabet() > q) throw ValidationError("source alphabet larger than the plan's");
  const int d = out.src.dim_p();
  const int a = out.src.alphabet();
  out.src.p.conservativeResize(q);
  for (int c = a; c < q; ++c) {
    out.src.p[c] = 0.0;
    out.src.rho.push_back(Mat::Zero(d, d));
  }
  out.marginal = out.src.marginal();
  return out;
}

// Fills D_out, distances and the Ubar checks from the (V, Ubar) marginal.
void evaluate(const std::map<std::uint64_t, Mat>& blocks, const Mat& marginal, const ExtractorPlan& plan,
              ExtractorReport& rep) {
  const auto& p = plan.params();
  const std::uint64_t S = p.ubar_size * p.v_size;
  const Mat target = marginal / static_cast<double>(S);
  double D = 0.0, td = 0.0, f = 0.0;
  std::vector<double> pu(p.ubar_size, 0.0), pv(p.v_size, 0.0);
  std::map<std::uint64_t, double> joint;
  for (const auto& [d, a] : blocks) {
    D += rel_entropy_unnormalized(a, target);
    td += trace_distance(a, target);
    f += fidelity(a, target);
    const double w = a.trace().real();
    const auto [u, v] = plan.split(d);
    pu[u] += w;
    pv[v] += w;
    joint[d] = w;
  }
  const double absent = static_cast<double>(S - blocks.size()) / static_cast<double>(S);
  td += 0.5 * absent;
  rep.D_out = std::max(0.0, D);
  rep.trace_distance = td;
  rep.purified_distance = purified_from_fidelity(std::min(1.0, f));
  rep.ubar_uniform_gap = 0.0;
  for (double x : pu) rep.ubar_uniform_gap = std::max(rep.ubar_uniform_gap, std::abs(x - 1.0 / p.ubar_size));
  rep.independence_gap = 0.0;
  for (std::uint64_t u = 0; u < p.ubar_size; ++u)
    for (std::uint64_t v = 0; v < p.v_size; ++v) {
      const auto it = joint.find(u * p.v_size + v);
      const double w = it == joint.end() ? 0.0 : it->second;
      rep.independence_gap = std::max(rep.independence_gap, std::abs(w - pu[u] * pv[v]));
    }
  rep.bound = std::log2(1.0 + std::exp2(rep.k_eff) / p.n);
  rep.bound_ok = rep.D_out <= rep.bound + 1e-8;
  rep.pinsker_ok = rep.trace_distance <= std::sqrt(2.0 * rep.D_out) + 1e-9;
  rep.pass = rep.eligible && rep.bound_ok && rep.pinsker_ok;
}

void check_eligibility(const Source& s, const ExtractorPlan& plan, ExtractorReport& rep) {
  const auto& p = plan.params();
  const RVec uniform = RVec::Constant(p.q, 1.0 / p.q);
  rep.k_eff = convex_split_k(s.src, uniform);
  rep.dmax_identity = rep.k_eff - std::log2(static_cast<double>(p.q));
  rep.eligible = rep.dmax_identity <= -p.k + 1e-9;
  if (!rep.eligible)
    throw ValidationError("source not eligible: dmax(Psi_GC || Psi_G x I_C) = " + std::to_string(rep.dmax_identity) +
                          " > -k = " + std::to_string(-p.k));
}

struct Entry {
  std::uint64_t digits;
  int c;
};

// For each j the map (c, u1) -> digits, in (c, u1) order.
std::vector<std::vector<Entry>> apply_plan(const ExtractorPlan& plan, const RVec& prob, Exec exec) {
  const auto& p = plan.params();
  std::vector<std::vector<Entry>> per_j(p.n);
  auto one = [&](int j) {
    auto& out = per_j[j];
    for (int c = 0; c < p.q; ++c) {
      if (prob[c] <= 0.0) continue;
      for (std::uint64_t u = 0; u < p.u1_size; ++u) out.push_back({plan.w2(plan.w1(j, c, u)), c});
    }
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int j = 0; j < p.n; ++j) one(j);
  } else {
    for (int j = 0; j < p.n; ++j) one(j);
  }
  return per_j;
}

}  // namespace

ExtractorResult run_extractor(const CqState& source, const std::string& creg, const ExtractorPlan& plan,
                              Exec exec) {
  const auto& p = plan.params();
  if (!plan.materialized()) throw BudgetExceeded("extractor tables exceed the plan budget");
  const Source s = load_source(source, creg, p.q);
  ExtractorResult res;
  res.report.params = p;
  check_eligibility(s, plan, res.report);

  const auto per_j = apply_plan(plan, s.src.p, exec);
  res.output = CqState({classical("V", static_cast<int>(p.v_size)), classical("Ubar", static_cast<int>(p.ubar_size)),
                        classical("Cp", p.n)},
                       s.src.p_regs);
  const double w0 = 1.0 / (static_cast<double>(p.n) * static_cast<double>(p.u1_size));
  std::map<std::uint64_t, Mat> blocks;
  for (int j = 0; j < p.n; ++j)
    for (const auto& e : per_j[j]) {
      const auto [u, v] = plan.split(e.digits);
      const double w = w0 * s.src.p[e.c];
      res.output.add({static_cast<int>(v), static_cast<int>(u), j}, w, s.src.rho[e.c]);
      auto [it, fresh] = blocks.try_emplace(e.digits, w * s.src.rho[e.c]);
      if (!fresh) it->second += w * s.src.rho[e.c];
    }
  evaluate(blocks, s.marginal, plan, res.report);
  return res;
}

SharedResult run_shared_variant(const CqState& source, const std::string& creg, const std::string& creg_copy,
                                const ExtractorPlan& plan, Exec exec) {
  const auto& p = plan.params();
  if (source.classical_regs().size() != 2) throw ValidationError("shared source needs exactly C and its copy");
  const int a = require_register(source.classical_regs(), creg);
  const int b = require_register(source.classical_regs(), creg_copy);
  for (const auto& [key, blk] : source.blocks())
    if (blk.weight > 0.0 && key[a] != key[b]) throw ValidationError("C' is not a classical copy of C");

  SharedResult res;
  const CqState alice = cq_partial_trace(source, {creg_copy});
  const ExtractorResult single = run_extractor(alice, creg, plan, exec);
  res.report = single.report;

  // Bob repeats Alice's computation on his copy with the same seed (u1, j).
  const CqState bob = cq_partial_trace(source, {creg});
  const Source sb = load_source(bob, creg_copy, p.q);
  const Source sa = load_source(alice, creg, p.q);
  const auto per_a = apply_plan(plan, sa.src.p, exec);
  const auto per_b = apply_plan(plan, sb.src.p, exec);
  const int vs = static_cast<int>(p.v_size), us = static_cast<int>(p.ubar_size);
  res.output = CqState({classical("V", vs), classical("Ubar", us), classical("Vp", vs), classical("Ubarp", us)},
                       source.quantum_regs());
  res.outputs_equal = true;
  const double w0 = 1.0 / (static_cast<double>(p.n) * static_cast<double>(p.u1_size));
  for (int j = 0; j < p.n; ++j) {
    if (per_a[j].size() != per_b[j].size()) {
      res.outputs_equal = false;
      continue;
    }
    for (std::size_t i = 0; i < per_a[j].size(); ++i) {
      const auto& ea = per_a[j][i];
      const auto& eb = per_b[j][i];
      if (ea.digits != eb.digits) res.outputs_equal = false;
      const auto [ua, va] = plan.split(ea.digits);
      const auto [ub, vb] = plan.split(eb.digits);
      res.output.add({static_cast<int>(va), static_cast<int>(ua), static_cast<int>(vb), static_cast<int>(ub)},
                     w0 * sa.src.p[ea.c], sa.src.rho[ea.c]);
    }
  }
  return res;
}

}  // namespace qmc
