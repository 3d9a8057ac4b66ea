#include <algorithm>
#include <cmath>

#include "compression_engine.hpp"
#include "qmc/entropies.hpp"
#include "qmc/extractor.hpp"

namespace qmc {

namespace {

struct Ctx {
  CoherentMeasurement cm;  // W measurement, padded to qc
  std::vector<RVec> pcw;   // p(c|w) for every padded w
  int qc = 0;
  int nc = 0;  // |C|
  int n = 0;   // stage 1
  int Jd = 0;
  std::optional<ExtractorPlan> plan;
  std::vector<Mat> rb;  // Psi^w_RB, normalized
};

std::uint64_t v_size(const Ctx& x) { return x.plan ? x.plan->params().v_size : 1; }
std::uint64_t u_size(const Ctx& x) { return x.plan ? x.plan->params().ubar_size : 1; }

RegList out_classical(const Ctx& x) {
  const int vs = static_cast<int>(v_size(x)), us = static_cast<int>(u_size(x));
  return {classical("C2", x.qc), classical("C2p", x.qc), classical("J", x.Jd), classical("Jp", x.n + 1),
          classical("V", vs),    classical("Ubar", us),  classical("Vp", vs), classical("Ubarp", us),
          classical("Cp", x.nc)};
}

RegList out_quantum(const Ctx& x) {
  const RegList rab = x.cm.rab_regs();
  return {rab[0], rab[2]};
}

// Input registers C1, C1p, C2, C2p, J, Jp; quantum RAB. Discards A, lets Bob
// sample C' from C1p, then runs the extractor on C1 (Alice) and C1p (Bob)
// with a shared seed.
CqState post_process(const CqState& in, const Ctx& x) {
  CqState out(out_classical(x), out_quantum(x));
  const RegList rab = x.cm.rab_regs();
  const std::uint64_t seeds = x.plan ? static_cast<std::uint64_t>(x.plan->params().n) * x.plan->params().u1_size : 1;
  const double ws = 1.0 / static_cast<double>(seeds);
  for (const auto& [key, blk] : in.blocks()) {
    if (blk.weight <= 0.0) continue;
    const Mat rb = partial_trace_matrix(blk.rho, rab, {0, 2});
    const int c1 = key[0], c1p = key[1];
    const RVec& pc = x.pcw[c1p];
    for (int c = 0; c < x.nc; ++c) {
      if (pc[c] <= 0.0) continue;
      const double w = blk.weight * pc[c] * ws;
      if (!x.plan) {
        out.add({key[2], key[3], key[4], key[5], 0, 0, 0, 0, c}, w, rb);
        continue;
      }
      const auto& P = *x.plan;
      for (int j = 0; j < P.params().n; ++j)
        for (std::uint64_t u = 0; u < P.params().u1_size; ++u) {
          const auto [ua, va] = P.split(P.w2(P.w1(j, c1, u)));
          const auto [ub, vb] = P.split(P.w2(P.w1(j, c1p, u)));
          out.add({key[2], key[3], key[4], key[5], static_cast<int>(va), static_cast<int>(ua), static_cast<int>(vb),
                   static_cast<int>(ub), c},
                  w, rb);
        }
    }
  }
  return out;
}

CqState ideal_stage1(const Ctx& x) {
  CqState s({classical("C1", x.qc), classical("C1p", x.qc), classical("C2", x.qc), classical("C2p", x.qc),
             classical("J", x.Jd), classical("Jp", x.n + 1)},
            x.cm.rab_regs());
  for (int c1 = 0; c1 < x.qc; ++c1) {
    if (x.cm.p[c1] <= 0.0) continue;
    const Mat rho = x.cm.psi[c1] * x.cm.psi[c1].adjoint();
    for (int c2 = 0; c2 < x.qc; ++c2)
      for (int j = 0; j < x.n; ++j) s.add({c1, c1, c2, c2, j, j}, x.cm.p[c1] / (x.qc * static_cast<double>(x.n)), rho);
  }
  return s;
}

// Psi_RBC' (x) uniform (C2, J) (x) uniform (V, Ubar), all copied to Bob.
CqState target_state(const Ctx& x) {
  CqState s(out_classical(x), out_quantum(x));
  const std::uint64_t vs = v_size(x), us = u_size(x);
  const double w0 = 1.0 / (x.qc * static_cast<double>(x.n) * static_cast<double>(vs * us));
  for (int c = 0; c < x.nc; ++c) {
    Mat blk = Mat::Zero(x.rb.empty() ? 1 : x.rb[0].rows(), x.rb.empty() ? 1 : x.rb[0].cols());
    for (int w = 0; w < x.qc; ++w)
      if (x.cm.p[w] > 0.0) blk += x.cm.p[w] * x.pcw[w][c] * x.rb[w];
    const double pc = blk.trace().real();
    if (pc <= 1e-15) continue;
    const Mat rho = blk / pc;
    for (int c2 = 0; c2 < x.qc; ++c2)
      for (int j = 0; j < x.n; ++j)
        for (std::uint64_t u = 0; u < us; ++u)
          for (std::uint64_t v = 0; v < vs; ++v) {
            const int vi = static_cast<int>(v), ui = static_cast<int>(u);
            s.add({c2, c2, j, j, vi, ui, vi, ui, c}, w0 * pc, rho);
          }
  }
  return s;
}

}  // namespace

CompositionReport compress_without_feedback(const CompressionScenario& sc, const Factorization& fac,
                                            const CompositionOptions& opt) {
  if (sc.sigma) throw ValidationError("composition uses the uniform sigma_W");
  if (!(opt.delta > 0.0 && opt.delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  const Povm& M = fac.w_povm;
  M.validate();
  const int nw = M.outcomes();
  if (static_cast<int>(fac.p_c_given_w.size()) != nw) throw ValidationError("need one p(c|w) row per w");
  const int nc = static_cast<int>(fac.p_c_given_w.front().size());
  for (const auto& row : fac.p_c_given_w) {
    if (row.size() != nc) throw ValidationError("p(c|w) rows differ in length");
    if (row.minCoeff() < 0.0 || std::abs(row.sum() - 1.0) > 1e-12)
      throw ValidationError("p(c|w) rows must be probability vectors");
  }

  CompositionReport rep;
  // With A discarded only the effective POVM sum_w p(c|w) M_w matters.
  if (fac.target) {
    if (fac.target->outcomes() != nc || fac.target->dim() != M.dim())
      throw ValidationError("factorization target has the wrong shape");
    for (int c = 0; c < nc; ++c) {
      Mat d = fac.target->elements[c];
      for (int w = 0; w < nw; ++w) d -= fac.p_c_given_w[w][c] * M.elements[w];
      rep.factorization_error = std::max(rep.factorization_error, d.cwiseAbs().maxCoeff());
    }
    if (rep.factorization_error > 1e-9)
      throw ValidationError("factorization inconsistent: max deviation " + std::to_string(rep.factorization_error));
  }

  CompressionScenario sw = sc;
  sw.povm = M;
  ProtocolOptions po;
  po.exec = opt.exec;
  po.keep_final_state = true;
  rep.stage1 = run_protocol(sw, po);

  Ctx x;
  x.qc = rep.stage1.qc;
  x.nc = nc;
  x.n = rep.stage1.params.n;
  x.cm = pad_alphabet(coherent_measure(sc.psi, sc.R, sc.A, sc.B, M), x.qc);
  x.Jd = rep.stage1.final_state->classical_regs()[4].dim;
  for (int w = 0; w < x.qc; ++w) {
    if (w < nw) x.pcw.push_back(fac.p_c_given_w[w]);
    else {
      RVec r = RVec::Zero(nc);
      r[0] = 1.0;
      x.pcw.push_back(r);
    }
    const Mat m = detail::rab_to_matrix(x.cm.psi[w], x.cm.dR, x.cm.dA, x.cm.dB);
    x.rb.push_back(m * m.adjoint());
  }

  // Source for stage 2: G = R B C' (C' as a diagonal quantum register), W and its copy.
  const RegList rab = x.cm.rab_regs();
  CqState src({classical("W", x.qc), classical("Wp", x.qc)}, {rab[0], rab[2], quantum("Cq", nc)});
  for (int w = 0; w < x.qc; ++w) {
    if (x.cm.p[w] <= 0.0) continue;
    RVec d = x.pcw[w];
    src.add({w, w}, x.cm.p[w], kron(x.rb[w], Mat(d.cast<std::complex<double>>().asDiagonal())));
  }
  const CqSource g = CqSource::from_state(cq_partial_trace(src, {"Wp"}), "W");
  const double log_q = std::log2(static_cast<double>(x.qc));
  rep.dmax_rbcw = convex_split_k(g, RVec::Constant(x.qc, 1.0 / x.qc)) - log_q;
  rep.k_available = -rep.dmax_rbcw;
  const double eps_ext = opt.extractor_eps.value_or(opt.delta * opt.delta);

  if (rep.k_available <= 1e-12) {
    rep.stage2_note = "no extractable randomness (k <= 0)";
  } else {
    try {
      ExtractorPlan plan = build_plan(nw, std::min(rep.k_available, std::log2(static_cast<double>(nw))), eps_ext);
      if (plan.params().q != x.qc) throw ValidationError("extractor alphabet differs from stage 1");
      if (!plan.materialized()) throw BudgetExceeded("extractor tables exceed the plan budget");
      x.plan = std::move(plan);
    } catch (const ValidationError& e) {
      rep.stage2_note = std::string("extraction skipped: ") + e.what();
    }
  }
  if (x.plan) {
    const SharedResult shared = run_shared_variant(src, "W", "Wp", *x.plan, opt.exec);
    rep.stage2 = shared.report;
    if (!shared.outputs_equal) rep.stage2_note = "shared outputs differ";
  }

  const CqState target = target_state(x);
  const CqState final_state = post_process(*rep.stage1.final_state, x);
  const CqState ideal_out = post_process(ideal_stage1(x), x);
  rep.stage1_distance = rep.stage1.final_distance;
  rep.stage2_distance = purified_from_fidelity(std::min(1.0, cq_fidelity(ideal_out, target)));
  rep.final_distance = purified_from_fidelity(std::min(1.0, cq_fidelity(final_state, target)));
  rep.chain_ok = rep.final_distance <= rep.stage1_distance + rep.stage2_distance + 1e-6;

  // Ledger from the register sizes actually used.
  const double ext_seed = x.plan ? x.plan->params().seed_bits : 0.0;
  const double ext_out = x.plan ? x.plan->params().extracted_bits : 0.0;
  rep.initial_bits = std::log2(static_cast<double>(rep.stage1.seeds)) + ext_seed;
  rep.final_bits = log_q + std::log2(static_cast<double>(x.n)) + std::log2(static_cast<double>(u_size(x))) +
                   std::log2(static_cast<double>(v_size(x)));
  rep.consumed_bits = rep.stage1.r1 - rep.stage1.r2_proof;
  rep.produced_bits = ext_out;
  rep.ledger_ok = rep.final_bits - rep.initial_bits == rep.produced_bits - rep.consumed_bits;

  const double eps = sc.eps, delta = opt.delta;
  rep.dmax_rbw = dmax(x.cm.rbc(), kron(x.cm.rb(), Mat::Identity(x.qc, x.qc)));
  const double dh_id = rep.stage1.params.dh - log_q;
  rep.m_bound_printed = rep.dmax_rbw - dh_id + 7.0 * std::log2(1.0 / eps);
  rep.r1_bound_printed = 4.0 * log_q + std::log2(64.0 / std::pow(eps * delta, 5));
  rep.r2_bound_printed =
      4.0 * log_q + rep.dmax_rbw - rep.dmax_rbcw - std::log2(8.0 * std::pow(eps, 5) / std::pow(delta, 5));
  rep.error_budget_printed = 10.0 * eps + 3.0 * delta;
  rep.pass = rep.chain_ok && rep.ledger_ok && rep.stage1.chain_ok && (!rep.stage2 || rep.stage2->pass) &&
             rep.stage2_note != "shared outputs differ";
  return rep;
}

}  // namespace qmc
