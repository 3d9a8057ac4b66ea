#include "qmc/cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qmc/cli/report.hpp"
#include "qmc/cli/scenario.hpp"
#include "qmc/entropies.hpp"

namespace qmc::cli {

namespace {

// Everything a command reads besides the scenario. File contents, not paths,
// enter the run hash.
struct Extras {
  std::map<std::string, double> flags;
  bool params_only = false;
  std::optional<json> candidates;
  std::optional<json> factorization;
  std::string table_path;
};

struct Outcome {
  int status = 0;
  std::string error;
  std::optional<RunReport> report;
};

json to_json(const Params& p) {
  return {{"k", number(p.k)},
          {"k_prime_upper", number(p.k_prime_upper)},
          {"dh", number(p.dh)},
          {"n_theorem", number(p.n_theorem)},
          {"b_theorem", number(p.b_theorem)},
          {"n", p.n},
          {"b", p.b},
          {"desk_scale", p.desk_scale},
          {"n_rounded", p.n_rounded}};
}

json to_json(const CompressionReport& r) {
  return {{"params", to_json(r.params)},
          {"qc", r.qc},
          {"q_base", r.q_base},
          {"t", r.t},
          {"seeds", r.seeds},
          {"m", r.m},
          {"r1", number(r.r1)},
          {"r2_proof", number(r.r2_proof)},
          {"r2_printed", number(r.r2_printed)},
          {"net_consumed", number(r.net_consumed)},
          {"m_bound_printed", number(r.m_bound_printed)},
          {"m_bound_corrected", number(r.m_bound_corrected)},
          {"r1_bound_printed", number(r.r1_bound_printed)},
          {"r1_bound_corrected", number(r.r1_bound_corrected)},
          {"d_enc", number(r.d_enc)},
          {"d_enc_marginal", number(r.d_enc_marginal)},
          {"gamma_sum", number(r.gamma_sum)},
          {"theta_norm_error", number(r.theta_norm_error)},
          {"f_ideal", number(r.f_ideal)},
          {"f_real", number(r.f_real)},
          {"hn_bound", number(r.hn_bound)},
          {"claim_distance", number(r.claim_distance)},
          {"claim_bound", number(r.claim_bound)},
          {"final_distance", number(r.final_distance)},
          {"target_distance", number(r.target_distance)},
          {"chain_bound", number(r.chain_bound)},
          {"pad_mass", number(r.pad_mass)},
          {"decoder_completeness", number(r.decoder_completeness)},
          {"simulated", r.simulated}};
}

json to_json(const ExtractorParams& p) {
  return {{"alphabet", p.alphabet},
          {"q", p.q},
          {"k", number(p.k)},
          {"eps", number(p.eps)},
          {"n_formula", p.n_formula},
          {"n", p.n},
          {"n_rounded", p.n_rounded},
          {"t", p.t},
          {"u1_size", p.u1_size},
          {"j_size", p.j_size},
          {"ubar_size", p.ubar_size},
          {"v_size", p.v_size},
          {"split_error", number(p.split_error)},
          {"seed_bits", number(p.seed_bits)},
          {"extracted_bits", number(p.extracted_bits)},
          {"seed_bound", number(p.seed_bound)},
          {"extracted_guarantee", number(p.extracted_guarantee)}};
}

json to_json(const ExtractorReport& r) {
  return {{"params", to_json(r.params)},
          {"dmax_identity", number(r.dmax_identity)},
          {"k_eff", number(r.k_eff)},
          {"eligible", r.eligible},
          {"D_out", number(r.D_out)},
          {"bound", number(r.bound)},
          {"trace_distance", number(r.trace_distance)},
          {"purified_distance", number(r.purified_distance)},
          {"ubar_uniform_gap", number(r.ubar_uniform_gap)},
          {"independence_gap", number(r.independence_gap)}};
}

void add_timings(RunReport& rep, const std::map<std::string, double>& t) {
  for (const auto& [k, v] : t) rep.timings[k] = v;
}

void check_extractor(RunReport& rep, const ExtractorReport& x) {
  rep.check("extractor_bound", "extractor", "D_out <= log2(1 + 2^k_eff / n)", x.bound_ok);
  rep.check("pinsker", "extractor", "trace distance <= sqrt(2 D_out)", x.pinsker_ok);
}

void check_compression(RunReport& rep, const CompressionReport& r) {
  if (r.simulated) {
    rep.check("encoding_overlap", "compression", "encoded distance matches the per-branch overlaps", r.enc_ok);
    rep.check("mixture_normalization", "compression", "gamma weights sum to 1 and theta is normalized", r.gamma_ok);
    rep.check("hayashi_nagaoka", "compression", "decoder failure <= 2 typeI + 4 (b-1) typeII", r.hn_ok);
    rep.check("chain_bound", "compression", "final distance <= d_enc + sqrt(1 - (1 - f)^3)", r.chain_ok);
  }
  if (!r.params.desk_scale)
    rep.check("theorem_bounds", "compression", "m, r1 within the corrected bounds and r2 at least the printed value", r.theorem_ok);
}

std::optional<double> flag(const ScenarioFile& s, const std::string& key) {
  const auto it = s.overrides.find(key);
  return it == s.overrides.end() ? std::nullopt : std::optional<double>(it->second);
}

// Dyadic sigma over |Q| symbols realised on a base alphabet of 2^m symbols.
LiftedFamily dyadic_family(const RVec& sigma, int n) {
  const int alphabet = static_cast<int>(sigma.size());
  for (int m = 1; m <= 16; ++m) {
    const std::int64_t base = std::int64_t{1} << m;
    if (base < alphabet) continue;
    std::vector<Rational> q;
    bool ok = true;
    for (int c = 0; c < alphabet && ok; ++c) {
      const double x = sigma[c] * static_cast<double>(base);
      ok = std::abs(x - std::round(x)) <= 1e-9;
      q.emplace_back(static_cast<std::int64_t>(std::llround(x)), base);
    }
    if (!ok) continue;
    const PairwiseFamily fam = build_family(static_cast<std::uint64_t>(base), n);
    return lift_marginal(fam, lift_map_for(q, static_cast<std::uint64_t>(base)), alphabet);
  }
  throw UsageError("pairwise convex split needs a dyadic sigma with denominator <= 2^16 (use \"iid\": true)");
}

RunReport cmd_entropy(const ScenarioFile& s) {
  const EntropyInput in = entropy_input(s);
  RunReport rep;
  const RelEntropyResult rel = rel_entropy_and_variance(in.rho.matrix(), in.sigma.matrix());
  const double dm = dmax(in.rho.matrix(), in.sigma.matrix());
  const SmoothResult sm = dmax_smooth_upper(in.rho.matrix(), in.sigma.matrix(), in.eps);
  const OptimalTest dh = dh_eps(in.rho.matrix(), in.sigma.matrix(), in.eps);
  const double h = -in.eps * std::log2(in.eps) - (1.0 - in.eps) * std::log2(1.0 - in.eps);
  rep.results = {{"D", number(rel.D)},
                 {"V", number(rel.V)},
                 {"infinite", rel.infinite},
                 {"diagnostic", rel.diagnostic},
                 {"dmax", number(dm)},
                 {"dmax_smooth", number(sm.value)},
                 {"dmax_smooth_distance", number(sm.distance)},
                 {"dmax_smooth_certified", sm.certified == Certified::exact ? "exact" : "upper_bound"},
                 {"dh", number(dh.value)},
                 {"dh_typeI", number(dh.typeI)},
                 {"dh_typeII", number(dh.typeII)},
                 {"dh_infinite", dh.infinite},
                 {"eps", in.eps}};
  rep.results["summary"] = {{"D", rep.results["D"]},
                            {"V", rep.results["V"]},
                            {"dmax", rep.results["dmax"]},
                            {"dmax_smooth", rep.results["dmax_smooth"]},
                            {"dh", rep.results["dh"]}};
  rep.check("smooth_below_exact", "entropies", "dmax_eps <= dmax", sm.value <= dm + 1e-9);
  rep.check("smoothing_ball", "entropies", "smoothing witness within purified distance eps",
            sm.distance <= in.eps + 1e-9);
  rep.check("dh_type_one", "entropies", "optimal test has type-I error <= eps", dh.infinite || dh.typeI <= in.eps + 1e-9);
  rep.check("dh_converse", "entropies", "(1 - eps) dh_eps <= D + h(eps)",
            rel.infinite || (1.0 - in.eps) * dh.value <= rel.D + h + 1e-9);
  return rep;
}

RunReport cmd_convex_split(const ScenarioFile& s, std::ostream& out) {
  const ConvexSplitInput in = convex_split_input(s);
  const int q = in.source.alphabet();
  const RVec sigma = in.sigma.value_or(RVec::Constant(q, 1.0 / q));
  if (sigma.size() != q) throw UsageError("payload.sigma must have one entry per symbol");
  if (sigma.minCoeff() < 0.0 || std::abs(sigma.sum() - 1.0) > 1e-12)
    throw UsageError("payload.sigma must be a probability vector");
  if (in.n < 1) throw UsageError("n must be >= 1");
  const LemmaCheck lc = in.iid ? verify_iid(in.source, sigma, in.n) : verify_pairwise(in.source, dyadic_family(sigma, in.n));
  RunReport rep;
  rep.results = {{"variant", in.iid ? "iid" : "pairwise"}, {"n", in.n},
                 {"k", number(lc.k)},
                 {"D", number(lc.D)},
                 {"bound", number(lc.bound)},
                 {"proof_bound", number(lc.proof_bound)},
                 {"blocks", lc.blocks}};
  rep.results["summary"] = {{"n", in.n}, {"k", rep.results["k"]}, {"D", rep.results["D"]}, {"bound", rep.results["bound"]}};
  rep.check("lemma_bound", "convex-split", "D(tau || rho_P x sigma-bar) <= log2(1 + 2^k/n)", lc.pass);
  out << "n,D,bound,pass\n" << in.n << ',' << lc.D << ',' << lc.bound << ',' << (lc.pass ? "true" : "false") << '\n';
  return rep;
}

RunReport cmd_compress(const ScenarioFile& s, const Extras& x) {
  const CompressionScenario sc = compress_input(s);
  RunReport rep;
  if (x.candidates) {
    std::vector<Mat> cands;
    if (!x.candidates->is_array()) throw UsageError("candidates file must be a list of matrices on B C");
    for (std::size_t i = 0; i < x.candidates->size(); ++i)
      cands.push_back(matrix_from_json((*x.candidates)[i], "candidates[" + std::to_string(i) + "]"));
    const double delta = flag(s, "delta").value_or(sc.eps);
    const ConverseEstimate ce =
        converse_estimate(coherent_measure(sc.psi, sc.R, sc.A, sc.B, sc.povm), sc.eps, delta, cands);
    json per = json::array();
    for (double v : ce.per_candidate) per.push_back(number(v));
    rep.results["converse"] = {{"per_candidate", per}, {"estimate", number(ce.estimate)}, {"heuristic", ce.heuristic}};
  }
  if (auto blocks = flag(s, "blocks"); blocks && *blocks != 1.0) {
    if (std::abs(*blocks - std::round(*blocks)) > 1e-9) throw UsageError("blocks must be an integer");
    const RecycleReport rr = run_recycled_blocks(sc, static_cast<int>(std::lround(*blocks)));
    json bl = json::array();
    for (const auto& b : rr.blocks) bl.push_back(to_json(b));
    json consumed = json::array();
    for (double v : rr.consumed_bits) consumed.push_back(number(v));
    rep.results["recycling"] = {{"blocks", bl},
                                {"cumulative_distance", number(rr.cumulative_distance)},
                                {"bound", number(rr.bound)},
                                {"topup_bits", number(rr.topup_bits)},
                                {"consumed_bits", consumed}};
    const CompressionReport& first = rr.blocks.front();
    rep.results["summary"] = {{"n", first.params.n},          {"b", first.params.b},
                              {"m", first.m},                 {"r1", number(first.r1)},
                              {"d_enc", number(first.d_enc)}, {"final_distance", number(rr.cumulative_distance)},
                              {"chain_bound", number(rr.bound)}};
    for (const auto& b : rr.blocks) add_timings(rep, b.timings);
    rep.check("recycling_bound", "compression", "cumulative distance <= sum of block distances", rr.pass);
    return rep;
  }
  ProtocolOptions po;
  po.params_only = x.params_only;
  const CompressionReport r = run_protocol(sc, po);
  rep.results["protocol"] = to_json(r);
  rep.results["summary"] = {{"n", r.params.n},
                            {"b", r.params.b},
                            {"m", r.m},
                            {"r1", number(r.r1)},
                            {"d_enc", number(r.d_enc)},
                            {"f_ideal", number(r.f_ideal)},
                            {"final_distance", number(r.final_distance)},
                            {"chain_bound", number(r.chain_bound)}};
  add_timings(rep, r.timings);
  check_compression(rep, r);
  return rep;
}

void write_table(const ExtractorPlan& plan, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw UsageError("cannot write table " + path);
  const ExtractorParams& p = plan.params();
  os << "j,c,u1,seed,ubar,v\n";
  for (int j = 0; j < p.n; ++j)
    for (int c = 0; c < p.q; ++c)
      for (std::uint64_t u = 0; u < p.u1_size; ++u) {
        const std::uint32_t seed = plan.w1(j, c, u);
        const auto [ub, v] = plan.split(plan.w2(seed));
        os << j << ',' << c << ',' << u << ',' << seed << ',' << ub << ',' << v << '\n';
      }
}

RunReport cmd_extract(const ScenarioFile& s, const Extras& x) {
  const ExtractInput in = extract_input(s);
  const int alphabet = in.source.classical_regs()[require_register(in.source.classical_regs(), in.reg)].dim;
  double k = 0.0;
  if (in.k) {
    k = *in.k;
  } else {
    const CqSource src = CqSource::from_state(in.source, in.reg);
    k = std::log2(static_cast<double>(alphabet)) - convex_split_k(src, RVec::Constant(alphabet, 1.0 / alphabet));
    k = std::min(k, std::log2(static_cast<double>(alphabet)));
    if (k <= 1e-12) throw UsageError("source has no extractable min-entropy");
  }
  const ExtractorPlan plan = build_plan(alphabet, k, in.eps);
  const ExtractorResult res = run_extractor(in.source, in.reg, plan);
  if (!x.table_path.empty()) write_table(plan, x.table_path);
  RunReport rep;
  rep.results["extractor"] = to_json(res.report);
  const ExtractorParams& p = res.report.params;
  rep.results["summary"] = {{"k", number(p.k)},
                            {"eps", number(p.eps)},
                            {"n", p.n},
                            {"seed_bits", number(p.seed_bits)},
                            {"extracted_bits", number(p.extracted_bits)},
                            {"seed_bound", number(p.seed_bound)},
                            {"extracted_guarantee", number(p.extracted_guarantee)},
                            {"D_out", number(res.report.D_out)},
                            {"bound", number(res.report.bound)}};
  check_extractor(rep, res.report);
  rep.check("seed_length", "extractor", "seed <= 2 log|C| - k + 2 log(1/eps)", p.seed_ok);
  if (p.split_error == 0.0)
    rep.check("extracted_length", "extractor", "extracted >= k - log(1/eps) - 1", p.extracted_ok);
  return rep;
}

RunReport cmd_compose(const ScenarioFile& s, const Extras& x) {
  const ComposeInput in = compose_input(s, x.factorization);
  const CompositionReport r = compress_without_feedback(in.scenario, in.factorization, in.options);
  RunReport rep;
  rep.results["stage1"] = to_json(r.stage1);
  rep.results["stage2"] = r.stage2 ? to_json(*r.stage2) : json();
  rep.results["composition"] = {{"stage2_note", r.stage2_note},
                                {"factorization_error", number(r.factorization_error)},
                                {"k_available", number(r.k_available)},
                                {"stage1_distance", number(r.stage1_distance)},
                                {"stage2_distance", number(r.stage2_distance)},
                                {"final_distance", number(r.final_distance)},
                                {"initial_bits", number(r.initial_bits)},
                                {"final_bits", number(r.final_bits)},
                                {"consumed_bits", number(r.consumed_bits)},
                                {"produced_bits", number(r.produced_bits)},
                                {"dmax_rbw", number(r.dmax_rbw)},
                                {"dmax_rbcw", number(r.dmax_rbcw)},
                                {"m_bound_printed", number(r.m_bound_printed)},
                                {"r1_bound_printed", number(r.r1_bound_printed)},
                                {"r2_bound_printed", number(r.r2_bound_printed)},
                                {"error_budget_printed", number(r.error_budget_printed)}};
  rep.results["summary"] = {{"stage1_distance", number(r.stage1_distance)},
                            {"stage2_distance", number(r.stage2_distance)},
                            {"final_distance", number(r.final_distance)},
                            {"k_available", number(r.k_available)},
                            {"consumed_bits", number(r.consumed_bits)},
                            {"produced_bits", number(r.produced_bits)}};
  add_timings(rep, r.stage1.timings);
  rep.check("stage1_chain_bound", "compression", "final distance <= d_enc + sqrt(1 - (1 - f)^3)", r.stage1.chain_ok);
  if (r.stage2) check_extractor(rep, *r.stage2);
  rep.check("shared_outputs", "extractor", "Alice and Bob extract equal strings", r.stage2_note != "shared outputs differ");
  rep.check("composition_chain", "composition", "final distance <= stage 1 + stage 2 distances", r.chain_ok);
  rep.check("randomness_ledger", "composition", "final - initial bits == produced - consumed", r.ledger_ok);
  return rep;
}

RunReport cmd_family(const ScenarioFile& s, const std::filesystem::path& dir, std::ostream& out) {
  const FamilyInput in = family_input(s);
  const PairwiseFamily fam = build_family(static_cast<std::uint64_t>(in.q), in.n);
  std::ostringstream csv;
  csv << "seed_a,seed_b";
  for (int i = 1; i <= in.n; ++i) csv << ",c_" << i;
  csv << '\n';
  for (std::size_t sd = 0; sd < fam.num_seeds(); ++sd) {
    csv << fam.seed_a(sd) << ',' << fam.seed_b(sd);
    for (int i = 0; i < in.n; ++i) csv << ',' << fam.value(sd, i);
    csv << '\n';
  }
  RunReport rep;
  rep.results = {{"q", in.q}, {"n", in.n}, {"t", fam.t()}, {"seeds", fam.num_seeds()}, {"csv_sha256", sha256_hex(csv.str())}};
  const bool small = fam.num_seeds() <= (std::size_t{1} << 16);
  if (small) {
    const FamilyCheck fc = verify_family(fam);
    rep.results["support"] = fc.support;
    rep.check("support_size", "pairwise-family", "support has exactly q^(t+1) strings",
              fc.support == fam.num_seeds() && fc.distinct);
    rep.check("pairwise_independence", "pairwise-family", "q(c_i, c_j) = 1/q^2 for all i != j",
              fc.pairwise && fc.uniform_marginals);
    rep.check("conditional_slices", "pairwise-family", "every conditional slice is uniform of size q^t",
              fc.slices_uniform);
  } else {
    rep.results["support"] = fam.num_seeds();
    rep.results["note"] = "exhaustive check skipped above 2^16 seeds";
  }
  rep.results["summary"] = {{"q", in.q}, {"n", in.n}, {"t", fam.t()}, {"seeds", fam.num_seeds()}};
#pragma omp critical(qmc_run_dir)
  {
    std::ofstream os(next_free(dir, "family", ".csv"), std::ios::binary);
    os << csv.str();
  }
  out << csv.str();
  return rep;
}

RunReport cmd_rates(const ScenarioFile& s) {
  const RatesInput in = rates_input(s);
  const CompressionScenario& sc = in.scenario;
  const CoherentMeasurement cm = coherent_measure(sc.psi, sc.R, sc.A, sc.B, sc.povm);
  const VnRates post = vn_rates(densify(cm.state()), {{"R"}, {"A"}, {"B"}, {"C"}});
  const VnRates pre = vn_rates(DensityOperator::from_pure(sc.psi), {sc.R, sc.A, sc.B, {}});
  const double hc = cm.p.unaryExpr([](double v) { return -xlog2x(v); }).sum();
  RunReport rep;
  rep.results = {{"S", number(post.S)},
                 {"H_C", number(hc)},
                 {"H_C_given_RB", number(post.H_C_given_RB)},
                 {"I_RC_given_B", number(post.I_RC_given_B)},
                 {"I_AB", number(pre.I_AB)}};
  rep.results["summary"] = rep.results;
  rep.check("conditional_entropy", "entropies", "H(C|RB) >= 0 for classical C", post.H_C_given_RB >= -1e-9);
  rep.check("conditional_information", "entropies", "0 <= I(RC;B) <= H(C)",
            post.I_RC_given_B >= -1e-9 && post.I_RC_given_B <= hc + 1e-9);
  rep.check("mutual_information", "entropies", "I(A;B) >= 0", pre.I_AB >= -1e-9);
  return rep;
}

// Runs one command; exceptions propagate to the caller.
RunReport execute(const std::string& cmd, const ScenarioFile& s, const Extras& x, const std::filesystem::path& dir,
                  std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  if (cmd == "entropy") rep = cmd_entropy(s);
  else if (cmd == "convex-split") rep = cmd_convex_split(s, out);
  else if (cmd == "compress") rep = cmd_compress(s, x);
  else if (cmd == "extract") rep = cmd_extract(s, x);
  else if (cmd == "compose") rep = cmd_compose(s, x);
  else if (cmd == "family") rep = cmd_family(s, dir, out);
  else if (cmd == "rates") rep = cmd_rates(s);
  else throw UsageError("unknown command " + cmd);
  rep.command = cmd;
  rep.timings["total_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

json inputs_of(const ScenarioFile& s, const Extras& x) {
  json in = {{"scenario", s.source}, {"overrides", s.overrides}, {"params_only", x.params_only}};
  if (x.candidates) in["candidates"] = *x.candidates;
  if (x.factorization) in["factorization"] = *x.factorization;
  return in;
}

int status_of(const RunReport& r) { return r.pass() ? 0 : 1; }

void report_failures(const RunReport& r) {
  for (const auto& a : r.assertions)
    if (!a.pass) std::cerr << "assertion failed: " << a.module << '/' << a.name << ": " << a.invariant << '\n';
}

Outcome run_guarded(const std::string& cmd, const ScenarioFile& s, const Extras& x, const std::filesystem::path& dir,
                    std::ostream& out) {
  Outcome o;
  try {
    o.report = execute(cmd, s, x, dir, out);
    o.report->inputs = inputs_of(s, x);
    o.status = status_of(*o.report);
  } catch (const BudgetExceeded& e) {
    o.status = 3;
    o.error = std::string("budget exceeded: ") + e.what();
  } catch (const Error& e) {
    o.status = 2;
    o.error = std::string("error: ") + e.what();
  } catch (const nlohmann::json::exception& e) {
    o.status = 2;
    o.error = std::string("error: ") + e.what();
  }
  return o;
}

ScenarioFile scenario_for(const std::string& cmd, const std::string& path, const std::map<std::string, double>& flags) {
  ScenarioFile s;
  if (path.empty()) {
    if (cmd != "family") throw UsageError(cmd + " needs --scenario");
    s.kind = "family";
    s.source = nullptr;
  } else {
    s = load_scenario(path);
    const bool ok = s.kind == cmd || (cmd == "rates" && s.kind == "compress");
    if (!ok) throw UsageError("scenario kind \"" + s.kind + "\" does not match command " + cmd);
  }
  for (const auto& [k, v] : flags) s.overrides[k] = v;
  return s;
}

int run_single(const std::string& cmd, const std::string& path, const Extras& x) {
  const ScenarioFile s = scenario_for(cmd, path, x.flags);
  const auto dir = run_directory(cmd, inputs_of(s, x));
  std::ostringstream out;
  Outcome o = run_guarded(cmd, s, x, dir, out);
  if (!o.report) {
    std::cerr << o.error << '\n';
    return o.status;
  }
  std::cout << out.str();
  if (out.str().empty()) std::cout << o.report->results["summary"].dump(2) << '\n';
  const auto p = write_report(dir, *o.report);
  std::cerr << "report: " << p.string() << '\n';
  report_failures(*o.report);
  return o.status;
}

const std::map<std::string, std::vector<std::string>>& sweep_columns() {
  static const std::map<std::string, std::vector<std::string>> cols = {
      {"entropy", {"D", "V", "dmax", "dmax_smooth", "dh"}},
      {"convex-split", {"n", "k", "D", "bound"}},
      {"compress", {"n", "b", "m", "r1", "d_enc", "f_ideal", "final_distance", "chain_bound"}},
      {"extract",
       {"k", "eps", "n", "seed_bits", "extracted_bits", "seed_bound", "extracted_guarantee", "D_out", "bound"}},
      {"compose", {"stage1_distance", "stage2_distance", "final_distance", "k_available", "consumed_bits",
                   "produced_bits"}},
      {"family", {"q", "n", "t", "seeds"}},
      {"rates", {"S", "H_C", "H_C_given_RB", "I_RC_given_B", "I_AB"}}};
  return cols;
}

std::string cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  std::ostringstream os;
  os.precision(17);
  if (v.is_number_float()) os << v.get<double>();
  else os << v.dump();
  return os.str();
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || !std::isfinite(v)) throw UsageError("sweep value \"" + item + "\" is not a number");
    out.push_back(v);
  }
  return out;
}

int run_sweep(const std::string& path, const std::string& axis, const std::string& values_text,
              const std::string& csv_path) {
  if (std::find(kOverrideKeys.begin(), kOverrideKeys.end(), axis) == kOverrideKeys.end())
    throw UsageError("sweep axis \"" + axis + "\" is not a numeric override");
  const std::vector<double> values = parse_values(values_text);
  const ScenarioFile base = load_scenario(path);
  const std::string cmd = base.kind;
  const auto& cols = sweep_columns().at(cmd);

  std::vector<Outcome> points(values.size());
  std::vector<ScenarioFile> scen(values.size(), base);
  std::vector<std::string> side(values.size());
  const Extras none;
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(values.size()); ++i) {
    scen[i].overrides[axis] = values[i];
    std::ostringstream out;
    points[i] = run_guarded(cmd, scen[i], none, run_directory(cmd, inputs_of(scen[i], none)), out);
  }

  std::ostringstream csv;
  csv << axis << ",status,pass";
  for (const auto& c : cols) csv << ',' << c;
  csv << '\n';
  int status = 0;
  json rows = json::array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Outcome& o = points[i];
    status = std::max(status, o.status);
    csv << cell(values[i]) << ',' << o.status << ',' << (o.status == 0 ? "true" : "false");
    json row = {{"value", values[i]}, {"status", o.status}};
    for (const auto& c : cols) {
      const json v = o.report ? o.report->results["summary"].value(c, json()) : json();
      csv << ',' << cell(v);
      row[c] = v;
    }
    csv << '\n';
    if (!o.report) {
      row["error"] = o.error;
      std::cerr << axis << '=' << cell(values[i]) << ": " << o.error << '\n';
    } else {
      write_report(run_directory(cmd, o.report->inputs), *o.report);
      report_failures(*o.report);
    }
    rows.push_back(row);
  }

  RunReport sweep;
  sweep.command = "sweep";
  sweep.inputs = {{"scenario", base.source}, {"axis", axis}, {"values", values}};
  sweep.results = {{"kind", cmd}, {"rows", rows}};
  if (cmd == "convex-split" && axis == "n") {
    bool nonincreasing = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (rows[i]["D"].is_number() && rows[i - 1]["D"].is_number() &&
          rows[i]["D"].get<double>() > rows[i - 1]["D"].get<double>() + 1e-12)
        nonincreasing = false;
    sweep.results["D_nonincreasing"] = nonincreasing;
  }
  const auto dir = run_directory("sweep", sweep.inputs);
  const auto csv_file = next_free(dir, "sweep", ".csv");
  std::ofstream(csv_file, std::ios::binary) << csv.str();
  if (!csv_path.empty()) {
    std::ofstream os(csv_path, std::ios::binary);
    if (!os) throw UsageError("cannot write " + csv_path);
    os << csv.str();
  }
  std::cout << csv.str();
  std::cerr << "report: " << write_report(dir, sweep).string() << '\n';
  return status;
}

void numeric_flag(CLI::App* sub, Extras& x, const std::string& key, const std::string& help) {
  sub->add_option_function<double>("--" + key, [&x, key](const double& v) { x.flags[key] = v; }, help);
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"qmc: one-shot measurement compression toolkit"};
  app.require_subcommand(1);
  Extras x;
  std::string scenario, factorization_file, candidates_file, axis, values, csv_out;

  auto* entropy = app.add_subcommand("entropy", "relative entropies of a state pair");
  auto* convex = app.add_subcommand("convex-split", "convex-split lemma check");
  auto* compress = app.add_subcommand("compress", "measurement compression protocol");
  auto* extract = app.add_subcommand("extract", "seeded extractor from the pairwise convex split");
  auto* compose = app.add_subcommand("compose", "compression without feedback");
  auto* family = app.add_subcommand("family", "pairwise-independent family table as CSV");
  auto* rates = app.add_subcommand("rates", "von Neumann rate formulas");
  auto* sweep = app.add_subcommand("sweep", "run a scenario over a list of override values");

  for (auto* sub : {entropy, convex, compress, extract, compose, rates, sweep})
    sub->add_option("--scenario", scenario, "scenario file (.qmc.json)")->required();
  family->add_option("--scenario", scenario, "scenario file (.qmc.json)");

  numeric_flag(entropy, x, "eps", "smoothing and test parameter");
  numeric_flag(convex, x, "n", "number of side registers");
  for (const char* k : {"n", "b", "eps", "blocks"}) numeric_flag(compress, x, k, "override");
  compress->add_option("--candidates", candidates_file, "converse candidates on B C (JSON list of matrices)");
  compress->add_flag("--params-only", x.params_only, "parameters and accounting only");
  numeric_flag(extract, x, "k", "min-entropy promise");
  numeric_flag(extract, x, "eps", "extractor error");
  extract->add_option("--table", x.table_path, "write the (j, c, u1) -> (seed, ubar, v) table as CSV");
  for (const char* k : {"n", "b", "eps", "delta"}) numeric_flag(compose, x, k, "override");
  compose->add_option("--factorization", factorization_file, "factorization file");
  numeric_flag(family, x, "q", "alphabet size (prime power)");
  numeric_flag(family, x, "n", "positions");
  sweep->add_option("--axis", axis, "override to vary (n, b, eps, k, delta, q, blocks)")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();
  sweep->add_option("--csv", csv_out, "also write the CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!candidates_file.empty()) x.candidates = read_json_file(candidates_file);
    if (!factorization_file.empty()) x.factorization = read_json_file(factorization_file);
    if (sweep->parsed()) return run_sweep(scenario, axis, values, csv_out);
    const CLI::App* sub = app.get_subcommands().front();
    return run_single(sub->get_name(), scenario, x);
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace qmc::cli
