#include <doctest.h>

#include <cmath>
#include <numeric>

#include "qmc/convex_split.hpp"
#include "qmc/entropies.hpp"
#include "qmc/extractor.hpp"
#include "qmc/random_states.hpp"
#include "scenarios.hpp"

using namespace qmc;

namespace {

// D of the output computed straight from the family strings: the block at
// seed s is (1/(n q^t)) sum_j p(s_j) rho_{s_j}.
double direct_d_out(const CqSource& src, const PairwiseFamily& fam) {
  const std::size_t S = fam.num_seeds();
  const int n = fam.n();
  const Mat g = src.marginal();
  double D = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    Mat blk = Mat::Zero(g.rows(), g.cols());
    for (int j = 0; j < n; ++j) {
      const int c = fam.value(s, j);
      if (c < src.alphabet()) blk += src.p[c] * src.rho[c];
    }
    blk /= n * static_cast<double>(S / fam.q());
    D += rel_entropy_unnormalized(blk, g / static_cast<double>(S));
  }
  return D;
}

LiftedFamily identity_lift(const PairwiseFamily& f) {
  std::vector<int> id(f.q());
  std::iota(id.begin(), id.end(), 0);
  return lift_marginal(f, id, static_cast<int>(f.q()));
}

}  // namespace

TEST_CASE("plan parameters follow the extractor arithmetic") {
  const ExtractorPlan big = build_plan(1 << 10, 6.0, 0.25);
  const auto& p = big.params();
  CHECK(p.n == 64);
  CHECK(p.t == 1);
  CHECK(p.seed_bits == doctest::Approx(16.0));
  CHECK(p.seed_bound == doctest::Approx(18.0));
  CHECK(p.extracted_bits == doctest::Approx(4.0));
  CHECK(p.extracted_guarantee == doctest::Approx(3.0));
  CHECK(p.seed_ok);
  CHECK(p.extracted_ok);
  CHECK_FALSE(big.materialized());

  // k = log(1/eps) + 1: the guarantee is 0 bits, one bit comes out.
  const auto edge = extractor_params(16, 3.0, 0.25);
  CHECK(edge.n == 8);
  CHECK(edge.extracted_guarantee == doctest::Approx(0.0));
  CHECK(edge.extracted_bits == doctest::Approx(1.0));

  const auto tiny = extractor_params(2, 1.0, 0.5);
  CHECK(tiny.n == 2);
  CHECK(tiny.extracted_bits == doctest::Approx(0.0));
  CHECK(tiny.v_size == 1);

  const auto rounded = extractor_params(16, 2.5, 0.25);
  CHECK(rounded.n_formula == 12);
  CHECK(rounded.n == 16);
  CHECK(rounded.n_rounded);

  CHECK_THROWS_AS(build_plan(16, 0.0, 0.25), ValidationError);
  CHECK_THROWS_AS(build_plan(16, 4.5, 0.25), ValidationError);
  CHECK_THROWS_AS(build_plan(16, 1.0, 0.25), ValidationError);  // n would exceed |C|
  CHECK_THROWS_AS(build_plan(16, 2.0, 1.0), ValidationError);
}

TEST_CASE("accounting holds on a parameter grid") {
  for (int lq = 1; lq <= 10; ++lq)
    for (double eps : {0.5, 0.25, 0.1, 0.01})
      for (double k = 0.25; k <= lq; k += 0.25) {
        if (k < std::log2(1.0 / eps)) continue;
        const auto p = extractor_params(1 << lq, k, eps);
        CAPTURE(lq);
        CAPTURE(k);
        CAPTURE(eps);
        CHECK(p.split_error == 0.0);
        CHECK(p.seed_ok);
        CHECK(p.extracted_ok);
        CHECK(p.ubar_size * p.v_size == static_cast<std::uint64_t>(std::pow(p.q, p.t + 1) + 0.5));
      }
}

TEST_CASE("W1 and W2 are permutations matching the conditional slices") {
  for (auto [q, k, eps] : {std::tuple{4, 1.0, 0.5}, std::tuple{8, 2.0, 0.5}, std::tuple{16, 2.0, 0.3},
                           std::tuple{16, 4.0, 0.1}}) {
    const ExtractorPlan plan = build_plan(q, k, eps);
    REQUIRE(plan.materialized());
    CHECK(plan.involution_ok());
    CHECK(plan.w2_is_prefix());
    const auto& f = plan.family();
    for (int j = 0; j < f.n(); ++j)
      for (int c = 0; c < q; ++c) {
        const Slice sl = conditional_slice(f, j, c);
        REQUIRE(sl.seeds.size() == plan.params().u1_size);
        for (std::size_t u = 0; u < sl.seeds.size(); ++u) CHECK(plan.w1(j, c, u) == sl.seeds[u]);
      }
  }
}

TEST_CASE("product source with uniform C gives zero error") {
  Rng rng(11);
  for (int q : {2, 4, 8, 16}) {
    const Mat g = random_density(rng, 3);
    const RVec p = RVec::Constant(q, 1.0 / q);
    const CqState src = scen::source_state(p, std::vector<Mat>(q, g));
    const double k = std::log2(q);
    const ExtractorPlan plan = build_plan(q, k, 0.5);
    const auto res = run_extractor(src, "C", plan);
    CAPTURE(q);
    CHECK(res.report.eligible);
    CHECK(res.report.D_out <= 1e-12);
    CHECK(res.report.trace_distance <= 1e-12);
    CHECK(res.report.ubar_uniform_gap <= 1e-15);
    CHECK(res.report.independence_gap <= 1e-15);
    CHECK(res.report.pass);
  }
}

TEST_CASE("deterministic source is refused for k > 0") {
  Rng rng(3);
  RVec p = RVec::Zero(4);
  p[2] = 1.0;
  std::vector<Mat> rho(4, random_density(rng, 2));
  const CqState src = scen::source_state(p, rho);
  const ExtractorPlan plan = build_plan(4, 1.0, 0.5);
  CHECK_THROWS_AS(run_extractor(src, "C", plan), ValidationError);
}

TEST_CASE("fixed source with qubit side information") {
  Rng rng(5);
  RVec p(4);
  p << 0.5, 1.0 / 6, 1.0 / 6, 1.0 / 6;
  std::vector<Mat> rho;
  for (int c = 0; c < 4; ++c) rho.push_back(random_density(rng, 2));
  const CqState src = scen::source_state(p, rho);
  const CqSource cs = CqSource::from_state(src, "C");
  const double dmax_id = convex_split_k(cs, RVec::Constant(4, 0.25)) - 2.0;
  const double k = -dmax_id;
  REQUIRE(k > 0.0);
  const ExtractorPlan plan = build_plan(4, k, std::min(0.99, 1.01 * std::exp2(-k)));
  const auto res = run_extractor(src, "C", plan);
  CHECK(res.report.dmax_identity == doctest::Approx(dmax_id).epsilon(1e-12));
  CHECK(res.report.D_out <= res.report.bound + 1e-8);
  CHECK(res.report.D_out == doctest::Approx(direct_d_out(cs, plan.family())).epsilon(1e-9));
}

TEST_CASE("random eligible sources meet the bound and agree with the convex split") {
  Rng rng(2024);
  for (int it = 0; it < 24; ++it) {
    const int q = 4 << (it % 3);
    const int dg = 2 + it % 2;
    const auto ec = scen::eligible_source(rng, q, dg);
    const ExtractorPlan plan = build_plan(ec.alphabet, ec.k, ec.eps);
    const auto res = run_extractor(ec.source, "C", plan);
    CAPTURE(it);
    CHECK(res.report.bound_ok);
    CHECK(res.report.pinsker_ok);
    CHECK(res.report.purified_distance <= std::sqrt(res.report.D_out) + 1e-9);
    // The relabelling is a bijection, so D equals the convex-split divergence.
    const CqSource cs = CqSource::from_state(ec.source, "C");
    const LemmaCheck lc = verify_pairwise(cs, identity_lift(plan.family()));
    CHECK(res.report.D_out == doctest::Approx(lc.D).epsilon(1e-9));
    CHECK(res.report.k_eff == doctest::Approx(lc.k).epsilon(1e-9));
    CHECK(res.output.total_weight() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("serial and parallel runs agree exactly") {
  Rng rng(8);
  const auto ec = scen::eligible_source(rng, 8, 3);
  const ExtractorPlan plan = build_plan(ec.alphabet, ec.k, ec.eps);
  const auto a = run_extractor(ec.source, "C", plan, Exec::serial);
  const auto b = run_extractor(ec.source, "C", plan, Exec::parallel);
  CHECK(a.report.D_out == b.report.D_out);
  REQUIRE(a.output.blocks().size() == b.output.blocks().size());
  auto ib = b.output.blocks().begin();
  for (const auto& [key, blk] : a.output.blocks()) {
    CHECK(key == ib->first);
    CHECK(blk.weight == ib->second.weight);
    CHECK((blk.rho - ib->second.rho).norm() == 0.0);
    ++ib;
  }
}

TEST_CASE("shared randomness variant") {
  Rng rng(21);
  SUBCASE("correlated uniform source with trivial G") {
    CqState s({classical("C", 4), classical("Cp", 4)}, {quantum("G", 1)});
    for (int c = 0; c < 4; ++c) s.add({c, c}, 0.25, Mat::Identity(1, 1));
    const ExtractorPlan plan = build_plan(4, 2.0, 0.5);
    const auto res = run_shared_variant(s, "C", "Cp", plan);
    CHECK(res.outputs_equal);
    CHECK(res.report.D_out <= 1e-12);
  }
  SUBCASE("eligible source: outputs equal and report matches single party") {
    const auto ec = scen::eligible_source(rng, 8, 2);
    CqState s({classical("C", 8), classical("Cp", 8)}, ec.source.quantum_regs());
    for (const auto& [k, b] : ec.source.blocks()) s.add({k[0], k[0]}, b.weight, b.rho);
    const ExtractorPlan plan = build_plan(ec.alphabet, ec.k, ec.eps);
    const auto shared = run_shared_variant(s, "C", "Cp", plan);
    const auto single = run_extractor(ec.source, "C", plan);
    CHECK(shared.outputs_equal);
    CHECK(shared.report.D_out == single.report.D_out);
    for (const auto& [key, blk] : shared.output.blocks()) {
      CHECK(key[0] == key[2]);
      CHECK(key[1] == key[3]);
    }
  }
  SUBCASE("copy violation") {
    CqState s({classical("C", 2), classical("Cp", 2)}, {quantum("G", 1)});
    s.add({0, 1}, 0.5, Mat::Identity(1, 1));
    s.add({1, 1}, 0.5, Mat::Identity(1, 1));
    CHECK_THROWS_AS(run_shared_variant(s, "C", "Cp", build_plan(2, 1.0, 0.5)), ValidationError);
  }
}

TEST_CASE("seed registers are not independent of V for skewed sources") {
  // Documented behaviour: Ubar is uniform and independent only up to the
  // extractor error; the gap is reported, not assumed to be zero.
  Rng rng(77);
  const auto ec = scen::eligible_source(rng, 8, 2);
  const auto res = run_extractor(ec.source, "C", build_plan(ec.alphabet, ec.k, ec.eps));
  CHECK(res.report.ubar_uniform_gap <= res.report.trace_distance + 1e-12);
  CHECK(res.report.independence_gap <= 2.0 * res.report.trace_distance + 1e-12);
}

namespace {

// |Psi>_RAB with one qubit each.
CompressionScenario qubit_scenario(Rng& rng, double eps) {
  return scen::make(random_pure(rng, 8), 2, 2, 2, scen::trivial_povm(2), eps);
}

}  // namespace

TEST_CASE("composition with W = C") {
  Rng rng(99);
  CompressionScenario sc = qubit_scenario(rng, 0.3);
  sc.n = 8;
  sc.b = 2;
  Factorization fac;
  fac.w_povm = scen::random_povm(rng, 2, 2);
  fac.p_c_given_w = {RVec::Unit(2, 0), RVec::Unit(2, 1)};
  fac.target = fac.w_povm;
  const auto rep = compress_without_feedback(sc, fac);
  CHECK(rep.factorization_error <= 1e-12);
  CHECK_FALSE(rep.stage2.has_value());
  CHECK(rep.stage2_distance <= 1e-7);
  CHECK(rep.chain_ok);
  CHECK(rep.ledger_ok);
  // Dropping A and Alice's W can only bring the state closer to the target.
  CHECK(rep.final_distance <= rep.stage1.final_distance + 1e-9);
  CHECK(rep.pass);
}

TEST_CASE("composition with a split W extracts randomness") {
  Rng rng(5);
  CompressionScenario sc = qubit_scenario(rng, 0.3);
  sc.n = 8;
  sc.b = 2;
  const Povm base = scen::random_povm(rng, 2, 2);
  Factorization fac;
  for (int w = 0; w < 8; ++w) {
    fac.w_povm.elements.push_back(base.elements[w % 2] / 4.0);
    fac.p_c_given_w.push_back(RVec::Unit(2, w % 2));
  }
  fac.target = base;
  CompositionOptions opt;
  opt.delta = std::sqrt(0.5);
  const auto rep = compress_without_feedback(sc, fac, opt);
  CHECK(rep.k_available == doctest::Approx(2.0).epsilon(1e-9));
  REQUIRE(rep.stage2.has_value());
  CHECK(rep.stage2->params.extracted_bits == doctest::Approx(1.0));
  CHECK(rep.stage2->bound_ok);
  CHECK(rep.stage2_distance <= std::sqrt(rep.stage2->D_out) + 1e-9);
  CHECK(rep.chain_ok);
  CHECK(rep.ledger_ok);
  CHECK(rep.produced_bits == 1.0);
  CHECK(rep.pass);
}

TEST_CASE("coarse-grained factorization") {
  Rng rng(17);
  CompressionScenario sc = qubit_scenario(rng, 0.3);
  sc.n = 8;
  sc.b = 2;
  Factorization fac;
  fac.w_povm = scen::random_povm(rng, 2, 2);
  RVec r0(3), r1(3);
  r0 << 0.5, 0.5, 0.0;
  r1 << 0.0, 0.25, 0.75;
  fac.p_c_given_w = {r0, r1};
  Povm n3;
  for (int c = 0; c < 3; ++c) n3.elements.push_back(r0[c] * fac.w_povm.elements[0] + r1[c] * fac.w_povm.elements[1]);
  fac.target = n3;
  const auto rep = compress_without_feedback(sc, fac);
  CHECK(rep.factorization_error <= 1e-12);
  CHECK(rep.final_distance <= rep.stage1_distance + rep.stage2_distance + 1e-6);
  CHECK(rep.ledger_ok);

  n3.elements[0] += 1e-6 * Mat::Identity(2, 2);
  n3.elements[1] -= 1e-6 * Mat::Identity(2, 2);
  fac.target = n3;
  CHECK_THROWS_AS(compress_without_feedback(sc, fac), ValidationError);
}
