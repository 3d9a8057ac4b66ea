#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmc/compression.hpp"
#include "qmc/convex_split.hpp"
#include "qmc/cq_state.hpp"
#include "qmc/pairwise_family.hpp"

namespace qmc {

// Seeded extractor built from the pairwise convex split. The source register
// C is embedded in q = 2^ceil(log|C|) symbols; n is rounded up to a power of
// two so that C_1..C_{t+1} splits exactly into (Ubar, V).
struct ExtractorParams {
  int alphabet = 0;  // |C| as given
  int q = 0;         // after embedding
  double k = 0.0;
  double eps = 0.0;
  std::uint64_t n_formula = 0;  // ceil(q 2^-k / eps)
  int n = 0;
  bool n_rounded = false;
  int t = 0;
  std::uint64_t u1_size = 0;  // q^t
  std::uint64_t j_size = 0;   // n
  std::uint64_t ubar_size = 0;
  std::uint64_t v_size = 0;
  double split_error = 0.0;
  double seed_bits = 0.0;
  double extracted_bits = 0.0;
  double seed_bound = 0.0;          // 2 log q - k + 2 log(1/eps)
  double extracted_guarantee = 0.0; // k - log(1/eps) - 1
  bool seed_ok = false;
  bool extracted_ok = false;
};

class ExtractorPlan {
 public:
  const ExtractorParams& params() const { return params_; }
  bool materialized() const { return family_.has_value(); }
  const PairwiseFamily& family() const;

  // W1: (j, c, u1) -> seed of the family string with value c at position j.
  std::uint32_t w1(int j, int c, std::uint64_t u1) const;
  std::uint64_t w1_inverse(std::uint32_t seed, int j) const;  // u1 index
  // W2: seed -> digits of C_1..C_{t+1} (C_1 most significant).
  std::uint64_t w2(std::uint32_t seed) const { return w2_[seed]; }
  std::uint32_t w2_inverse(std::uint64_t digits) const { return w2_inv_[digits]; }
  bool w2_is_prefix() const { return w2_prefix_; }

  // digits -> (ubar, v), digits = ubar * |V| + v.
  std::pair<std::uint64_t, std::uint64_t> split(std::uint64_t digits) const;

  // Both tables are permutations and their inverses recover every index.
  bool involution_ok() const;

 private:
  friend ExtractorPlan build_plan(int alphabet, double k, double eps);
  ExtractorParams params_;
  std::optional<PairwiseFamily> family_;
  std::vector<std::uint32_t> w1_;      // ((j * q) + c) * |U1| + u1
  std::vector<std::uint32_t> w1_inv_;  // seed * n + j
  std::vector<std::uint64_t> w2_;
  std::vector<std::uint32_t> w2_inv_;
  bool w2_prefix_ = false;
};

// Tables are built only when q^{t+1} * n <= 2^22; otherwise only the
// parameters are filled in.
inline constexpr std::uint64_t kPlanBudget = std::uint64_t{1} << 22;
ExtractorPlan build_plan(int alphabet, double k, double eps);
ExtractorParams extractor_params(int alphabet, double k, double eps);

struct ExtractorReport {
  ExtractorParams params;
  double dmax_identity = 0.0;  // dmax(Psi_GC || Psi_G (x) I_C)
  double k_eff = 0.0;          // dmax(Psi_GC || Psi_G (x) uniform_C)
  bool eligible = false;
  double D_out = 0.0;
  double bound = 0.0;          // log2(1 + 2^k_eff / n)
  double trace_distance = 0.0;
  double purified_distance = 0.0;
  double ubar_uniform_gap = 0.0;   // max |P(ubar) - 1/|Ubar||
  double independence_gap = 0.0;   // max |P(v, ubar) - P(v) P(ubar)|
  bool bound_ok = false;
  bool pinsker_ok = false;
  bool pass = false;
};

struct ExtractorResult {
  CqState output;  // classical V, Ubar, Cp (= J); quantum G
  ExtractorReport report;
};

// source: classical register `creg` (the extractor input) and quantum G.
// Other classical registers are not allowed.
ExtractorResult run_extractor(const CqState& source, const std::string& creg, const ExtractorPlan& plan,
                              Exec exec = Exec::parallel);

struct SharedResult {
  CqState output;  // classical V, Ubar, Vp, Ubarp; quantum G
  ExtractorReport report;
  bool outputs_equal = false;  // every key has V = Vp and Ubar = Ubarp
};

// source: classical registers `creg` and `creg_copy` carrying equal values.
SharedResult run_shared_variant(const CqState& source, const std::string& creg, const std::string& creg_copy,
                                const ExtractorPlan& plan, Exec exec = Exec::parallel);

// Measurement compression without feedback.
struct Factorization {
  Povm w_povm;                 // M on A with outcomes w
  std::vector<RVec> p_c_given_w;  // one distribution over C per w
  std::optional<Povm> target;  // N on A; checked against sum_w p(c|w) M_w
};

struct CompositionOptions {
  double delta = 0.5;
  std::optional<double> extractor_eps;  // default delta^2
  Exec exec = Exec::parallel;
};

struct CompositionReport {
  CompressionReport stage1;
  std::optional<ExtractorReport> stage2;
  std::string stage2_note;
  double factorization_error = 0.0;
  double k_available = 0.0;  // -dmax(Psi_{G W} || Psi_G (x) I_W), G = R B C'
  double stage1_distance = 0.0;
  double stage2_distance = 0.0;
  double final_distance = 0.0;
  bool chain_ok = false;
  // Randomness ledger in bits.
  double initial_bits = 0.0;
  double final_bits = 0.0;
  double consumed_bits = 0.0;  // stage 1: r1 - r2
  double produced_bits = 0.0;  // stage 2: log |V|
  bool ledger_ok = false;
  // Bounds as displayed, evaluated with exact dmax (no smoothing).
  double dmax_rbw = 0.0;   // dmax(Psi_RBW || Psi_RB (x) I_W)
  double dmax_rbcw = 0.0;  // dmax(Psi_RBCW || Psi_RBC (x) I_W)
  double m_bound_printed = 0.0;
  double r1_bound_printed = 0.0;
  double r2_bound_printed = 0.0;
  double error_budget_printed = 0.0;  // 10 eps + 3 delta
  bool pass = false;
};

// sc.povm is ignored; sc.sigma must be unset (uniform over W).
CompositionReport compress_without_feedback(const CompressionScenario& sc, const Factorization& fac,
                                            const CompositionOptions& opt = {});

}  // namespace qmc
