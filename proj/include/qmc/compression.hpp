#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qmc/convex_split.hpp"
#include "qmc/cq_state.hpp"
#include "qmc/entropies.hpp"

namespace qmc {

struct Povm {
  std::vector<Mat> elements;

  int outcomes() const { return static_cast<int>(elements.size()); }
  int dim() const { return elements.empty() ? 0 : static_cast<int>(elements[0].rows()); }
  void validate(double tol = 1e-10) const;
};

// sum_c sqrt(p(c)) |c>_C |c>_Cbar |psi^c>_RAB, with R, A, B each merged into
// one register.
struct CoherentMeasurement {
  RVec p;
  std::vector<Vec> psi;  // normalized, R A B order; zero vector where p(c) < 1e-14
  int dR = 1, dA = 1, dB = 1;

  int alphabet() const { return static_cast<int>(p.size()); }
  int dim_rab() const { return dR * dA * dB; }
  RegList rab_regs() const;
  // C and Cbar classical, RAB quantum.
  CqState state() const;
  // Dense marginals used by the parameter choice. C is always last, except
  // in cb() where it comes first.
  Mat rbc() const;  // R B C
  Mat rb() const;
  Mat cb() const;   // C B (block diagonal over C)
  Mat b() const;
};

// Applies the canonical Kraus operators sqrt(Lambda_c) to A.
CoherentMeasurement coherent_measure(const StateVector& psi, const std::vector<std::string>& R,
                                     const std::vector<std::string>& A, const std::vector<std::string>& B,
                                     const Povm& povm);

// Pads the outcome alphabet with zero-probability symbols.
CoherentMeasurement pad_alphabet(const CoherentMeasurement& cm, int size);

struct CompressionScenario {
  StateVector psi;
  std::vector<std::string> R, A, B;
  Povm povm;
  double eps = 0.05;
  std::optional<RVec> sigma;  // explicit sigma_C; uniform on the padded alphabet otherwise
  std::optional<int> n, b;
  std::uint64_t seed = 0;
};

struct UhlmannResult {
  Mat V;  // isometry X -> Y (Y possibly padded)
  double overlap = 0.0;
  int padded_dim = 0;  // dim Y after padding
};

// Source |phi> = sum S_{ix} |i>|x>, target |psi> = sum T_{iy} |i>|y>.
// V maximizes |<psi|(I (x) V)|phi>| via the polar part of T^dag S.
UhlmannResult uhlmann_branch_isometry(const Mat& S, const Mat& T);

struct Params {
  double k = 0.0;          // smooth dmax(Psi_RBC || Psi_RB (x) sigma_C), certified upper bound
  double k_prime_upper = 0.0;
  double dh = 0.0;         // dh_eps(Psi_BC || Psi_B (x) sigma_C) at eps^2
  double n_theorem = 0.0;  // ceil(8 2^k / eps^5), as a real (may be astronomically large)
  double b_theorem = 0.0;
  int n = 0;
  int b = 0;
  bool desk_scale = false;
  bool n_rounded = false;  // n raised to a multiple of b
};

struct DecoderPlan {
  std::vector<Mat> blocks;  // Pi^{(c)} on B
  double typeI = 0.0;
  double typeII = 0.0;
  double dh = 0.0;
  double eps2 = 0.0;
};

DecoderPlan make_decoder(const CoherentMeasurement& cm, const RVec& sigma, double eps2);
// Square-root measurement for the classical values cs on positions 1..b.
// Entry 0 is the failure outcome (I - support projector of Pi).
std::vector<Mat> decoder_kraus(const DecoderPlan& plan, const std::vector<int>& cs);

struct CompressionReport {
  Params params;
  int qc = 0;                  // C alphabet (after padding)
  int q_base = 0;              // family alphabet
  int t = 0;
  std::size_t seeds = 0;
  int m = 0;
  double r1 = 0.0;
  double r2_proof = 0.0;       // log n + log |C|
  double r2_printed = 0.0;     // 2 log|C| + dmax_eps(Psi_RBC || Psi_RB (x) I_C) + log 8/eps^5
  double net_consumed = 0.0;   // r1 - r2_proof
  double m_bound_printed = 0.0;
  double m_bound_corrected = 0.0;
  double r1_bound_printed = 0.0;
  double r1_bound_corrected = 0.0;

  double d_enc = 0.0;           // P(encoded, mu), from the achieved overlaps
  double d_enc_marginal = 0.0;  // P(xi, mu) on RB and the classical strings
  double gamma_sum = 0.0;
  double theta_norm_error = 0.0;
  double f_ideal = 0.0;         // decoder failure on mu
  double f_real = 0.0;
  double hn_bound = 0.0;        // 2 typeI + 4 (b-1) typeII
  double claim_distance = 0.0;  // P(Phi^1, mu^ideal)
  double claim_bound = 0.0;     // sqrt(1 - (1 - f)^3)
  double final_distance = 0.0;  // P(Phi', mu^ideal)
  double target_distance = 0.0; // P(Phi'_{RABC1C1'}, Psi_RABCC')
  double chain_bound = 0.0;     // d_enc + claim_bound
  double pad_mass = 0.0;
  double decoder_completeness = 0.0;

  bool enc_ok = false;
  bool gamma_ok = false;
  bool hn_ok = false;
  bool chain_ok = false;
  bool theorem_ok = true;       // m, r1 within the corrected bounds, r2 above the printed one (theorem mode only)
  bool simulated = false;

  std::map<std::string, double> timings;
  std::optional<CqState> final_state;
};

struct ProtocolOptions {
  Exec exec = Exec::parallel;
  bool keep_final_state = false;
  // Fill parameters and randomness accounting only; no simulation.
  bool params_only = false;
};

inline constexpr double kProtocolBudget = static_cast<double>(std::uint64_t{1} << 26);

Params choose_params(const CompressionScenario& sc);
CompressionReport run_protocol(const CompressionScenario& sc, const ProtocolOptions& opt = {});

struct RecycleReport {
  std::vector<CompressionReport> blocks;
  double cumulative_distance = 0.0;
  double bound = 0.0;           // sum of per-block distances
  double topup_bits = 0.0;      // per block after the first
  std::vector<double> consumed_bits;
  bool pass = false;
};

// Exact joint simulation; uniform sigma_C only, n q must divide the seed count.
RecycleReport run_recycled_blocks(const CompressionScenario& sc, int blocks);

struct ConverseEstimate {
  std::vector<double> per_candidate;
  double estimate = 0.0;
  bool heuristic = true;
};

// min over candidates of dmax_eps+delta(Psi_RBC || Psi_R (x) sigma_BC) - dmax_delta(Psi_RB || Psi_R (x) Psi_B).
// Candidates are on B C (B first). An empty list uses {Psi_BC, Psi_B (x) Psi_C}.
ConverseEstimate converse_estimate(const CoherentMeasurement& cm, double eps, double delta,
                                   const std::vector<Mat>& candidates = {});

struct PgmResult {
  double fidelity = 0.0;
  double p_correct = 0.0;  // sum_i lambda_i p_{i|i}
  double bound = 0.0;      // p_correct^{3/2}
  bool pass = false;
  CqState post;            // sum_i P_i rho P_i (x) |i><i|, O classical
};

PgmResult pretty_good_measure(const RVec& lambda, const std::vector<Mat>& rho, const std::vector<Mat>& P);

// F(rho, A rho A / Tr A^2 rho) and sqrt(Tr A^2 rho).
struct GentleCheck {
  double fidelity = 0.0;
  double bound = 0.0;
};
GentleCheck gentle_measurement(const Mat& rho, const Mat& A);

// Smallest eigenvalue of 2(I - S) + 4T - (I - (S+T)^{-1/2} S (S+T)^{-1/2}).
double hayashi_nagaoka_gap(const Mat& S, const Mat& T);

}  // namespace qmc
