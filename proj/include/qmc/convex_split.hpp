#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qmc/cq_state.hpp"
#include "qmc/pairwise_family.hpp"

namespace qmc {

// rho_PQ = sum_c p(c) rho^c_P (x) |c><c|_Q
struct CqSource {
  RVec p;
  std::vector<Mat> rho;  // normalized; zero matrix where p(c) = 0
  RegList p_regs;

  int alphabet() const { return static_cast<int>(p.size()); }
  int dim_p() const { return rho.empty() ? 0 : static_cast<int>(rho[0].rows()); }
  Mat marginal() const;
  // Dense rho_PQ with P first.
  Mat dense() const;

  static CqSource from_state(const CqState& s, const std::string& classical_reg);
};

// Side distribution over Q_1..Q_n: a lifted pairwise family (identity lift
// for the uniform case).
RVec side_marginal(const LiftedFamily& fam);

// dmax(rho_PQ || rho_P (x) sigma_Q), block by block.
double convex_split_k(const CqSource& src, const RVec& sigma);

// tau over classical Q1..Qn and the P registers.
CqState build_tau(const CqSource& src, const LiftedFamily& fam);
CqState build_tau_iid(const CqSource& src, const RVec& sigma, int n);

struct LemmaCheck {
  double D = 0.0;
  double k = 0.0;
  double bound = 0.0;        // log2(1 + 2^k/n)
  double proof_bound = 0.0;  // log2(1 + (2^k - 1)/n)
  std::size_t blocks = 0;
  bool pass = false;
};

enum class Exec { serial, parallel };

LemmaCheck verify_pairwise(const CqSource& src, const LiftedFamily& fam, Exec exec = Exec::parallel);
// sigma^{(x) n} side registers, summed over type classes.
LemmaCheck verify_iid(const CqSource& src, const RVec& sigma, int n, Exec exec = Exec::parallel);

// Number of type classes of length-n strings over q symbols.
std::uint64_t type_count(int q, int n);
// Calls f(counts) for every composition of n into q parts, in lexicographic order.
std::vector<std::vector<int>> enumerate_types(int q, int n);

struct CoveringResult {
  double mean = 0.0;
  double stderr_ = 0.0;
  double bound = 0.0;  // sqrt(2^k / n)
  double k = 0.0;
  bool exact = false;
  bool pass = false;
};

// E || (1/n) sum rho^{c_i} - rho_P ||_1 under c ~ p^n (sigma = rho_Q).
CoveringResult covering_check(const CqSource& src, int n, int trials, std::uint64_t seed);

struct CorollaryCheck {
  double eps = 0.0;
  double delta = 0.0;
  double k_witness = 0.0;
  double witness_distance = 0.0;
  int n = 0;
  double P = 0.0;
  double bound = 0.0;  // 2 eps + delta
  bool pass = false;
};

// Smoothed form with a uniform pairwise side distribution over q = alphabet
// (must be a prime power).
CorollaryCheck corollary_check(const CqSource& src, double eps, double delta);

// Purified distance between tau and rho_P (x) sigma-bar for a pairwise side distribution.
double tau_purified_distance(const CqSource& src, const LiftedFamily& fam);

struct Fact9Check {
  double D = 0.0;
  double bound = 0.0;
  bool pass = false;
};

// Fully quantum convex split with sigma^{(x) n} side registers, dense; tiny
// dimensions only.
Fact9Check fact9_dense(const Mat& rho_pq, int dim_p, int dim_q, const Mat& sigma_q, int n);

}  // namespace qmc
