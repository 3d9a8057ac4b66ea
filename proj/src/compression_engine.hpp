#pragma once

// Shared internals of the protocol simulator (single run and recycling).

#include <optional>
#include <vector>

#include "qmc/compression.hpp"

namespace qmc::detail {

// One classical outcome of a seed branch. j and jp are 0-based; jp == n is
// the decoder's failure sentinel. Pad outcomes (j >= n) are only counted.
struct Rec {
  int c1, c1p, c2, c2p, j, jp;
  double prob;  // squared norm of the unnormalized post state
  double ov;    // |<psi^{c1}|v>|^2 when c1 == c1p, else 0
  bool match;   // key has the ideal pattern c1 = c1p, c2 = c2p, j = jp
  bool correct;
};

struct BranchOut {
  std::vector<Rec> recs;
  std::vector<Vec> vecs;  // R A B order, aligned with recs when requested
  double gamma = 0.0;
  double overlap = 0.0;      // |<theta|(I (x) U)|Psi>|
  double fid_marginal = 0.0; // F(Psi_RB, theta_RB)
  double theta_norm_error = 0.0;
  double pad = 0.0;
  double completeness = 0.0;  // max ||sum K^dag K - I|| over the decoders used
};

class Engine {
 public:
  Engine(const CompressionScenario& sc, const Params& params);

  // Alice holds the string of seed sA, Bob the string of seed sB. In ideal
  // mode the branch starts from theta instead of the encoded state.
  BranchOut run(std::size_t sA, std::size_t sB, bool ideal, bool keep_vectors) const;

  double ideal_weight(int c1, int c2) const { return cm.p[c1] * sigma[c2] / n; }

  CoherentMeasurement cm;  // padded to qc
  RVec sigma;
  int qc = 0;
  int Q = 0;
  int n = 0;
  int b = 0;
  int Jd = 0;  // J dimension, n unless padded
  int dRB = 0;
  std::optional<LiftedFamily> fam;
  DecoderPlan plan;
  Mat src;                 // Psi on RB x (support of Alice's marginal)
  std::vector<Mat> psi_m;  // psi^c as dRB x dA matrices
  double sigma_entropy = 0.0;
};

// RAB vector <-> (RB) x A matrix.
Mat rab_to_matrix(const Vec& v, int dR, int dA, int dB);
Vec matrix_to_rab(const Mat& m, int dR, int dA, int dB);

LiftedFamily family_for(const RVec& sigma, bool uniform, int n);

}  // namespace qmc::detail
