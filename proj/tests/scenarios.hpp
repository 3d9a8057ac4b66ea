#pragma once

// Scenario generators shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>

#include "qmc/compression.hpp"
#include "qmc/entropies.hpp"
#include "qmc/extractor.hpp"
#include "qmc/random_states.hpp"

namespace scen {

using namespace qmc;

inline Povm random_povm(Rng& rng, int dim, int outcomes) {
  std::vector<Mat> g;
  Mat sum = Mat::Zero(dim, dim);
  for (int i = 0; i < outcomes; ++i) {
    g.push_back(random_psd(rng, dim));
    sum += g.back();
  }
  const Mat ih = pinv_sqrt_psd(sum);
  Povm p;
  for (const auto& x : g) p.elements.push_back(hermitize(ih * x * ih));
  return p;
}

inline Povm computational_povm(int dim) {
  Povm p;
  for (int i = 0; i < dim; ++i) {
    Mat m = Mat::Zero(dim, dim);
    m(i, i) = 1;
    p.elements.push_back(m);
  }
  return p;
}

inline Povm trivial_povm(int dim) {
  Povm p;
  p.elements = {Mat::Identity(dim, dim), Mat::Zero(dim, dim)};
  return p;
}

inline CompressionScenario make(const Vec& amps, int dR, int dA, int dB, Povm povm, double eps) {
  CompressionScenario sc;
  sc.psi = StateVector(amps, {quantum("R", dR), quantum("A", dA), quantum("B", dB)});
  sc.R = {"R"};
  sc.A = {"A"};
  sc.B = {"B"};
  sc.povm = std::move(povm);
  sc.eps = eps;
  return sc;
}

// Random pure state on R, A, B (one qubit each) with a random POVM on A.
inline CompressionScenario random_two_qubit(Rng& rng, int outcomes, double eps) {
  return make(random_pure(rng, 8), 2, 2, 2, random_povm(rng, 2, outcomes), eps);
}

// Product |phi>_RB (x) |a>_A with the POVM {I, 0}.
inline CompressionScenario product_trivial(Rng& rng, double eps) {
  const Vec rb = random_pure(rng, 4);
  const Vec a = random_pure(rng, 2);
  Vec amps(8);
  for (int r = 0; r < 2; ++r)
    for (int x = 0; x < 2; ++x)
      for (int b = 0; b < 2; ++b) amps[(r * 2 + x) * 2 + b] = rb[r * 2 + b] * a[x];
  return make(amps, 2, 2, 2, trivial_povm(2), eps);
}

// sum_c p(c) |c><c|_C (x) rho_c on G.
inline CqState source_state(const RVec& p, const std::vector<Mat>& rho) {
  const int d = static_cast<int>(rho[0].rows());
  CqState s({classical("C", static_cast<int>(p.size()))}, {quantum("G", d)});
  for (int c = 0; c < p.size(); ++c)
    if (p[c] > 0) s.add({c}, p[c], rho[c]);
  return s;
}

struct ExtractorCase {
  CqState source;
  int alphabet = 0;
  double k = 0.0;
  double eps = 0.0;
};

// Random source on q symbols with quantum side information of dimension dg,
// k set to the exact -dmax(Psi_GC || Psi_G (x) I_C) and eps small enough that
// something is extracted whenever possible. Sources that would need eps above
// max_eps are redrawn.
inline ExtractorCase eligible_source(Rng& rng, int q, int dg, double max_eps = 0.99) {
  for (;;) {
    RVec p = random_distribution(rng, q);
    p = 0.5 * p + RVec::Constant(q, 0.5 / q);
    std::vector<Mat> rho;
    for (int c = 0; c < q; ++c) rho.push_back(random_density(rng, dg));
    ExtractorCase ec;
    ec.source = source_state(p, rho);
    ec.alphabet = q;
    Mat g = Mat::Zero(dg, dg);
    for (int c = 0; c < q; ++c) g += p[c] * rho[c];
    double dm = -1e300;
    for (int c = 0; c < q; ++c) dm = std::max(dm, dmax(p[c] * rho[c], g));
    ec.k = -dm;
    if (ec.k < 0.2 || 1.001 * std::exp2(-ec.k) > max_eps) continue;
    ec.eps = std::clamp(2.0 * std::exp2(-ec.k), 0.05, std::min(0.95, max_eps));
    if (ec.eps < std::exp2(-ec.k)) ec.eps = 1.001 * std::exp2(-ec.k);
    return ec;
  }
}

}  // namespace scen
