#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "qmc/entropies.hpp"
#include "qmc/random_states.hpp"

using namespace qmc;

namespace {

Mat diag(std::initializer_list<double> v) {
  RVec d(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) d[i++] = x;
  return d.cast<cplx>().asDiagonal();
}

Mat diag(const std::vector<double>& v) {
  RVec d(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) d[static_cast<Eigen::Index>(i)] = v[i];
  return d.cast<cplx>().asDiagonal();
}

std::vector<double> rand_dist(Rng& rng, int d, bool zeros) {
  RVec p = random_distribution(rng, d, zeros);
  return {p.data(), p.data() + d};
}

}  // namespace

TEST_CASE("relative entropy and variance") {
  Rng rng(11);
  Mat r = random_density(rng, 3);
  auto same = rel_entropy_and_variance(r, r);
  CHECK(std::abs(same.D) < 1e-10);
  CHECK(same.V < 1e-10);

  auto bit = rel_entropy_and_variance(diag({1, 0}), Mat::Identity(2, 2) / 2.0);
  CHECK(std::abs(bit.D - 1.0) < 1e-12);
  CHECK(bit.V < 1e-12);

  // 3/4 log(3/2) + 1/4 log(1/2)
  const double d = rel_entropy(diag({0.75, 0.25}), diag({0.5, 0.5}));
  CHECK(std::abs(d - (0.75 * std::log2(1.5) - 0.25)) < 1e-12);
  CHECK(std::abs(d - 0.18872) < 1e-5);

  auto bad = rel_entropy_and_variance(diag({0.5, 0.5}), diag({1, 0}));
  CHECK(bad.infinite);
  CHECK(std::isinf(bad.D));

  for (int k = 0; k < 20; ++k) {
    auto x = rel_entropy_and_variance(random_density(rng, 4), random_density(rng, 4));
    CHECK(x.D >= -1e-12);
    CHECK(x.V >= 0.0);
  }
}

TEST_CASE("dmax") {
  Rng rng(12);
  Mat r = random_density(rng, 3);
  CHECK(std::abs(dmax(r, r)) < 1e-9);
  CHECK(std::abs(dmax(diag({1, 0}), Mat::Identity(2, 2) / 2.0) - 1.0) < 1e-12);
  CHECK(std::isinf(dmax(diag({0.5, 0.5}), diag({1, 0}))));
  // cq with classical B of size 3: dmax(rho_AB || rho_A (x) I/|B|) <= log 3
  for (int k = 0; k < 10; ++k) {
    Mat ab = Mat::Zero(6, 6);
    Mat ra = Mat::Zero(2, 2);
    RVec p = random_distribution(rng, 3);
    for (int b = 0; b < 3; ++b) {
      Mat blk = random_density(rng, 2);
      Mat e = Mat::Zero(3, 3);
      e(b, b) = 1;
      ab += p[b] * kron(blk, e);
      ra += p[b] * blk;
    }
    CHECK(dmax(ab, kron(ra, Mat::Identity(3, 3) / 3.0)) <= std::log2(3.0) + 1e-9);
  }
}

TEST_CASE("smooth dmax: upper bound versus water-filling oracle") {
  Mat half = Mat::Identity(2, 2) / 2.0;
  auto tiny = dmax_smooth_upper(diag({0.9, 0.1}), half, 1e-9);
  CHECK(std::abs(tiny.value - dmax(diag({0.9, 0.1}), half)) < 1e-6);

  Rng rng(13);
  Mat r = random_density(rng, 3);
  CHECK(std::abs(dmax_smooth_upper(r, r, 0.3).value) < 1e-9);

  auto up = dmax_smooth_upper(diag({0.9, 0.1}), half, 0.2);
  auto ex = dmax_smooth_classical(diag({0.9, 0.1}), half, 0.2);
  CHECK(std::abs(up.value - ex.value) < 1e-6);
  CHECK(up.distance <= 0.2 + 1e-9);
  CHECK(min_eigenvalue(hermitize(std::exp2(up.value) * half - up.witness)) >= -1e-9);

  auto grid = oracle::smooth_dmax_grid2(0.75, 0.5, 0.1, 1e-4);
  auto cl = dmax_smooth_classical(diag({0.75, 0.25}), half, 0.1);
  CHECK(std::abs(grid - cl.value) < 1e-3);
  CHECK(cl.certified == Certified::exact);

  // ball large enough to contain q: value 0
  CHECK(std::abs(dmax_smooth_classical(diag({0.75, 0.25}), half, 0.5).value) < 1e-9);
  CHECK_THROWS_AS(dmax_smooth_upper(r, r, 0.0), ValidationError);
  CHECK_THROWS_AS(dmax_smooth_classical(random_density(rng, 2), half, 0.1), ValidationError);

  for (int k = 0; k < 30; ++k) {
    const int d = 2 + k % 4;
    auto p = rand_dist(rng, d, true), q = rand_dist(rng, d, false);
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {0.01, 0.05, 0.1, 0.2, 0.4}) {
      auto u = dmax_smooth_upper(diag(p), diag(q), eps);
      auto c = dmax_smooth_classical(diag(p), diag(q), eps);
      CHECK(u.value >= c.value - 1e-9);
      // truncation never moves mass outside supp(p); the gap closes only
      // when p has full support
      if (*std::min_element(p.begin(), p.end()) > 0) CHECK(u.value - c.value <= 1e-6);
      CHECK(u.value <= prev + 1e-12);
      prev = u.value;
    }
  }
  for (int k = 0; k < 10; ++k) {
    Mat a = random_density(rng, 3), b = random_density(rng, 3);
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {0.01, 0.1, 0.3}) {
      auto u = dmax_smooth_upper(a, b, eps);
      CHECK(u.value <= dmax(a, b) + 1e-9);
      CHECK(u.value <= prev + 1e-12);
      CHECK(u.distance <= eps + 1e-9);
      prev = u.value;
    }
  }
}

TEST_CASE("hypothesis testing divergence") {
  Rng rng(14);
  Mat r = random_density(rng, 3);
  for (double eps : {0.1, 0.25, 0.5}) CHECK(std::abs(dh_eps(r, r, eps).value - std::log2(1 / (1 - eps))) < 1e-9);
  auto orth = dh_eps(diag({1, 0}), diag({0, 1}), 0.1);
  CHECK(orth.infinite);
  CHECK(orth.value == kDhCap);
  CHECK(std::abs(dh_eps(diag({0.75, 0.25}), diag({0.5, 0.5}), 0.25).value - 1.0) < 1e-9);

  for (int k = 0; k < 200; ++k) {
    const int d = 2 + k % 5;
    auto p = rand_dist(rng, d, k % 3 == 0), q = rand_dist(rng, d, k % 4 == 0);
    const double eps = std::uniform_real_distribution<double>(0.02, 0.9)(rng);
    auto t = dh_eps(diag(p), diag(q), eps);
    const double lp = oracle::threshold_lp(p, q, eps);
    if (std::isinf(lp)) CHECK(t.infinite);
    else CHECK(std::abs(t.value - lp) < 1e-6);
    CHECK(t.typeI <= eps + 1e-9);
  }
  for (int k = 0; k < 30; ++k) {
    Mat a = random_density(rng, 4), b = random_density(rng, 4, 2);
    auto t = dh_eps(a, b, 0.2);
    CHECK(t.typeI <= 0.2 + 1e-9);
    CHECK(min_eigenvalue(t.op) >= -1e-10);
    CHECK(max_eigenvalue(t.op) <= 1 + 1e-10);
  }
}

TEST_CASE("von Neumann rates") {
  // product state R (x) C (x) B: I(R:C|B) = 0
  Rng rng(15);
  Mat rr = random_density(rng, 2), cc = random_density(rng, 2), bb = random_density(rng, 2);
  DensityOperator prod(kron(kron(rr, cc), bb), {quantum("R", 2), quantum("C", 2), quantum("B", 2)});
  auto x = vn_rates(prod, {{"R"}, {}, {"B"}, {"C"}});
  CHECK(std::abs(x.I_RC_given_B) < 1e-10);

  // classical copy C = C' uniform on 3 values
  Mat cp = Mat::Zero(9, 9);
  for (int c = 0; c < 3; ++c) cp(c * 3 + c, c * 3 + c) = 1.0 / 3;
  DensityOperator copy(cp, {classical("C", 3), classical("Cp", 3)});
  CHECK(std::abs(entropy_of(copy, {"C"}) - std::log2(3.0)) < 1e-12);

  // classically correlated R, C, B (GHZ-like diagonal)
  Mat g = Mat::Zero(8, 8);
  g(0, 0) = g(7, 7) = 0.5;
  DensityOperator ghz(g, {quantum("R", 2), quantum("C", 2), quantum("B", 2)});
  auto y = vn_rates(ghz, {{"R"}, {}, {"B"}, {"C"}});
  CHECK(std::abs(y.H_C_given_RB) < 1e-10);
  CHECK(std::abs(y.I_RC_given_B) < 1e-10);
  CHECK_THROWS_AS(vn_rates(ghz, {{"Z"}, {}, {}, {}}), ValidationError);
}

TEST_CASE("second order estimate and Gaussian quantile") {
  CHECK(second_order_estimate(0.3, 0.0, 10, 0.1, Direction::dh) == doctest::Approx(3.0));
  CHECK(second_order_estimate(0.3, 2.0, 10, 0.5, Direction::dmax) == doctest::Approx(3.0));
  CHECK(std::abs(phi_inv(0.5)) < 1e-15);
  CHECK(std::abs(phi_inv(0.975) - 1.959963984540054) < 1e-8);
  CHECK(std::abs(phi_inv(0.1) + 1.2815515655446004) < 1e-8);
  for (double e = 1e-6; e <= 0.5; e *= 1.7) CHECK(std::abs(phi_inv(e)) <= 2 * std::sqrt(std::log2(1 / (2 * e))) + 1e-12);
}

TEST_CASE("fixed-marginal min-entropy") {
  // maximally entangled AB: H_min(A|B) with the marginal fixed = -log 2... of I_A (x) rho_B
  Mat bell = Mat::Zero(4, 4);
  bell(0, 0) = bell(0, 3) = bell(3, 0) = bell(3, 3) = 0.5;
  DensityOperator ab(bell, {quantum("A", 2), quantum("B", 2)});
  CHECK(std::abs(hmin_fixed_marginal(ab, {"A"}, {"B"}) + 1.0) < 1e-10);
  DensityOperator prod(Mat::Identity(4, 4) / 4.0, {quantum("A", 2), quantum("B", 2)});
  CHECK(std::abs(hmin_fixed_marginal(prod, {"A"}, {"B"}) - 1.0) < 1e-10);
}
