#include <doctest.h>

#include <cmath>

#include "qmc/cq_state.hpp"
#include "qmc/entropies.hpp"
#include "qmc/random_states.hpp"

using namespace qmc;

namespace {

DensityOperator dm(const Mat& m, RegList regs) { return DensityOperator(m, std::move(regs)); }

Mat ket(int d, int i) {
  Mat k = Mat::Zero(d, 1);
  k(i, 0) = 1;
  return k;
}

Mat proj(int d, int i) { return ket(d, i) * ket(d, i).adjoint(); }

Vec bell() {
  Vec v = Vec::Zero(4);
  v[0] = v[3] = 1.0 / std::sqrt(2.0);
  return v;
}

}  // namespace

TEST_CASE("product marginal and Bell marginal") {
  Rng rng(1);
  Mat a = random_density(rng, 2), b = random_density(rng, 3);
  auto rho = tensor(dm(a, {quantum("A", 2)}), dm(b, {quantum("B", 3)}));
  auto ra = partial_trace(rho, {"B"});
  CHECK((ra.matrix() - a).norm() < 1e-12);
  auto rb = partial_trace(rho, {"A"});
  CHECK((rb.matrix() - b).norm() < 1e-12);

  StateVector phi(bell(), {quantum("A", 2), quantum("B", 2)});
  auto half = partial_trace(phi, {"B"});
  CHECK((half.matrix() - Mat::Identity(2, 2) / 2.0).norm() < 1e-12);
}

TEST_CASE("permute and permute back") {
  Rng rng(2);
  RegList regs{quantum("A", 2), quantum("B", 3), quantum("C", 2)};
  auto rho = dm(random_density(rng, 12), regs);
  auto p = permute(rho, {"C", "A", "B"});
  auto back = permute(p, {"A", "B", "C"});
  CHECK((back.matrix() - rho.matrix()).norm() == 0.0);
  // tensor order swap agrees with permute
  Mat a = random_density(rng, 2), b = random_density(rng, 3);
  auto ab = tensor(dm(a, {quantum("A", 2)}), dm(b, {quantum("B", 3)}));
  auto ba = tensor(dm(b, {quantum("B", 3)}), dm(a, {quantum("A", 2)}));
  CHECK((permute(ab, {"B", "A"}).matrix() - ba.matrix()).norm() < 1e-14);
}

TEST_CASE("unknown register and overlapping tensor are rejected") {
  auto rho = DensityOperator::maximally_mixed({quantum("A", 2)});
  CHECK_THROWS_AS(partial_trace(rho, {"Z"}), ValidationError);
  CHECK_THROWS_AS(tensor(rho, rho), ValidationError);
  CHECK_THROWS_AS(DensityOperator(Mat::Identity(3, 3) / 3.0, {quantum("A", 2)}), ValidationError);
}

TEST_CASE("purify") {
  auto pure = purify(dm(proj(2, 0), {quantum("A", 2)}), "P");
  CHECK(pure.regs().back().dim == 1);
  CHECK(std::abs(std::abs(pure.amps()[0]) - 1.0) < 1e-12);

  auto mixed = purify(DensityOperator::maximally_mixed({quantum("A", 2)}), "P");
  Mat m = mixed.as_matrix({"A"});
  Eigen::JacobiSVD<Mat> svd(m);
  CHECK(std::abs(svd.singularValues()[0] - 1 / std::sqrt(2.0)) < 1e-12);
  CHECK(std::abs(svd.singularValues()[1] - 1 / std::sqrt(2.0)) < 1e-12);

  Rng rng(3);
  for (int rank : {1, 2, 3}) {
    Mat r = random_density(rng, 3, rank);
    auto psi = purify(dm(r, {quantum("A", 3)}), "P");
    CHECK(psi.regs().back().dim == rank);
    CHECK((partial_trace(psi, {"P"}).matrix() - r).norm() < 1e-10);
  }
}

TEST_CASE("apply isometry") {
  Rng rng(4);
  StateVector psi(random_pure(rng, 6), {quantum("A", 2), quantum("B", 3)});
  auto same = apply_isometry(Mat::Identity(3, 3), psi, {"B"}, {quantum("B", 3)});
  CHECK((same.amps() - psi.amps()).norm() < 1e-14);

  // embedding B (dim 3) into B' (dim 6) then tracing the pad bit
  Mat emb = Mat::Zero(6, 3);
  for (int i = 0; i < 3; ++i) emb(2 * i, i) = 1;
  auto big = apply_isometry(emb, psi, {"B"}, {quantum("B", 3), quantum("pad", 2)});
  auto red = partial_trace(big, {"pad"});
  auto orig = DensityOperator::from_pure(psi);
  CHECK((red.matrix() - orig.matrix()).norm() < 1e-12);

  Mat v = random_isometry(rng, 5, 3);
  auto out = apply_isometry(v, psi, {"B"}, {quantum("E", 5)});
  CHECK(std::abs(out.amps().norm() - 1.0) < 1e-12);
  auto rho_out = apply_isometry(v, orig, {"B"}, {quantum("E", 5)});
  CHECK((rho_out.matrix() - out.amps() * out.amps().adjoint()).norm() < 1e-12);
  CHECK_THROWS_AS(apply_isometry(Mat::Ones(3, 3), psi, {"B"}, {quantum("B", 3)}), ValidationError);
}

TEST_CASE("measure register") {
  Vec zero = Vec::Zero(2);
  zero[0] = 1;
  auto o = measure_register(StateVector(zero, {quantum("A", 2)}), "A");
  REQUIRE(o.size() == 1);
  CHECK(o[0].value == 0);
  CHECK(o[0].probability == doctest::Approx(1.0));

  Vec plus = Vec::Constant(2, 1 / std::sqrt(2.0));
  auto p = measure_register(StateVector(plus, {quantum("A", 2)}), "A");
  REQUIRE(p.size() == 2);
  CHECK(std::abs(p[0].probability - 0.5) < 1e-14);
  CHECK(std::abs(p[1].probability - 0.5) < 1e-14);

  Rng rng(5);
  StateVector psi(random_pure(rng, 12), {quantum("A", 3), quantum("B", 4)});
  double tot = 0;
  for (auto& x : measure_register(psi, "B")) tot += x.probability;
  CHECK(std::abs(tot - 1.0) < 1e-10);
  CHECK_THROWS_AS(measure_register(psi, "Q"), ValidationError);
}

TEST_CASE("distances") {
  Mat z = proj(2, 0), one = proj(2, 1), mix = Mat::Identity(2, 2) / 2.0;
  CHECK(fidelity(z, z) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fidelity(z, one) < 1e-12);
  CHECK(std::abs(fidelity(z, mix) - 0.7071067811865476) < 1e-12);
  CHECK(trace_distance(z, one) == doctest::Approx(1.0));
  CHECK(purified_from_fidelity(fidelity(z, one)) == doctest::Approx(1.0));

  Rng rng(6);
  for (int k = 0; k < 50; ++k) {
    Mat a = random_density(rng, 3), b = random_density(rng, 3), c = random_density(rng, 3);
    const double f = fidelity(a, b);
    CHECK(std::abs(f - fidelity(b, a)) < 1e-9);
    const double P = purified_from_fidelity(f);
    const double D = trace_distance(a, b);
    CHECK(D <= P + 1e-9);
    CHECK(P <= std::sqrt(2 * D) + 1e-9);
    const double pac = purified_from_fidelity(fidelity(a, c));
    const double pcb = purified_from_fidelity(fidelity(c, b));
    CHECK(P <= pac + pcb + 1e-9);
  }
}

TEST_CASE("fidelity canonicalizes register order") {
  Rng rng(7);
  Mat a = random_density(rng, 2), b = random_density(rng, 3);
  auto ab = tensor(dm(a, {quantum("A", 2)}), dm(b, {quantum("B", 3)}));
  auto ba = tensor(dm(b, {quantum("B", 3)}), dm(a, {quantum("A", 2)}));
  CHECK(fidelity(ab, ba) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(distance(Metric::trace, ab, ba) < 1e-10);
  auto other = DensityOperator::maximally_mixed({quantum("A", 2), quantum("C", 3)});
  CHECK_THROWS_AS(fidelity(ab, other), ValidationError);
}

TEST_CASE("monotonicity, Pinsker, gentle measurement, Hayashi-Nagaoka") {
  Rng rng(8);
  RegList regs{quantum("A", 2), quantum("B", 2)};
  for (int k = 0; k < 40; ++k) {
    auto r = dm(random_density(rng, 4), regs), s = dm(random_density(rng, 4), regs);
    CHECK(fidelity(partial_trace(r, {"B"}), partial_trace(s, {"B"})) >= fidelity(r, s) - 1e-9);
    CHECK(fidelity(r.matrix(), s.matrix()) >= std::exp2(-rel_entropy(r.matrix(), s.matrix()) / 2) - 1e-9);

    Mat a = random_contraction(rng, 4);
    const Mat& rho = r.matrix();
    const double tr = (a * a * rho).trace().real();
    CHECK(fidelity(rho, a * rho * a / tr) >= std::sqrt(tr) - 1e-9);

    Mat S = random_contraction(rng, 4), T = random_psd(rng, 4);
    Mat inv = pinv_sqrt_psd(S + T);
    Mat lhs = 2 * (Mat::Identity(4, 4) - S) + 4 * T - (Mat::Identity(4, 4) - inv * S * inv);
    CHECK(min_eigenvalue(hermitize(lhs)) >= -1e-9);
  }
}

TEST_CASE("cq states: sparse vs dense") {
  Rng rng(9);
  for (int k = 0; k < 20; ++k) {
    CqState a({classical("X", 2)}, {quantum("Q", 3)}), b({classical("X", 2)}, {quantum("Q", 3)});
    const double w = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    const double v = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    a.add({0}, w, random_density(rng, 3));
    a.add({1}, 1 - w, random_density(rng, 3));
    b.add({0}, v, random_density(rng, 3));
    b.add({1}, 1 - v, random_density(rng, 3));
    a.validate();
    const double sparse = cq_fidelity(a, b);
    const double dense = fidelity(densify(a), densify(b));
    CHECK(std::abs(sparse - dense) < 1e-9);
    CHECK(std::abs(cq_trace_distance(a, b) - distance(Metric::trace, densify(a), densify(b))) < 1e-9);
  }
  CqState s({classical("X", 2)}, {quantum("Q", 2)});
  s.add({0}, 0.5, proj(2, 0));
  s.add({1}, 0.5, proj(2, 1));
  CHECK(cq_fidelity(s, s) == doctest::Approx(1.0));
  CqState t({classical("X", 2)}, {quantum("Q", 2)});
  t.add({0}, 0.5, proj(2, 1));
  t.add({1}, 0.5, proj(2, 0));
  CHECK(cq_fidelity(s, t) < 1e-12);
  CqState bad({classical("Y", 2)}, {quantum("Q", 2)});
  bad.add({0}, 1.0, proj(2, 0));
  CHECK_THROWS_AS(cq_fidelity(s, bad), ValidationError);
}

TEST_CASE("cq register algebra") {
  Rng rng(10);
  CqState s({classical("X", 2), classical("Y", 3)}, {quantum("P", 2), quantum("Q", 2)});
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 3; ++y) s.add({x, y}, 1.0 / 6, random_density(rng, 4));
  auto tx = cq_partial_trace(s, {"X", "Q"});
  auto dense = partial_trace(densify(s), {"X", "Q"});
  CHECK(fidelity(densify(tx), dense) == doctest::Approx(1.0).epsilon(1e-10));
  auto perm = cq_permute(s, {"Y", "X"}, {"Q", "P"});
  CHECK(fidelity(densify(perm), densify(s)) == doctest::Approx(1.0).epsilon(1e-10));

  auto outs = measure_register(s, "P");
  double tot = 0;
  for (auto& o : outs) tot += o.probability;
  CHECK(std::abs(tot - 1.0) < 1e-10);
  auto outx = measure_register(s, "Y");
  CHECK(outx.size() == 3);
  CHECK(outx[1].probability == doctest::Approx(1.0 / 3));

  CqState big({classical("X", 1 << 8)}, {quantum("Q", 1 << 7)});
  big.add({0}, 1.0, Mat::Identity(1 << 7, 1 << 7) / double(1 << 7));
  CHECK_THROWS_AS(densify(big), BudgetExceeded);
}
