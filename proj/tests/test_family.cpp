#include <doctest.h>

#include <random>
#include <set>

#include "qmc/registers.hpp"

#include "qmc/pairwise_family.hpp"

using namespace qmc;

TEST_CASE("prime power detection and field axioms") {
  int p = 0, d = 0;
  CHECK(prime_power(8, &p, &d));
  CHECK((p == 2 && d == 3));
  CHECK(prime_power(9, &p, &d));
  CHECK((p == 3 && d == 2));
  CHECK_FALSE(prime_power(6, nullptr, nullptr));
  CHECK_FALSE(prime_power(1, nullptr, nullptr));
  CHECK_THROWS_AS(build_family(6, 3), ValidationError);

  for (std::uint64_t q : {2u, 3u, 4u, 5u, 8u, 9u, 16u, 27u, 49u, 256u, 1024u}) {
    auto f = GaloisField::of_order(q);
    CHECK(is_irreducible_prime(f.modulus(), f.characteristic()));
    std::mt19937_64 rng(q);
    std::uniform_int_distribution<Elem> u(0, f.order() - 1);
    for (int k = 0; k < 300; ++k) {
      Elem a = u(rng), b = u(rng), c = u(rng);
      CHECK(f.mul(a, f.mul(b, c)) == f.mul(f.mul(a, b), c));
      CHECK(f.add(a, f.add(b, c)) == f.add(f.add(a, b), c));
      CHECK(f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c)));
      CHECK(f.add(a, f.neg(a)) == 0);
      if (a) CHECK(f.mul(a, f.inv(a)) == 1);
    }
  }
}

TEST_CASE("irreducible moduli are the smallest ones") {
  // x^2 + x + 1 over F_2, x^3 + x + 1 over F_2, x^2 + 1 over F_3
  CHECK(smallest_irreducible_prime(2, 2) == std::vector<int>{1, 1, 1});
  CHECK(smallest_irreducible_prime(2, 3) == std::vector<int>{1, 1, 0, 1});
  CHECK(smallest_irreducible_prime(3, 2) == std::vector<int>{1, 0, 1});
  CHECK(smallest_irreducible_prime(2, 8) == std::vector<int>{1, 1, 0, 1, 1, 0, 0, 0, 1});
  CHECK_FALSE(is_irreducible_prime({1, 0, 1}, 2));
}

TEST_CASE("q=2, n=2 family") {
  auto fam = build_family(2, 2);
  CHECK(fam.t() == 1);
  REQUIRE(fam.num_seeds() == 4);
  std::set<std::vector<int>> got;
  for (std::size_t s = 0; s < 4; ++s) got.insert(fam.string(s));
  CHECK(got == std::set<std::vector<int>>{{0, 0}, {1, 1}, {1, 0}, {0, 1}});
  CHECK(verify_family(fam).ok);
}

TEST_CASE("q=3, n=3 family has 9 strings") {
  auto fam = build_family(3, 3);
  CHECK(fam.t() == 1);
  auto chk = verify_family(fam);
  CHECK(chk.support == 9);
  CHECK(chk.ok);
}

TEST_CASE("table agrees with direct evaluation") {
  for (auto [q, n] : std::vector<std::pair<int, int>>{{2, 5}, {3, 7}, {4, 9}, {5, 4}, {8, 10}, {9, 12}}) {
    auto fam = build_family(q, n);
    for (std::size_t s = 0; s < fam.num_seeds(); ++s)
      for (int i = 0; i < n; ++i)
        REQUIRE(fam.value(s, i) == direct_hash(fam.field(), fam.t(), fam.seed_a(s), fam.seed_b(s), fam.positions()[i]));
  }
}

TEST_CASE("exhaustive pairwise independence on small families") {
  for (std::uint64_t q : {2u, 3u, 4u, 5u, 7u, 8u, 9u}) {
    for (int n = 2; n <= 40; n += 3) {
      std::uint64_t S = q;
      for (int k = 0; k < family_degree(q, n); ++k) S *= q;
      if (S > (1u << 12)) continue;
      auto fam = build_family(q, n);
      auto chk = verify_family(fam);
      CHECK(chk.ok);
      CHECK(chk.support == S);
      auto cert = certify_family(q, n);
      CHECK(cert.ok);
    }
  }
}

TEST_CASE("conditional slices") {
  auto fam = build_family(2, 2);
  auto sl = conditional_slice(fam, 0, 0);
  CHECK(sl.seeds.size() == 2);
  for (std::uint64_t q : {2u, 3u, 4u}) {
    auto f = build_family(q, 6);
    std::uint64_t qt = 1;
    for (int k = 0; k < f.t(); ++k) qt *= q;
    for (int i = 0; i < 6; ++i)
      for (int c = 0; c < static_cast<int>(q); ++c) {
        auto s = conditional_slice(f, i, c);
        CHECK(s.seeds.size() == qt);
        std::vector<int> cnt(q, 0);
        for (auto& str : s.strings) ++cnt[str[0]];
        for (int v : cnt) CHECK(static_cast<std::uint64_t>(v) * q == qt);
      }
  }
}

TEST_CASE("lifted marginals") {
  auto fam = build_family(4, 3);
  auto id = lift_marginal(fam, {0, 1, 2, 3}, 4);
  CHECK(verify_lifted(id));
  for (std::size_t s = 0; s < fam.num_seeds(); ++s) CHECK(id.string(s) == fam.string(s));

  auto skew = lift_marginal(fam, {0, 0, 0, 1}, 2);
  CHECK(skew.marginal()[0] == Rational(3, 4));
  CHECK(skew.marginal()[1] == Rational(1, 4));
  CHECK(verify_lifted(skew));

  auto constant = lift_marginal(fam, {1, 1, 1, 1}, 2);
  CHECK(verify_lifted(constant));

  CHECK(lift_map_for({Rational(3, 4), Rational(1, 4)}, 4) == std::vector<int>{0, 0, 0, 1});
  CHECK_THROWS_AS(lift_map_for({Rational(2, 3), Rational(1, 3)}, 4), ValidationError);
}

TEST_CASE("alphabet embedding") {
  CHECK(embed_alphabet(2).q == 2);
  CHECK(embed_alphabet(3).q == 4);
  CHECK(embed_alphabet(5).q == 8);
  CHECK(embed_alphabet(5).index.size() == 5);
}
