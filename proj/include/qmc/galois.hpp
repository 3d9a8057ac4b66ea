#pragma once

#include <cstdint>
#include <vector>

namespace qmc {

using Elem = std::uint32_t;

// q = p^d with p prime; false otherwise.
bool prime_power(std::uint64_t q, int* p, int* d);

// F_{p^d}. Elements are integers whose base-p digits are the polynomial
// coefficients (lowest degree first).
class GaloisField {
 public:
  GaloisField() = default;
  GaloisField(int p, int d);
  static GaloisField of_order(std::uint64_t q);

  int characteristic() const { return p_; }
  int degree() const { return d_; }
  Elem order() const { return q_; }
  // Monic modulus, coefficients low to high (size d + 1).
  const std::vector<int>& modulus() const { return mod_; }

  Elem add(Elem a, Elem b) const;
  Elem sub(Elem a, Elem b) const;
  Elem neg(Elem a) const;
  Elem mul(Elem a, Elem b) const;
  Elem inv(Elem a) const;

 private:
  Elem mul_slow(Elem a, Elem b) const;

  int p_ = 2;
  int d_ = 1;
  Elem q_ = 2;
  std::vector<int> mod_;
  std::vector<Elem> mul_table_;  // filled when q <= 256
  std::vector<Elem> inv_table_;
};

// Smallest monic irreducible of degree d over F_p; candidates are ordered by
// their integer encoding with the leading coefficient most significant.
std::vector<int> smallest_irreducible_prime(int p, int d);
bool is_irreducible_prime(const std::vector<int>& poly, int p);

// Degree-t extension of a base field F_q: F_q[y]/g(y). Elements are integers
// whose base-q digits are the coefficients (in F_q) of 1, y, ..., y^{t-1}.
class ExtensionField {
 public:
  ExtensionField() = default;
  ExtensionField(const GaloisField& base, int t);

  const GaloisField& base() const { return base_; }
  int degree() const { return t_; }
  std::uint64_t order() const { return order_; }
  const std::vector<Elem>& modulus() const { return mod_; }

  std::vector<Elem> digits(std::uint64_t x) const;
  std::uint64_t encode(const std::vector<Elem>& c) const;
  std::uint64_t add(std::uint64_t a, std::uint64_t b) const;
  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const;

 private:
  GaloisField base_;
  int t_ = 1;
  std::uint64_t order_ = 1;
  std::vector<Elem> mod_;  // monic, low to high, size t + 1
};

// Polynomials over a Galois field (low to high coefficients).
bool is_irreducible_over(const GaloisField& f, const std::vector<Elem>& poly);
std::vector<Elem> smallest_irreducible_over(const GaloisField& f, int t);

}  // namespace qmc
