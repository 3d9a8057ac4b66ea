#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <boost/rational.hpp>

#include "qmc/galois.hpp"

namespace qmc {

using Rational = boost::rational<std::int64_t>;

// Affine family h_{a,b}(x) = phi(a x) + b over F_{q^t}, evaluated on n
// positions. Seed index = a * q + b, with a encoded in base q.
class PairwiseFamily {
 public:
  PairwiseFamily() = default;
  PairwiseFamily(std::uint64_t q, int n);

  std::uint64_t q() const { return q_; }
  int n() const { return n_; }
  int t() const { return t_; }
  std::size_t num_seeds() const { return table_.size() / static_cast<std::size_t>(n_); }
  const GaloisField& field() const { return field_; }
  const std::vector<std::uint64_t>& positions() const { return positions_; }
  // w_i[k] = phi(y^k x_i), so h_{a,b}(x_i) = sum_k a_k w_i[k] + b.
  const std::vector<std::vector<Elem>>& weights() const { return weights_; }

  int value(std::size_t seed, int i) const { return table_[seed * n_ + i]; }
  const int* row(std::size_t seed) const { return table_.data() + seed * n_; }
  std::vector<int> string(std::size_t seed) const { return {row(seed), row(seed) + n_}; }
  std::uint64_t seed_a(std::size_t seed) const { return seed / q_; }
  int seed_b(std::size_t seed) const { return static_cast<int>(seed % q_); }

 private:
  std::uint64_t q_ = 2;
  int n_ = 1;
  int t_ = 0;
  GaloisField field_;
  std::vector<std::uint64_t> positions_;
  std::vector<std::vector<Elem>> weights_;
  std::vector<int> table_;
};

// Smallest t with q^t >= n.
int family_degree(std::uint64_t q, int n);

PairwiseFamily build_family(std::uint64_t q, int n);

struct Slice {
  std::vector<std::size_t> seeds;
  // Strings with position i removed, one per seed.
  std::vector<std::vector<int>> strings;
};

Slice conditional_slice(const PairwiseFamily& fam, int i, int c);

struct FamilyCheck {
  bool ok = true;
  std::size_t support = 0;
  bool distinct = true;
  bool uniform_marginals = true;
  bool pairwise = true;
  bool slices_uniform = true;
};

// Exhaustive check with rational arithmetic.
FamilyCheck verify_family(const PairwiseFamily& fam);

// phi(a x) + b evaluated straight from the extension-field product.
int direct_hash(const GaloisField& f, int t, std::uint64_t a, int b, std::uint64_t x);

// For families too large to tabulate: pairwise independence holds iff the
// position weight vectors are distinct, and the support has q^{t+1} strings
// iff they span F_q^t. Computed without building the table.
struct LinearCertificate {
  bool distinct = false;
  int rank = 0;
  bool ok = false;
};
LinearCertificate certify_family(std::uint64_t q, int n);

class LiftedFamily {
 public:
  LiftedFamily(PairwiseFamily base, std::vector<int> map, int target_size);

  const PairwiseFamily& base() const { return base_; }
  const std::vector<int>& map() const { return map_; }
  int target_size() const { return target_; }
  const std::vector<Rational>& marginal() const { return marginal_; }
  std::size_t num_seeds() const { return base_.num_seeds(); }
  int n() const { return base_.n(); }
  int value(std::size_t seed, int i) const { return map_[base_.value(seed, i)]; }
  std::vector<int> string(std::size_t seed) const;

 private:
  PairwiseFamily base_;
  std::vector<int> map_;
  int target_;
  std::vector<Rational> marginal_;
};

LiftedFamily lift_marginal(const PairwiseFamily& fam, const std::vector<int>& map, int target_size);

// F: C' -> C realising the rational marginal q over |C'| = base_size.
std::vector<int> lift_map_for(const std::vector<Rational>& q, std::uint64_t base_size);

// Exact check: q'(c_i, c_j) = q(c_i) q(c_j) for all i != j.
bool verify_lifted(const LiftedFamily& fam);

struct AlphabetEmbedding {
  int q = 1;
  std::vector<int> index;  // original symbol -> padded symbol
};

// Smallest power of two >= dim.
AlphabetEmbedding embed_alphabet(int dim);

}  // namespace qmc
