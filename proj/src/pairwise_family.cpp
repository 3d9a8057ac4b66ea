#include "qmc/pairwise_family.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "qmc/registers.hpp"

namespace qmc {

namespace {

constexpr std::size_t kTableCap = std::size_t{1} << 26;

std::vector<std::vector<Elem>> position_weights(const GaloisField& f, int t, int n) {
  std::vector<std::vector<Elem>> w(n, std::vector<Elem>(std::max(t, 0), 0));
  if (t == 0) return w;
  ExtensionField ext(f, t);
  std::uint64_t yk = 1;
  for (int k = 0; k < t; ++k) {
    for (int i = 0; i < n; ++i) w[i][k] = ext.digits(ext.mul(yk, static_cast<std::uint64_t>(i)))[0];
    yk *= f.order();
  }
  return w;
}

}  // namespace

int family_degree(std::uint64_t q, int n) {
  if (n < 1) throw ValidationError("family needs n >= 1 positions");
  int t = 0;
  std::uint64_t pw = 1;
  while (pw < static_cast<std::uint64_t>(n)) {
    pw *= q;
    ++t;
  }
  return t;
}

PairwiseFamily::PairwiseFamily(std::uint64_t q, int n) : q_(q), n_(n) {
  field_ = GaloisField::of_order(q);
  t_ = family_degree(q, n);
  std::uint64_t seeds = q;
  for (int k = 0; k < t_; ++k) seeds *= q;
  if (seeds * static_cast<std::uint64_t>(n) > kTableCap)
    throw BudgetExceeded("family table q^(t+1)*n = " + std::to_string(seeds * n) + " exceeds 2^26");
  positions_.resize(n);
  for (int i = 0; i < n; ++i) positions_[i] = static_cast<std::uint64_t>(i);
  weights_ = position_weights(field_, t_, n);
  table_.assign(seeds * static_cast<std::uint64_t>(n), 0);
  const auto S = static_cast<long long>(seeds);
  const int t = t_;
#pragma omp parallel for schedule(static)
  for (long long s = 0; s < S; ++s) {
    std::uint64_t a = static_cast<std::uint64_t>(s) / q;
    const auto b = static_cast<Elem>(static_cast<std::uint64_t>(s) % q);
    std::vector<Elem> ad(t);
    for (int k = 0; k < t; ++k) {
      ad[k] = static_cast<Elem>(a % q);
      a /= q;
    }
    for (int i = 0; i < n; ++i) {
      Elem v = b;
      for (int k = 0; k < t; ++k) v = field_.add(v, field_.mul(ad[k], weights_[i][k]));
      table_[static_cast<std::size_t>(s) * n + i] = static_cast<int>(v);
    }
  }
}

PairwiseFamily build_family(std::uint64_t q, int n) { return PairwiseFamily(q, n); }

int direct_hash(const GaloisField& f, int t, std::uint64_t a, int b, std::uint64_t x) {
  if (t == 0) return b;
  ExtensionField ext(f, t);
  return static_cast<int>(f.add(ext.digits(ext.mul(a, x))[0], static_cast<Elem>(b)));
}

Slice conditional_slice(const PairwiseFamily& fam, int i, int c) {
  if (i < 0 || i >= fam.n()) throw ValidationError("slice position out of range");
  if (c < 0 || static_cast<std::uint64_t>(c) >= fam.q()) throw ValidationError("slice value out of alphabet");
  Slice out;
  for (std::size_t s = 0; s < fam.num_seeds(); ++s) {
    if (fam.value(s, i) != c) continue;
    out.seeds.push_back(s);
    std::vector<int> str;
    for (int j = 0; j < fam.n(); ++j)
      if (j != i) str.push_back(fam.value(s, j));
    out.strings.push_back(std::move(str));
  }
  return out;
}

FamilyCheck verify_family(const PairwiseFamily& fam) {
  FamilyCheck r;
  const std::size_t S = fam.num_seeds();
  const auto q = static_cast<std::int64_t>(fam.q());
  const int n = fam.n();
  std::set<std::vector<int>> rows;
  for (std::size_t s = 0; s < S; ++s) rows.insert(fam.string(s));
  r.support = rows.size();
  r.distinct = rows.size() == S;
  std::uint64_t expect_support = 1;
  for (int k = 0; k <= fam.t(); ++k) expect_support *= fam.q();
  if (S != expect_support) r.distinct = false;

  const Rational mass(1, static_cast<std::int64_t>(S));
  for (int i = 0; i < n; ++i) {
    std::vector<std::int64_t> cnt(q, 0);
    for (std::size_t s = 0; s < S; ++s) ++cnt[fam.value(s, i)];
    for (auto v : cnt)
      if (Rational(v) * mass != Rational(1, q)) r.uniform_marginals = false;
    for (std::int64_t c = 0; c < q; ++c)
      if (static_cast<std::uint64_t>(cnt[c]) * fam.q() != S) r.slices_uniform = false;
  }
  std::vector<int> pair_ok(static_cast<std::size_t>(n), 1);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    std::vector<std::int64_t> cnt(static_cast<std::size_t>(q * q));
    for (int j = i + 1; j < n; ++j) {
      std::fill(cnt.begin(), cnt.end(), 0);
      for (std::size_t s = 0; s < S; ++s) ++cnt[fam.value(s, i) * q + fam.value(s, j)];
      for (auto v : cnt)
        if (Rational(v) * mass != Rational(1, q * q)) pair_ok[i] = 0;
    }
  }
  r.pairwise = std::all_of(pair_ok.begin(), pair_ok.end(), [](int v) { return v == 1; });
  r.ok = r.distinct && r.uniform_marginals && r.pairwise && r.slices_uniform;
  return r;
}

LinearCertificate certify_family(std::uint64_t q, int n) {
  const GaloisField f = GaloisField::of_order(q);
  const int t = family_degree(q, n);
  auto w = position_weights(f, t, n);
  LinearCertificate c;
  std::set<std::vector<Elem>> uniq(w.begin(), w.end());
  c.distinct = uniq.size() == w.size();
  // Gaussian elimination over F_q on the n x t matrix.
  auto m = w;
  int rank = 0;
  for (int col = 0; col < t && rank < n; ++col) {
    int piv = -1;
    for (int r = rank; r < n; ++r)
      if (m[r][col] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    std::swap(m[rank], m[piv]);
    const Elem inv = f.inv(m[rank][col]);
    for (int k = 0; k < t; ++k) m[rank][k] = f.mul(m[rank][k], inv);
    for (int r = 0; r < n; ++r) {
      if (r == rank || m[r][col] == 0) continue;
      const Elem factor = m[r][col];
      for (int k = 0; k < t; ++k) m[r][k] = f.sub(m[r][k], f.mul(factor, m[rank][k]));
    }
    ++rank;
  }
  c.rank = rank;
  c.ok = c.distinct && rank == t;
  return c;
}

LiftedFamily::LiftedFamily(PairwiseFamily base, std::vector<int> map, int target_size)
    : base_(std::move(base)), map_(std::move(map)), target_(target_size) {
  if (map_.size() != base_.q()) throw ValidationError("lift map must cover the base alphabet");
  marginal_.assign(target_, Rational(0));
  for (int c : map_) {
    if (c < 0 || c >= target_) throw ValidationError("lift map value out of target alphabet");
    marginal_[c] += Rational(1, static_cast<std::int64_t>(base_.q()));
  }
}

std::vector<int> LiftedFamily::string(std::size_t seed) const {
  std::vector<int> s(n());
  for (int i = 0; i < n(); ++i) s[i] = value(seed, i);
  return s;
}

LiftedFamily lift_marginal(const PairwiseFamily& fam, const std::vector<int>& map, int target_size) {
  return LiftedFamily(fam, map, target_size);
}

std::vector<int> lift_map_for(const std::vector<Rational>& q, std::uint64_t base_size) {
  std::vector<int> map;
  Rational total(0);
  for (std::size_t c = 0; c < q.size(); ++c) {
    const Rational cnt = q[c] * Rational(static_cast<std::int64_t>(base_size));
    if (cnt.denominator() != 1 || cnt < 0)
      throw ValidationError("marginal not representable over an alphabet of size " + std::to_string(base_size));
    for (std::int64_t k = 0; k < cnt.numerator(); ++k) map.push_back(static_cast<int>(c));
    total += q[c];
  }
  if (total != Rational(1)) throw ValidationError("target marginal does not sum to 1");
  return map;
}

bool verify_lifted(const LiftedFamily& fam) {
  const std::size_t S = fam.num_seeds();
  const int n = fam.n();
  const int q = fam.target_size();
  const Rational mass(1, static_cast<std::int64_t>(S));
  for (int i = 0; i < n; ++i) {
    std::vector<std::int64_t> cnt(q, 0);
    for (std::size_t s = 0; s < S; ++s) ++cnt[fam.value(s, i)];
    for (int c = 0; c < q; ++c)
      if (Rational(cnt[c]) * mass != fam.marginal()[c]) return false;
    for (int j = i + 1; j < n; ++j) {
      std::vector<std::int64_t> pc(static_cast<std::size_t>(q * q), 0);
      for (std::size_t s = 0; s < S; ++s) ++pc[fam.value(s, i) * q + fam.value(s, j)];
      for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b)
          if (Rational(pc[a * q + b]) * mass != fam.marginal()[a] * fam.marginal()[b]) return false;
    }
  }
  return true;
}

AlphabetEmbedding embed_alphabet(int dim) {
  if (dim < 1) throw ValidationError("alphabet size must be >= 1");
  AlphabetEmbedding e;
  e.q = 1;
  while (e.q < dim) e.q *= 2;
  if (e.q < 2) e.q = 2;
  e.index.resize(dim);
  for (int i = 0; i < dim; ++i) e.index[i] = i;
  return e;
}

}  // namespace qmc
