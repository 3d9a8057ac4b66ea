#include "qmc/galois.hpp"

#include <stdexcept>

#include "qmc/registers.hpp"

namespace qmc {

bool prime_power(std::uint64_t q, int* p, int* d) {
  if (q < 2) return false;
  std::uint64_t f = 0;
  for (std::uint64_t k = 2; k * k <= q; ++k)
    if (q % k == 0) {
      f = k;
      break;
    }
  if (f == 0) f = q;
  int e = 0;
  while (q % f == 0) {
    q /= f;
    ++e;
  }
  if (q != 1) return false;
  if (p) *p = static_cast<int>(f);
  if (d) *d = e;
  return true;
}

namespace {

using Poly = std::vector<Elem>;

void trim(Poly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

// Remainder of a modulo m (m nonzero) over the field f.
Poly poly_mod(Poly a, const Poly& m, const GaloisField& f) {
  trim(a);
  const std::size_t dm = m.size() - 1;
  const Elem lead_inv = f.inv(m.back());
  while (a.size() >= m.size()) {
    const Elem c = f.mul(a.back(), lead_inv);
    const std::size_t shift = a.size() - 1 - dm;
    for (std::size_t i = 0; i <= dm; ++i) a[shift + i] = f.sub(a[shift + i], f.mul(c, m[i]));
    trim(a);
  }
  return a;
}

Poly monic_from_index(std::uint64_t v, int deg, Elem q) {
  Poly c(static_cast<std::size_t>(deg) + 1, 0);
  for (int i = 0; i < deg; ++i) {
    c[i] = static_cast<Elem>(v % q);
    v /= q;
  }
  c[deg] = 1;
  return c;
}

std::uint64_t ipow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

bool is_irreducible_over(const GaloisField& f, const std::vector<Elem>& poly) {
  Poly a = poly;
  trim(a);
  const int deg = static_cast<int>(a.size()) - 1;
  if (deg < 1) return false;
  for (int k = 1; 2 * k <= deg; ++k) {
    const std::uint64_t count = ipow(f.order(), k);
    for (std::uint64_t v = 0; v < count; ++v)
      if (poly_mod(a, monic_from_index(v, k, f.order()), f).empty()) return false;
  }
  return true;
}

std::vector<Elem> smallest_irreducible_over(const GaloisField& f, int t) {
  if (t < 1) throw ValidationError("irreducible polynomial degree must be >= 1");
  const std::uint64_t count = ipow(f.order(), t);
  for (std::uint64_t v = 0; v < count; ++v) {
    Poly c = monic_from_index(v, t, f.order());
    if (is_irreducible_over(f, c)) return c;
  }
  throw Error("no irreducible polynomial found");
}

std::vector<int> smallest_irreducible_prime(int p, int d) {
  GaloisField fp(p, 1);
  auto c = smallest_irreducible_over(fp, d);
  return std::vector<int>(c.begin(), c.end());
}

bool is_irreducible_prime(const std::vector<int>& poly, int p) {
  GaloisField fp(p, 1);
  return is_irreducible_over(fp, Poly(poly.begin(), poly.end()));
}

GaloisField::GaloisField(int p, int d) : p_(p), d_(d) {
  int pp = 0, dd = 0;
  if (!prime_power(static_cast<std::uint64_t>(p), &pp, &dd) || dd != 1)
    throw ValidationError("field characteristic must be prime");
  if (d < 1) throw ValidationError("field degree must be >= 1");
  const std::uint64_t q = ipow(static_cast<std::uint64_t>(p), d);
  if (q > (std::uint64_t{1} << 30)) throw BudgetExceeded("field order too large");
  q_ = static_cast<Elem>(q);
  if (d == 1) mod_ = {0, 1};
  else mod_ = smallest_irreducible_prime(p, d);
  if (q_ <= 256) {
    mul_table_.assign(static_cast<std::size_t>(q_) * q_, 0);
    for (Elem a = 0; a < q_; ++a)
      for (Elem b = 0; b < q_; ++b) mul_table_[a * q_ + b] = mul_slow(a, b);
    inv_table_.assign(q_, 0);
    for (Elem a = 1; a < q_; ++a)
      for (Elem b = 1; b < q_; ++b)
        if (mul_table_[a * q_ + b] == 1) {
          inv_table_[a] = b;
          break;
        }
  }
}

GaloisField GaloisField::of_order(std::uint64_t q) {
  int p = 0, d = 0;
  if (!prime_power(q, &p, &d)) throw ValidationError("alphabet size " + std::to_string(q) + " is not a prime power");
  return GaloisField(p, d);
}

Elem GaloisField::add(Elem a, Elem b) const {
  if (p_ == 2) return a ^ b;
  Elem r = 0, s = 1;
  for (int i = 0; i < d_; ++i) {
    r += ((a % p_ + b % p_) % p_) * s;
    a /= p_;
    b /= p_;
    s *= p_;
  }
  return r;
}

Elem GaloisField::neg(Elem a) const {
  if (p_ == 2) return a;
  Elem r = 0, s = 1;
  for (int i = 0; i < d_; ++i) {
    r += ((p_ - a % p_) % p_) * s;
    a /= p_;
    s *= p_;
  }
  return r;
}

Elem GaloisField::sub(Elem a, Elem b) const { return add(a, neg(b)); }

Elem GaloisField::mul_slow(Elem a, Elem b) const {
  std::vector<int> x(d_), y(d_);
  for (int i = 0; i < d_; ++i) {
    x[i] = static_cast<int>(a % p_);
    a /= p_;
    y[i] = static_cast<int>(b % p_);
    b /= p_;
  }
  std::vector<long long> z(2 * d_ - 1, 0);
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j) z[i + j] = (z[i + j] + x[i] * y[j]) % p_;
  for (int k = 2 * d_ - 2; k >= d_; --k) {
    const long long c = z[k];
    if (c == 0) continue;
    for (int i = 0; i <= d_; ++i) z[k - d_ + i] = ((z[k - d_ + i] - c * mod_[i]) % p_ + p_) % p_;
  }
  Elem r = 0, s = 1;
  for (int i = 0; i < d_; ++i) {
    r += static_cast<Elem>(z[i]) * s;
    s *= p_;
  }
  return r;
}

Elem GaloisField::mul(Elem a, Elem b) const {
  if (!mul_table_.empty()) return mul_table_[a * q_ + b];
  return mul_slow(a, b);
}

Elem GaloisField::inv(Elem a) const {
  if (a == 0) throw ValidationError("inverse of zero");
  if (!inv_table_.empty()) return inv_table_[a];
  Elem r = 1, base = a;
  std::uint64_t e = q_ - 2;
  while (e) {
    if (e & 1) r = mul(r, base);
    base = mul(base, base);
    e >>= 1;
  }
  return r;
}

ExtensionField::ExtensionField(const GaloisField& base, int t) : base_(base), t_(t) {
  if (t < 1) throw ValidationError("extension degree must be >= 1");
  order_ = ipow(base.order(), t);
  if (t == 1) mod_ = {0, 1};
  else mod_ = smallest_irreducible_over(base, t);
}

std::vector<Elem> ExtensionField::digits(std::uint64_t x) const {
  std::vector<Elem> c(t_);
  for (int i = 0; i < t_; ++i) {
    c[i] = static_cast<Elem>(x % base_.order());
    x /= base_.order();
  }
  return c;
}

std::uint64_t ExtensionField::encode(const std::vector<Elem>& c) const {
  std::uint64_t r = 0;
  for (int i = t_; i-- > 0;) r = r * base_.order() + c[i];
  return r;
}

std::uint64_t ExtensionField::add(std::uint64_t a, std::uint64_t b) const {
  auto x = digits(a), y = digits(b);
  for (int i = 0; i < t_; ++i) x[i] = base_.add(x[i], y[i]);
  return encode(x);
}

std::uint64_t ExtensionField::mul(std::uint64_t a, std::uint64_t b) const {
  auto x = digits(a), y = digits(b);
  Poly z(2 * t_ - 1, 0);
  for (int i = 0; i < t_; ++i)
    for (int j = 0; j < t_; ++j) z[i + j] = base_.add(z[i + j], base_.mul(x[i], y[j]));
  z = poly_mod(z, mod_, base_);
  z.resize(t_, 0);
  return encode(z);
}

}  // namespace qmc
