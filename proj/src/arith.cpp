#include "pcl/arith.hpp"

#include <algorithm>
#include <cmath>

#include "pcl/checked.hpp"

namespace pcl {

int64_t isqrt(int64_t n) {
  if (n < 0) throw DomainError("isqrt of negative value");
  if (n < 2) return n;
  auto r = static_cast<int64_t>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && r > n / r) --r;
  while ((r + 1) <= n / (r + 1)) ++r;
  return r;
}

std::vector<int64_t> small_primes(int64_t limit) {
  std::vector<int64_t> out;
  if (limit < 2) return out;
  if (limit > (int64_t{1} << 32)) throw ResourceError("small_primes limit too large; use segmented routines");
  // Odd-only bitmap: bit i represents 2i + 3.
  int64_t n_odd = (limit - 1) / 2;  // count of odd integers in [3, limit]
  std::vector<bool> composite(static_cast<std::size_t>(std::max<int64_t>(n_odd, 0)), false);
  out.push_back(2);
  for (int64_t i = 0; i < n_odd; ++i) {
    if (composite[static_cast<std::size_t>(i)]) continue;
    int64_t p = 2 * i + 3;
    out.push_back(p);
    if (p <= limit / p) {
      for (int64_t j = (p * p - 3) / 2; j < n_odd; j += p) composite[static_cast<std::size_t>(j)] = true;
    }
  }
  return out;
}

namespace {

// Shared segmented-sieve core: visits each prime in [lo, hi) in order.
void segmented_scan(int64_t lo, int64_t hi, const std::function<void(int64_t)>& fn) {
  if (hi > kMaxSieveBound) throw ResourceError("sieve endpoint beyond supported bound");
  if (lo < 0) lo = 0;
  if (hi <= lo) return;
  std::vector<int64_t> base = small_primes(isqrt(hi - 1) + 1);
  std::vector<bool> seg;
  for (int64_t seg_lo = lo; seg_lo < hi; seg_lo += kSieveSegment) {
    int64_t seg_hi = std::min(seg_lo + kSieveSegment, hi);
    auto len = static_cast<std::size_t>(seg_hi - seg_lo);
    seg.assign(len, true);
    for (int64_t p : base) {
      if (p * p >= seg_hi) break;
      int64_t start = std::max(p * p, ((seg_lo + p - 1) / p) * p);
      for (int64_t v = start; v < seg_hi; v += p) seg[static_cast<std::size_t>(v - seg_lo)] = false;
    }
    for (std::size_t i = 0; i < len; ++i) {
      int64_t v = seg_lo + static_cast<int64_t>(i);
      if (v >= 2 && seg[i]) fn(v);
    }
  }
}

}  // namespace

std::vector<int64_t> sieve_primes(int64_t lo, int64_t hi) {
  std::vector<int64_t> out;
  segmented_scan(lo, hi, [&](int64_t p) { out.push_back(p); });
  return out;
}

void for_each_prime(int64_t lo, int64_t hi, const std::function<void(int64_t)>& fn) {
  segmented_scan(lo, hi, fn);
}

std::vector<bool> prime_flags(int64_t lo, int64_t hi) {
  if (hi <= lo) return {};
  if (hi - lo > (int64_t{1} << 33)) throw ResourceError("prime_flags range too large");
  std::vector<bool> flags(static_cast<std::size_t>(hi - lo), false);
  segmented_scan(lo, hi, [&](int64_t p) { flags[static_cast<std::size_t>(p - lo)] = true; });
  return flags;
}

int64_t count_primes_below(int64_t x) {
  int64_t n = 0;
  segmented_scan(0, x, [&](int64_t) { ++n; });
  return n;
}

SpfTable build_spf(int64_t limit) {
  if (limit < 0) throw DomainError("build_spf of negative limit");
  if (limit > (int64_t{1} << 31)) throw ResourceError("spf table limit too large");
  SpfTable t;
  t.limit = limit;
  t.spf.assign(static_cast<std::size_t>(limit + 1), 0);
  for (int64_t i = 2; i <= limit; ++i) {
    if (t.spf[static_cast<std::size_t>(i)] == 0) {
      for (int64_t j = i; j <= limit; j += i) {
        if (t.spf[static_cast<std::size_t>(j)] == 0) t.spf[static_cast<std::size_t>(j)] = static_cast<std::int32_t>(i);
      }
    }
  }
  return t;
}

namespace {

Factorization factorize_trial(int64_t n) {
  Factorization f;
  f.n = n;
  int64_t m = checked_abs(n);
  for (int64_t p = 2; p <= m / p; ++p) {
    if (m % p == 0) {
      int e = 0;
      while (m % p == 0) {
        m /= p;
        ++e;
      }
      f.factors.emplace_back(p, e);
    }
  }
  if (m > 1) f.factors.emplace_back(m, 1);
  return f;
}

}  // namespace

Factorization factorize(int64_t n) {
  if (n == 0) throw DomainError("factorize(0)");
  return factorize_trial(n);
}

Factorization factorize(int64_t n, const SpfTable& spf) {
  if (n == 0) throw DomainError("factorize(0)");
  int64_t m = checked_abs(n);
  if (m > spf.limit) return factorize_trial(n);
  Factorization f;
  f.n = n;
  while (m > 1) {
    int64_t p = spf.spf[static_cast<std::size_t>(m)];
    int e = 0;
    while (m % p == 0) {
      m /= p;
      ++e;
    }
    f.factors.emplace_back(p, e);
  }
  return f;
}

int moebius(int64_t n) {
  Factorization f = factorize(n);
  int sign = 1;
  for (const auto& [p, e] : f.factors) {
    (void)p;
    if (e > 1) return 0;
    sign = -sign;
  }
  return sign;
}

int64_t euler_phi(int64_t n) {
  Factorization f = factorize(n);
  int64_t phi = 1;
  for (const auto& [p, e] : f.factors) {
    phi = checked_mul(phi, p - 1);
    for (int i = 1; i < e; ++i) phi = checked_mul(phi, p);
  }
  return phi;
}

bool is_prime(int64_t n) {
  if (n < 2) return false;
  if (n < 4) return true;
  if (n % 2 == 0) return false;
  for (int64_t p = 3; p <= n / p; p += 2) {
    if (n % p == 0) return false;
  }
  return true;
}

int64_t mod_inverse(int64_t a, int64_t m) {
  if (m < 2) throw DomainError("mod_inverse modulus < 2");
  int64_t r0 = m, r1 = mod_floor(a, m);
  int64_t t0 = 0, t1 = 1;
  while (r1 != 0) {
    int64_t q = r0 / r1;
    int64_t r2 = r0 - q * r1;
    int64_t t2 = t0 - q * t1;
    r0 = r1;
    r1 = r2;
    t0 = t1;
    t1 = t2;
  }
  if (r0 != 1) throw DomainError("mod_inverse of non-unit");
  return mod_floor(t0, m);
}

int64_t mul_mod(int64_t a, int64_t b, int64_t m) {
  if (m <= 0) throw DomainError("mul_mod modulus <= 0");
  auto r = static_cast<__int128>(mod_floor(a, m)) * static_cast<__int128>(mod_floor(b, m));
  return static_cast<int64_t>(r % m);
}

}  // namespace pcl
