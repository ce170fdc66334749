#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "pcl/errors.hpp"

namespace pcl {

using std::int64_t;

// Segment length for all segmented sieving (bytes per segment ~1 MiB).
inline constexpr int64_t kSieveSegment = int64_t{1} << 20;

// Hard ceiling on any sieving endpoint; beyond this the quadratic base
// sieve cost and flag memory stop being sensible on one machine.
inline constexpr int64_t kMaxSieveBound = int64_t{2} << 40;

// floor(sqrt(n)) exactly, n >= 0.
int64_t isqrt(int64_t n);

// Primes <= limit by a simple odd-only sieve; limit <= ~2^31 intended.
std::vector<int64_t> small_primes(int64_t limit);

// Primes in [lo, hi), ascending. Segmented; hi <= kMaxSieveBound.
std::vector<int64_t> sieve_primes(int64_t lo, int64_t hi);

// Streaming prime visitor over [lo, hi); segments never materialize the
// full prime list, so hi - lo may be large.
void for_each_prime(int64_t lo, int64_t hi, const std::function<void(int64_t)>& fn);

// flags[i] <=> lo + i is prime, for lo + i in [lo, hi).
std::vector<bool> prime_flags(int64_t lo, int64_t hi);

// pi(x - 1): number of primes strictly below x.
int64_t count_primes_below(int64_t x);

// Smallest-prime-factor table for [0, limit]; spf[0] = spf[1] = 0.
struct SpfTable {
  int64_t limit = 0;
  std::vector<std::int32_t> spf;
};
SpfTable build_spf(int64_t limit);

// Prime factorization of |n|, exponents >= 1, primes ascending. n != 0.
struct Factorization {
  int64_t n = 0;
  std::vector<std::pair<int64_t, int>> factors;
};
Factorization factorize(int64_t n);
Factorization factorize(int64_t n, const SpfTable& spf);

// Moebius function of |n|; 0 when a square divides. n != 0.
int moebius(int64_t n);

// Euler totient of |n|. n != 0.
int64_t euler_phi(int64_t n);

// Deterministic primality by trial division; intended for n below ~1e14.
// Negative n and 0, 1 are not prime.
bool is_prime(int64_t n);

// Inverse of a modulo m, gcd(a, m) = 1 required, m >= 2. Result in [1, m).
int64_t mod_inverse(int64_t a, int64_t m);

// (a * b) mod m without overflow, m > 0, inputs reduced or not.
int64_t mul_mod(int64_t a, int64_t b, int64_t m);

}  // namespace pcl
