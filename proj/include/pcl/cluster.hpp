#pragma once

#include <cstdint>
#include <vector>

namespace pcl {

using std::int64_t;

// One qualifying window [x0, x0 + y] (inclusive) holding `count` primes.
struct ClusterHit {
  int64_t x0 = 0;
  int64_t y = 0;
  int64_t count = 0;
  std::vector<int64_t> primes;  // the primes inside the window, ascending
};

// Every x0 in [lo, hi] whose inclusive window [x0, x0 + y] contains at
// least `threshold` primes, ascending in x0. Ground-truth oracle for the
// sieve-side extraction of dense prime clusters.
std::vector<ClusterHit> scan_dense_intervals(int64_t lo, int64_t hi, int64_t y,
                                             int64_t threshold);

// A run of m + 1 consecutive primes, all congruent to a mod q, starting at
// p_start, with total spread `gap` = p_{n+m} - p_n.
struct StringHit {
  int64_t p_start = 0;
  int m = 0;
  int64_t q = 0;
  int64_t a = 0;
  int64_t gap = 0;
};

struct StringScan {
  int64_t count = 0;
  std::vector<StringHit> hits;
};

// All runs of m + 1 consecutive primes below x_hi lying in the residue
// class a mod q with gap <= epsilon * log(p_start). Overlapping runs count
// separately; epsilon may be infinite. Requires gcd(a, q) = 1 and m >= 0.
StringScan scan_congruent_strings(int64_t x_hi, int64_t q, int64_t a, int m, double epsilon);

}  // namespace pcl
