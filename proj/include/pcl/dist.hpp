#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcl/arith.hpp"
#include "pcl/tuples.hpp"

namespace pcl {

// The ambient integer set: dyadic interval [x, 2x), short interval
// [x, x+y), or an explicit sorted list.
struct IntegerSetSpec {
  enum class Kind { Interval, ShortInterval, Explicit };
  Kind kind = Kind::Interval;
  int64_t y = 0;                    // short-interval length
  std::vector<int64_t> elements;    // explicit kind; kept sorted

  static IntegerSetSpec interval();
  static IntegerSetSpec short_interval(int64_t y);
  static IntegerSetSpec explicit_list(std::vector<int64_t> elements);
};

// Contiguous range [lo, hi) realized by the spec at scale x; Explicit kind
// reports the covering range of its elements clipped to [x, 2x).
struct SetRange {
  int64_t lo = 0;
  int64_t hi = 0;
};
SetRange set_range(const IntegerSetSpec& spec, int64_t x);

bool in_A(const IntegerSetSpec& spec, int64_t x, int64_t n);
int64_t count_A(const IntegerSetSpec& spec, int64_t x);
int64_t count_A(const IntegerSetSpec& spec, int64_t x, int64_t q, int64_t a);

// The prime subset: all primes, primes in a progression, the even-indexed
// primes p_2, p_4, ... (global 1-based indexing from p_1 = 2), or an
// explicit list.
struct PrimeSubsetSpec {
  enum class Kind { All, Congruent, EvenIndex, Explicit };
  Kind kind = Kind::All;
  int64_t q = 0;
  int64_t a = 0;
  std::vector<int64_t> elements;  // explicit kind; kept sorted

  static PrimeSubsetSpec all();
  static PrimeSubsetSpec congruent(int64_t q, int64_t a);
  static PrimeSubsetSpec even_index();
  static PrimeSubsetSpec explicit_list(std::vector<int64_t> elements);
};

// Membership oracle for values in [value_lo, value_hi): sieves the range
// once, and for the even-index kind anchors the global index by counting
// primes below value_lo.
class PrimeView {
 public:
  PrimeView(const PrimeSubsetSpec& spec, int64_t value_lo, int64_t value_hi);

  bool contains(int64_t v) const;
  int64_t count_in_range() const;
  int64_t lo() const { return lo_; }
  int64_t hi() const { return hi_; }

 private:
  PrimeSubsetSpec spec_;
  int64_t lo_ = 0;
  int64_t hi_ = 0;
  std::vector<bool> member_;
};

// phi_L(q) = phi(|l1| q) / phi(|l1|) for L = l1 n + l2; the divisibility is
// exact, computed prime-by-prime.
int64_t phi_L(const LinearFunction& L, int64_t q);

// #{n in A(x; q, a) : L(n) in P}; q = 1, a = 0 gives the plain count.
int64_t count_P(const PrimeSubsetSpec& P, const LinearFunction& L, const IntegerSetSpec& A,
                int64_t x, int64_t q = 1, int64_t a = 0);

// Equidistribution scan rows.
struct BVRow {
  int64_t q = 0;
  double e_q = 0.0;           // worst-residue absolute deviation
  int64_t worst_a = 0;
  double concentration = 0.0; // max_a count * (q or phi_L(q)) / total
};

struct BVReport {
  std::string kind;           // "A" or "P"
  int64_t x = 0;
  int64_t q_max = 0;
  double normalization = 0.0; // #A(x) or #P_{L,A}(x)
  double total = 0.0;         // sum of e_q
  std::vector<BVRow> rows;
};

// Deviations of A(x) across residues for every q <= q_max.
BVReport bv_scan_A(const IntegerSetSpec& A, int64_t x, int64_t q_max, int jobs = 1);

// Deviations of {n in A(x) : L(n) in P} across residues a with
// (L(a), q) = 1, for every q <= q_max with (q, B) = 1.
BVReport bv_scan_P(const PrimeSubsetSpec& P, const LinearFunction& L, const IntegerSetSpec& A,
                   int64_t x, int64_t q_max, int64_t B, int jobs = 1);

// True iff every prime factor of n exceeds x^xi or divides D. n >= 1.
bool rough_indicator(int64_t n, double xi, int64_t D, int64_t x);

}  // namespace pcl
