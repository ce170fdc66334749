#include <doctest.h>

#include <numeric>
#include <vector>

#include "pcl/arith.hpp"
#include "pcl/checked.hpp"
#include "pcl/errors.hpp"
#include "pcl/rational.hpp"

using namespace pcl;

TEST_CASE("isqrt exact on squares and neighbors") {
  CHECK(isqrt(0) == 0);
  CHECK(isqrt(1) == 1);
  CHECK(isqrt(15) == 3);
  CHECK(isqrt(16) == 4);
  CHECK(isqrt(17) == 4);
  int64_t big = 3037000499;  // floor(sqrt(2^63 - 1))
  CHECK(isqrt(big * big) == big);
  CHECK(isqrt(big * big - 1) == big - 1);
}

TEST_CASE("small_primes and count_primes_below agree with known values") {
  auto ps = small_primes(100);
  CHECK(ps.size() == 25);
  CHECK(ps.front() == 2);
  CHECK(ps.back() == 97);
  CHECK(count_primes_below(100) == 25);
  CHECK(count_primes_below(1000001) == 78498);
  CHECK(count_primes_below(100001) == 9592);
}

TEST_CASE("sieve_primes segments match the simple sieve") {
  auto direct = small_primes(5000);
  std::vector<int64_t> seg;
  for (int64_t lo = 0; lo < 5001; lo += 137) {
    auto part = sieve_primes(lo, std::min<int64_t>(lo + 137, 5001));
    seg.insert(seg.end(), part.begin(), part.end());
  }
  CHECK(seg == direct);
}

TEST_CASE("for_each_prime streams the same primes") {
  std::vector<int64_t> seen;
  for_each_prime(1000, 2000, [&](int64_t p) { seen.push_back(p); });
  CHECK(seen == sieve_primes(1000, 2000));
}

TEST_CASE("prime_flags marks exactly the primes") {
  auto flags = prime_flags(90, 130);
  std::vector<int64_t> got;
  for (int64_t n = 90; n < 130; ++n) {
    if (flags[static_cast<std::size_t>(n - 90)]) got.push_back(n);
  }
  CHECK(got == std::vector<int64_t>{97, 101, 103, 107, 109, 113, 127});
}

TEST_CASE("factorize matches hand factorizations") {
  auto f = factorize(360);
  REQUIRE(f.factors.size() == 3);
  CHECK(f.factors[0] == std::pair<int64_t, int>{2, 3});
  CHECK(f.factors[1] == std::pair<int64_t, int>{3, 2});
  CHECK(f.factors[2] == std::pair<int64_t, int>{5, 1});
  CHECK(factorize(-17).factors == std::vector<std::pair<int64_t, int>>{{17, 1}});
  CHECK(factorize(1).factors.empty());
  CHECK_THROWS_AS(factorize(0), DomainError);
}

TEST_CASE("factorize via spf table agrees with trial division") {
  SpfTable spf = build_spf(1000);
  for (int64_t n = 1; n <= 1000; ++n) {
    CHECK(factorize(n, spf).factors == factorize(n).factors);
  }
}

TEST_CASE("moebius and euler_phi known values") {
  CHECK(moebius(1) == 1);
  CHECK(moebius(2) == -1);
  CHECK(moebius(6) == 1);
  CHECK(moebius(12) == 0);
  CHECK(moebius(30) == -1);
  CHECK(euler_phi(1) == 1);
  CHECK(euler_phi(10) == 4);
  CHECK(euler_phi(210) == 48);
  CHECK(euler_phi(-9) == 6);
}

TEST_CASE("moebius partition identity: sum over divisors") {
  // sum_{d | n} mu(d) = [n = 1]
  for (int64_t n = 1; n <= 200; ++n) {
    int64_t s = 0;
    for (int64_t d = 1; d <= n; ++d) {
      if (n % d == 0) s += moebius(d);
    }
    CHECK(s == (n == 1 ? 1 : 0));
  }
}

TEST_CASE("is_prime on edge cases and larger values") {
  CHECK_FALSE(is_prime(-7));
  CHECK_FALSE(is_prime(0));
  CHECK_FALSE(is_prime(1));
  CHECK(is_prime(2));
  CHECK(is_prime(999983));
  CHECK_FALSE(is_prime(999983LL * 999983LL));
  CHECK(is_prime(1000003));
}

TEST_CASE("mod_inverse and mul_mod") {
  CHECK(mod_inverse(3, 7) == 5);
  CHECK(mod_inverse(10, 17) * 10 % 17 == 1);
  CHECK_THROWS_AS(mod_inverse(4, 8), DomainError);
  CHECK(mul_mod(1000000007, 998244353, 1000000009) ==
        static_cast<int64_t>(__int128{1000000007} * 998244353 % 1000000009));
}

TEST_CASE("checked arithmetic throws instead of wrapping") {
  CHECK(checked_add(1, 2) == 3);
  CHECK_THROWS_AS(checked_add(INT64_MAX, 1), OverflowError);
  CHECK_THROWS_AS(checked_mul(INT64_MAX / 2, 3), OverflowError);
  CHECK_THROWS_AS(checked_abs(INT64_MIN), OverflowError);
  CHECK(mod_floor(-7, 5) == 3);
  CHECK(mod_floor(7, 5) == 2);
  CHECK(mod_floor(-10, 5) == 0);
}

TEST_CASE("rational arithmetic stays reduced and exact") {
  Rational a = Rational::of(2, 4);
  CHECK(a.num == 1);
  CHECK(a.den == 2);
  Rational b = Rational::of(1, 3);
  CHECK((a + b) == Rational::of(5, 6));
  CHECK((a - b) == Rational::of(1, 6));
  CHECK((a * b) == Rational::of(1, 6));
  CHECK((a / b) == Rational::of(3, 2));
  CHECK(Rational::of(-3, -6) == Rational::of(1, 2));
  CHECK(Rational::of(3, -6).num == -1);
  CHECK_THROWS_AS(Rational::of(1, 0), DomainError);
  CHECK(Rational::of(-5, 1).str() == "-5");
  CHECK(Rational::of(-1, 3).str() == "-1/3");
}
