#include <doctest.h>

#include <cmath>
#include <vector>

#include "pcl/dist.hpp"
#include "pcl/errors.hpp"

using namespace pcl;

TEST_CASE("set specs realize the three ambient kinds") {
  auto dyadic = IntegerSetSpec::interval();
  CHECK(set_range(dyadic, 10).lo == 10);
  CHECK(set_range(dyadic, 10).hi == 20);
  CHECK(count_A(dyadic, 10) == 10);
  CHECK(in_A(dyadic, 10, 10));
  CHECK(in_A(dyadic, 10, 19));
  CHECK_FALSE(in_A(dyadic, 10, 20));
  CHECK_FALSE(in_A(dyadic, 10, 9));

  auto shorty = IntegerSetSpec::short_interval(5);
  CHECK(set_range(shorty, 10).lo == 10);
  CHECK(set_range(shorty, 10).hi == 15);
  CHECK(count_A(shorty, 10) == 5);
  CHECK_THROWS_AS(IntegerSetSpec::short_interval(-1), DomainError);

  auto listed = IntegerSetSpec::explicit_list({3, 5, 8, 12, 15, 30});
  CHECK(count_A(listed, 5) == 2);  // clipped to [5, 10): {5, 8}
  CHECK(in_A(listed, 5, 5));
  CHECK(in_A(listed, 5, 8));
  CHECK_FALSE(in_A(listed, 5, 3));
  CHECK_FALSE(in_A(listed, 5, 12));
  CHECK_FALSE(in_A(listed, 5, 6));
}

TEST_CASE("progression counts partition the ambient set") {
  auto dyadic = IntegerSetSpec::interval();
  CHECK(count_A(dyadic, 10, 3, 1) == 4);  // 10, 13, 16, 19
  int64_t total = 0;
  for (int64_t a = 0; a < 7; ++a) total += count_A(dyadic, 50, 7, a);
  CHECK(total == count_A(dyadic, 50));
  CHECK_THROWS_AS(count_A(dyadic, 10, 0, 0), DomainError);
}

TEST_CASE("prime views cover the four subset kinds") {
  PrimeView all(PrimeSubsetSpec::all(), 10, 30);
  CHECK(all.contains(11));
  CHECK(all.contains(29));
  CHECK_FALSE(all.contains(21));
  CHECK(all.count_in_range() == 6);  // 11 13 17 19 23 29

  PrimeView cong(PrimeSubsetSpec::congruent(4, 1), 10, 30);
  CHECK(cong.contains(13));
  CHECK(cong.contains(17));
  CHECK(cong.contains(29));
  CHECK_FALSE(cong.contains(11));
  CHECK(cong.count_in_range() == 3);

  // global prime indexing from p_1 = 2: the even-indexed members below 20
  // are p_2 = 3, p_4 = 7, p_6 = 13, p_8 = 19
  PrimeView even(PrimeSubsetSpec::even_index(), 2, 20);
  CHECK(even.contains(3));
  CHECK(even.contains(7));
  CHECK(even.contains(13));
  CHECK(even.contains(19));
  CHECK_FALSE(even.contains(2));
  CHECK_FALSE(even.contains(5));
  CHECK_FALSE(even.contains(11));
  CHECK(even.count_in_range() == 4);

  // anchoring away from the origin keeps the global parity
  PrimeView even_far(PrimeSubsetSpec::even_index(), 10, 20);
  CHECK(even_far.contains(13));
  CHECK(even_far.contains(19));
  CHECK_FALSE(even_far.contains(11));
  CHECK_FALSE(even_far.contains(17));

  // the explicit kind is pure list membership: no sieve, no window clipping
  // in contains, though count_in_range respects the window
  PrimeView listed(PrimeSubsetSpec::explicit_list({13, 17, 40}), 10, 30);
  CHECK(listed.contains(13));
  CHECK_FALSE(listed.contains(11));
  CHECK(listed.contains(40));
  CHECK(listed.count_in_range() == 2);
}

TEST_CASE("phi_L folds the lead coefficient into the totient") {
  LinearFunction twin{2, 1};  // 2n + 1
  CHECK(phi_L(twin, 5) == 4);   // phi(10)/phi(2) = 4
  CHECK(phi_L(twin, 2) == 2);   // phi(4)/phi(2): both residues keep 2n+1 odd
  LinearFunction six{6, 1};
  CHECK(phi_L(six, 4) == 4);    // phi(24)/phi(6) = 8/2
  LinearFunction plain{1, 0};
  for (int64_t q : {2, 6, 30, 97}) CHECK(phi_L(plain, q) == euler_phi(q));
  CHECK_THROWS_AS(phi_L(plain, 0), DomainError);
}

TEST_CASE("count_P counts prime values over the realized set") {
  auto dyadic = IntegerSetSpec::interval();
  LinearFunction odd{2, 1};
  // n in [5, 10): 11 13 15 17 19 -> four primes
  CHECK(count_P(PrimeSubsetSpec::all(), odd, dyadic, 5) == 4);
  LinearFunction plain{1, 0};
  CHECK(count_P(PrimeSubsetSpec::congruent(4, 1), plain, dyadic, 10) == 2);  // 13, 17
  // progression restriction on n itself
  CHECK(count_P(PrimeSubsetSpec::all(), plain, dyadic, 10, 3, 2) == 2);  // 11, 17
  CHECK_THROWS_AS(count_P(PrimeSubsetSpec::all(), plain, dyadic, 10, 0, 0), DomainError);
}

TEST_CASE("rough indicator tests smoothness against the scale") {
  // x = 100, xi = 0.5: prime factors must exceed 10 or divide D
  CHECK_FALSE(rough_indicator(77, 0.5, 1, 100));   // 7 * 11
  CHECK(rough_indicator(77, 0.5, 7, 100));         // 7 | D now
  CHECK(rough_indicator(121, 0.5, 1, 100));        // 11 * 11
  CHECK_FALSE(rough_indicator(70, 0.5, 1, 100));   // 2, 5, 7 all small
  CHECK(rough_indicator(1, 0.5, 1, 100));          // vacuous
  CHECK(rough_indicator(6, 0.0, 1, 100));          // threshold 1: everything rough
  CHECK_THROWS_AS(rough_indicator(0, 0.5, 1, 100), DomainError);
  CHECK_THROWS_AS(rough_indicator(10, 0.5, 0, 100), DomainError);
  CHECK_THROWS_AS(rough_indicator(10, -0.1, 1, 100), DomainError);
}

TEST_CASE("ambient-side scan reports worst-residue deviations") {
  BVReport rep = bv_scan_A(IntegerSetSpec::interval(), 10, 3);
  CHECK(rep.kind == "A");
  CHECK(rep.x == 10);
  CHECK(rep.q_max == 3);
  CHECK(rep.normalization == doctest::Approx(10.0));
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows[0].q == 1);
  CHECK(rep.rows[0].e_q == doctest::Approx(0.0));
  // [10, 20) mod 3 splits 3 / 4 / 3 against a flat 10/3
  CHECK(rep.rows[2].q == 3);
  CHECK(rep.rows[2].e_q == doctest::Approx(4.0 - 10.0 / 3.0).epsilon(1e-12));
  CHECK(rep.rows[2].worst_a == 1);
  CHECK(rep.rows[2].concentration == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(rep.total == doctest::Approx(rep.rows[0].e_q + rep.rows[1].e_q + rep.rows[2].e_q));
  CHECK_THROWS_AS(bv_scan_A(IntegerSetSpec::interval(), 10, 0), DomainError);
}

TEST_CASE("prime-side scan restricts to residues coprime to the value") {
  auto dyadic = IntegerSetSpec::interval();
  LinearFunction plain{1, 0};
  BVReport rep = bv_scan_P(PrimeSubsetSpec::all(), plain, dyadic, 100, 3, 1);
  CHECK(rep.kind == "P");
  CHECK(rep.normalization == doctest::Approx(21.0));  // pi(200) - pi(100)
  REQUIRE(rep.rows.size() == 3);
  // mod 3 the 21 primes in [100, 200) split 10 / 11 across a = 1, 2
  CHECK(rep.rows[2].e_q == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rep.rows[2].concentration == doctest::Approx(22.0 / 21.0).epsilon(1e-12));
  CHECK(rep.rows[0].e_q == doctest::Approx(0.0));
  CHECK(rep.rows[1].e_q == doctest::Approx(0.0));  // every prime here is odd
  CHECK(rep.total == doctest::Approx(0.5).epsilon(1e-12));

  // moduli sharing a factor with B are skipped
  BVReport masked = bv_scan_P(PrimeSubsetSpec::all(), plain, dyadic, 100, 3, 2);
  REQUIRE(masked.rows.size() == 2);
  CHECK(masked.rows[0].q == 1);
  CHECK(masked.rows[1].q == 3);

  CHECK_THROWS_AS(bv_scan_P(PrimeSubsetSpec::all(), plain, dyadic, 100, 3, 0), DomainError);
}

TEST_CASE("scan results are independent of the job count") {
  auto dyadic = IntegerSetSpec::interval();
  LinearFunction odd{2, 1};
  BVReport one = bv_scan_P(PrimeSubsetSpec::all(), odd, dyadic, 5000, 25, 1, 1);
  BVReport four = bv_scan_P(PrimeSubsetSpec::all(), odd, dyadic, 5000, 25, 1, 4);
  REQUIRE(one.rows.size() == four.rows.size());
  CHECK(one.normalization == four.normalization);
  CHECK(one.total == four.total);
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    CHECK(one.rows[i].e_q == four.rows[i].e_q);
    CHECK(one.rows[i].worst_a == four.rows[i].worst_a);
  }
}
