#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pcl/tuples.hpp"

namespace pcl {

// phi_omega(d) = prod_{p | d} (p - omega(p)) for squarefree d coprime to
// W*B. Positive because omega(p) <= k < p past the level primes.
int64_t phi_omega(const SieveSetup& setup, int64_t d);

// Truncated singular series prod_{p <= P0, p not dividing D}
// (1 - omega(p)/p) (1 - 1/p)^{-k}, with a certified bound on the absolute
// value of the log of the omitted tail. Requires P0 >= 2k^2, P0 >= every
// prime of D and of B, and P0 >= every ramified prime (p | a_i or
// p | a_i b_j - a_j b_i), so that omega(p) = k exactly in the tail.
struct SingularSeries {
  double value = 0.0;
  int64_t truncation_prime = 0;  // largest prime actually included
  double tail_log_bound = 0.0;   // |log(true/value)| <= this
};
SingularSeries singular_series(const SieveSetup& setup, int64_t D, int64_t P0);

// Same, with the excluded modulus given by its prime set (for moduli like
// W*B whose integer product overflows).
SingularSeries singular_series_excluding(const SieveSetup& setup,
                                         const std::vector<int64_t>& excluded_primes, int64_t P0);

// Tuple discriminant against an extra component L0 = a0*n + b0:
// |a0| * prod_j |a_j b0 - a0 b_j|. Zero iff L0 is proportional to some
// component; that case is flagged degenerate.
struct DeltaValue {
  LinearFunction L0;
  int64_t delta = 0;
  bool degenerate = false;
};
DeltaValue delta_L(const AdmissibleTuple& tuple, LinearFunction L0);

// Sum over positive shifts b = 1..shift_bound with a*n + b not a tuple
// component of delta/phi(delta) for L0 = a*n + b. All tuple components
// must share the lead coefficient a. bound_shape = shift_bound * log k is
// the growth shape this sum is compared against (diagnostic only).
struct DeltaRatioSum {
  double sum = 0.0;
  int64_t terms = 0;
  double bound_shape = 0.0;
};
DeltaRatioSum delta_ratio_sum(const AdmissibleTuple& tuple, int64_t a, int64_t shift_bound);

// Empirical check that sum over squarefree d < z of g(d) G(log d / log z)
// matches c_gamma * log z * int_0^1 G, where g(p) = gamma(p)/(p - gamma(p))
// extended multiplicatively and c_gamma = prod_{p<z} (1-gamma(p)/p)^{-1}(1-1/p).
// gamma(p) = p makes g blow up: flagged as a domain error by the caller
// contract (thrown here). Small z is reported, not rejected.
struct PartialSummationCheck {
  double empirical = 0.0;
  double main_term = 0.0;
  double ratio = 0.0;
  bool degenerate = false;   // main term vanished
  bool small_z = false;      // z < 100: convergence not expected yet
};
PartialSummationCheck partial_summation_check(const std::function<double(int64_t)>& gamma_p,
                                              const std::function<double(double)>& G, int64_t z);

}  // namespace pcl
