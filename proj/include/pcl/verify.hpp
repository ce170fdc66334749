#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pcl/dist.hpp"
#include "pcl/rational.hpp"
#include "pcl/weights.hpp"

namespace pcl {

// Shared state for the empirical proposition sums: the weight machinery,
// the ambient set, the prime subset, and the scan policy knobs.
struct VerifyContext {
  WeightParams params;
  LambdaTable table;
  IntegerSetSpec A;
  PrimeSubsetSpec P;
  int64_t x = 0;
  double theta = 0.5;  // exponent policy window used by warnings
  int jobs = 1;

  const SieveSetup& setup() const { return *params.setup; }
  int k() const { return params.k(); }
};

struct PropParameters {
  int64_t x = 0;
  double R = 0.0;
  int k = 0;
  int64_t B = 1;
  double rho = 0.0;
  double xi = 0.0;
  int64_t D = 1;
};

// One proposition-sum comparison: the measured divisor-weight sum against
// the predicted main term (S1, S2) or upper bound (S3, S4).
struct PropReport {
  std::string which;
  double empirical = 0.0;
  double predicted = 0.0;
  double ratio = 0.0;
  PropParameters parameters;
  double runtime = 0.0;  // seconds spent scanning

  // Diagnostics beyond the required fields.
  int m_index = -1;
  int64_t set_count = 0;         // #A(x) or the prime count behind `predicted`
  int64_t nonzero_weights = 0;   // #n with w_n > 0
  bool discrete_available = false;
  double discrete_predicted = 0.0;  // exact divisor-sum main term (small tables)
  double discrete_ratio = 0.0;
  bool flagged_empty = false;
  std::string note;
};

// sum of w_n over A(x) vs (B/phi(B))^k * S_B * #A(x) * (log R)^k * I_k.
PropReport sum_S1(const VerifyContext& ctx);

// sum of 1_P(L_m(n)) w_n vs (B/phi(B))^(k-1) * S_B * prod_{p|a_m, p∤B}(p-1)/p
// * #P_{L,A}(x) * (log R)^(k+1) * J_k. Requires L_m(n) > R on the range.
PropReport sum_S2(const VerifyContext& ctx, int m_index);

// sum of 1_{rough}(L0(n)) w_n vs the bound xi^{-1} * (Delta/phi(Delta)) *
// (D/phi(D)) * (B/phi(B))^k * S_B * #A(x) * (log R)^(k-1) * I_k.
PropReport sum_S3(const VerifyContext& ctx, LinearFunction L0, double xi, int64_t D);

// sum of (#{p | L_m(n) : p < x^rho, p coprime to B}) w_n vs the bound
// rho^2 k^4 (log k)^2 * (B/phi(B))^k * S_B * #A(x) * (log R)^k * I_k.
PropReport sum_S4(const VerifyContext& ctx, int m_index, double rho);

// Pigeonhole extraction. Basic bracket per n:
//   sum_i 1_P(L_i(n)) - m - k * sum_i #{p | L_i(n) : p < x^rho, p coprime B}.
// Consecutive mode subtracts k more for every shift b <= eta*log(x) outside
// the tuple whose value a*n+b has all prime factors > x^(theta/10); a
// positive bracket then pins m+1 consecutive primes.
enum class ExtractMode { Basic, Consecutive };

struct ExtractedPoint {
  int64_t n = 0;
  int prime_hits = 0;
  double weight = 0.0;
  double bracket = 0.0;
  std::vector<int64_t> prime_values;  // the L_i(n) that landed in P
};

struct ExtractionResult {
  int m = 0;
  ExtractMode mode = ExtractMode::Basic;
  double rho = 0.0;
  double eta = 0.0;
  double s_value = 0.0;  // sum over n of bracket * w_n
  std::vector<ExtractedPoint> extracted;
  int64_t violations = 0;
  int64_t nonzero_weights = 0;
};

ExtractionResult combined_extract(const VerifyContext& ctx, int m, double rho, ExtractMode mode,
                                  double eta = 0.0);

// Exact verification of the three local-sum closed forms by exhaustive
// rational enumeration of the defining sums.
enum class LocalSumVariant { Sp, SpM, SpMPrime };

struct LocalSumCase {
  std::string label;
  Rational brute;
  Rational closed;
};

struct LocalSumReport {
  int k = 0;
  int64_t p = 0;
  LocalSumVariant variant = LocalSumVariant::Sp;
  int64_t cases = 0;
  std::vector<LocalSumCase> mismatches;  // must stay empty

  bool pass() const { return mismatches.empty(); }
};

// For SpM / SpMPrime the closed forms depend on the distinguished index and
// on whether p divides its lead coefficient; both are explicit inputs.
LocalSumReport sp_identity_check(int k, int64_t p, LocalSumVariant variant, int m_index = 0,
                                 bool p_divides_am = false);

struct LocalSumGrid {
  int64_t cases = 0;
  int64_t mismatches = 0;
  std::vector<LocalSumCase> samples;  // first few mismatches, for reporting
};

// Everything at once: k = 1..k_max, all primes given, all variants, all
// distinguished indices, both lead-divisibility settings.
LocalSumGrid sp_identity_grid(int k_max, const std::vector<int64_t>& ps);

// delta statistic: (1/k) (phi(B)/B) sum_i (phi(|a_i|)/|a_i|) #P_{L_i,A}(x)
// normalized by #A(x)/log(x).
double delta_estimate(const VerifyContext& ctx);

// Direct evaluation of the m-pinned transform
//   y^(m)_r = mu(r) phi_omega(r) sum_{d multiple of r, d_m = 1} lambda'_d / phi_L(d)
// where lambda' keeps only d with every (d_j, a_j b_m - a_m b_j) = 1.
double ym_direct(const WeightParams& wp, const LambdaTable& table, std::span<const int64_t> r,
                 int m_index);

// Leading-shape comparison for y^(m)_r (reported, never asserted: the shape
// carries an implied-constant error term).
struct YmShape {
  double direct = 0.0;
  double leading = 0.0;
  double ratio = 0.0;
};
YmShape ym_leading_shape(const WeightParams& wp, const LambdaTable& table,
                         std::span<const int64_t> r, int m_index);

}  // namespace pcl
