#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "pcl/integrals.hpp"
#include "pcl/multfunc.hpp"
#include "pcl/tuples.hpp"

namespace pcl {

// Everything the divisor weights depend on: the sieve setup, the level R,
// the profile shape, and the normalization
//   N = (W B / phi(W B))^k * (truncated series excluding the W,B primes).
struct WeightParams {
  std::shared_ptr<const SieveSetup> setup;
  double R = 0.0;
  double log_R = 0.0;
  ProfileShape shape;
  double normalization = 0.0;
  SingularSeries series_wb;  // truncated value behind the normalization
  int64_t series_P0 = 0;

  int k() const { return setup->k(); }
};

WeightParams make_weight_params(std::shared_ptr<const SieveSetup> setup, double R,
                                int64_t series_P0 = 1'000'000);

// y_r: N * F(log r_1 / log R, ..., log r_k / log R) on support vectors,
// zero elsewhere. The outer cutoff kills prod r >= R on its own.
double y_value(const WeightParams& wp, std::span<const int64_t> r);

// Same transform with the telescoped profile (used by the equidistributed
// second-moment diagnostics).
double y_telescope_value(const WeightParams& wp, std::span<const int64_t> r);

// lambda_d = mu(prod d) * (prod d) * sum_{r multiple of d} y_r / phi_omega(r),
// computed freshly by walking extensions of d through the support lattice.
double lambda_value(const WeightParams& wp, std::span<const int64_t> d);

struct SupportPrime {
  int64_t p = 0;
  std::vector<int> components;  // slots some root of p selects
};

// Materialized weight table over all support vectors with prod < R.
class LambdaTable {
 public:
  struct Entry {
    std::vector<int64_t> d;
    std::vector<std::pair<int64_t, int>> primes;  // (p, slot), p ascending
    int64_t prod = 1;
    int64_t phi_omega = 1;
    int mu = 1;
    double y = 0.0;
    double lambda = 0.0;
  };

  double R = 0.0;
  std::vector<SupportPrime> support_primes;
  std::vector<Entry> entries;  // lex-sorted by d

  const Entry* find(std::span<const int64_t> d) const;
  std::size_t size() const { return entries.size(); }

  std::map<std::vector<int64_t>, std::size_t> index;
};

// Budget on materialized entries; beyond this the walk refuses.
inline constexpr std::size_t kMaxLambdaEntries = 5'000'000;

LambdaTable build_lambda_table(const WeightParams& wp);

// w_n: square of the divisor sum at n, zero when a level prime divides
// prod L_i(n). Looks hit primes up in the table.
double weight_value(const WeightParams& wp, const LambdaTable& table, int64_t n);

// Same divisor sum given the support primes hitting n (each with its
// chosen slot); the range scanners collect hits by progression marking and
// share this evaluator with weight_value.
double weight_from_hits(const WeightParams& wp, const LambdaTable& table,
                        std::span<const std::pair<int64_t, int>> hits);

// Invert the table's lambdas back to y and compare with the direct
// transform; exercises the exact Moebius duality of the two definitions.
struct RoundtripReport {
  double max_rel_err = 0.0;
  std::size_t checked = 0;
};
RoundtripReport roundtrip_check(const WeightParams& wp, const LambdaTable& table);

}  // namespace pcl
