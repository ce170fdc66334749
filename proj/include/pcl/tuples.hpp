#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcl/arith.hpp"
#include "pcl/errors.hpp"

namespace pcl {

// Largest supported tuple size. Table sizes and the (2k log k)^k scale
// factors stay sane below this.
inline constexpr int kMaxK = 12;

// L(n) = a*n + b with a != 0.
struct LinearFunction {
  int64_t a = 1;
  int64_t b = 0;

  int64_t eval(int64_t n) const;  // checked
  friend auto operator<=>(const LinearFunction&, const LinearFunction&) = default;
};

std::string format_function(const LinearFunction& f);  // "a*n+b"

// Inline tuple text: components separated by ';', each "a b".
// Example: "1 0;1 2" is {n, n+2}.
std::vector<LinearFunction> parse_tuple_text(std::string_view text);

// File form: one "a b" pair per line, '#' starts a comment.
std::vector<LinearFunction> parse_tuple_file(const std::string& path);

// Number of residues r mod p with p | prod_i L_i(r). Zero iff no component
// has a root; equals p exactly when some L_i vanishes identically mod p.
int64_t omega_p(std::span<const LinearFunction> funcs, int64_t p);

// Admissible: every gcd(a_i, b_i) = 1, all a_i != 0, components distinct,
// and omega(p) < p for all primes p <= k. (For p > k each component has at
// most one root, so omega(p) <= k < p automatically.)
bool is_admissible(std::span<const LinearFunction> funcs);

struct AdmissibleTuple {
  int k = 0;
  std::vector<LinearFunction> funcs;
  bool admissible = false;
};

// Validates shape (1 <= k <= kMaxK, a_i != 0, distinct components) and
// records admissibility. Shape violations throw; inadmissibility does not.
AdmissibleTuple make_tuple(std::vector<LinearFunction> funcs);

// Roots of prod_i L_i mod p together with the component each root is
// assigned to: chosen[i] is the smallest index j with p | L_j(roots[i]).
// Distinct roots always get well-defined indices; two roots may share an
// index only if p divides a discriminant a_i b_j - a_j b_i, which the
// divisor-support rules below never allow to matter.
struct ResidueData {
  int64_t p = 0;
  int64_t omega = 0;
  std::vector<int64_t> roots;  // ascending, in [0, p)
  std::vector<int> chosen;     // same length as roots, 0-based component index
};

// Root enumeration crosses over from brute force to modular inversion here.
inline constexpr int64_t kResidueEnumerationBound = 100000;

// Sieve context: a tuple together with the exceptional modulus B.
// Owns the list of "level" primes p <= 2k^2 with p not dividing B, whose
// product W defines the pre-sieve, and answers divisor-support queries.
class SieveSetup {
 public:
  SieveSetup(AdmissibleTuple tuple, int64_t B);

  const AdmissibleTuple& tuple() const { return tuple_; }
  int k() const { return tuple_.k; }
  int64_t B() const { return b_; }

  // Primes p <= 2k^2 with p not dividing B, ascending.
  const std::vector<int64_t>& w_primes() const { return w_primes_; }
  // Distinct primes of B, ascending (empty for B = 1).
  const std::vector<int64_t>& b_primes() const { return b_primes_; }
  // Integer W = prod w_primes; throws OverflowError when it exceeds int64
  // (k >= 6). Floating-point consumers should use the prime list instead.
  int64_t w_value() const;
  // log W, always available.
  double w_log() const { return w_log_; }

  // Root data for a prime p with p not dividing W*B (the divisor ranges
  // never touch level or B primes). p <= kResidueEnumerationBound is
  // enumerated, larger p solved per component by modular inversion.
  ResidueData residue_data(int64_t p) const;

  // Component that prime p is assigned to at n (smallest index j with
  // p | L_j(n)), or -1 when p divides no component value.
  int chosen_component(int64_t p, int64_t n_mod_p) const;

  // True iff some root of p selects component j; only then may p appear
  // in slot j of a divisor-support vector.
  bool component_allowed(int64_t p, int j) const;

  // All components chosen by some root of p, ascending. Always takes the
  // root-solving path, so it is cheap even for large p; property-tested
  // against residue_data's enumeration below the crossover.
  std::vector<int> allowed_components(int64_t p) const;

 private:
  AdmissibleTuple tuple_;
  int64_t b_ = 1;
  std::vector<int64_t> w_primes_;
  std::vector<int64_t> b_primes_;
  std::optional<int64_t> w_value_;
  double w_log_ = 0.0;
};

// Divisor-support membership: every d_j squarefree, pairwise coprime,
// coprime to W*B, and each prime of d_j must have j as its chosen
// component. d has exactly k entries, each >= 1.
bool in_support(const SieveSetup& setup, std::span<const int64_t> d);

// Greedy admissible tuple inside [0, interval_length) for the progression
// q*n + a (gcd(q, a) = 1): for each prime p <= k remove the residue class
// covering fewest survivors (ties: smallest residue), then take the k
// smallest survivors b_1 < ... < b_k and form L_i = q*n + (a + q*b_i).
struct GreedyResult {
  AdmissibleTuple tuple;
  std::vector<int64_t> shifts;     // the chosen b_i
  int64_t survivors = 0;           // survivor count after all removals
  double survivor_lower_bound = 0; // interval_length * prod_{p<=k} (1 - 1/p)
};
GreedyResult greedy_admissible(int k, int64_t interval_length, int64_t q, int64_t a);

}  // namespace pcl
