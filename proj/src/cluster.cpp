#include "pcl/cluster.hpp"

#include <cmath>
#include <numeric>

#include "pcl/arith.hpp"
#include "pcl/checked.hpp"
#include "pcl/errors.hpp"

namespace pcl {

namespace {

constexpr int64_t kMaxHits = int64_t{1} << 21;
constexpr int64_t kMaxWindow = int64_t{1} << 20;

}  // namespace

std::vector<ClusterHit> scan_dense_intervals(int64_t lo, int64_t hi, int64_t y,
                                             int64_t threshold) {
  if (lo < 0 || hi < lo) throw DomainError("interval scan needs 0 <= lo <= hi");
  if (y < 0) throw DomainError("window length must be >= 0");
  if (threshold < 1) throw DomainError("prime threshold must be >= 1");
  if (y > kMaxWindow) throw ResourceError("window length beyond scan budget");
  int64_t flags_hi = checked_add(checked_add(hi, y), 1);
  if (flags_hi > kMaxSieveBound || flags_hi - lo > (int64_t{1} << 31)) {
    throw ResourceError("interval scan beyond sieve budget");
  }

  std::vector<bool> flags = prime_flags(lo, flags_hi);
  auto flag_at = [&](int64_t n) { return flags[static_cast<std::size_t>(n - lo)]; };

  int64_t count = 0;
  for (int64_t n = lo; n <= lo + y; ++n) count += flag_at(n);

  std::vector<ClusterHit> hits;
  for (int64_t x0 = lo; x0 <= hi; ++x0) {
    if (count >= threshold) {
      if (static_cast<int64_t>(hits.size()) >= kMaxHits) {
        throw CapacityError("hit list beyond budget");
      }
      ClusterHit hit;
      hit.x0 = x0;
      hit.y = y;
      hit.count = count;
      hit.primes.reserve(static_cast<std::size_t>(count));
      for (int64_t n = x0; n <= x0 + y; ++n) {
        if (flag_at(n)) hit.primes.push_back(n);
      }
      hits.push_back(std::move(hit));
    }
    count -= flag_at(x0);
    if (x0 + y + 1 < flags_hi) count += flag_at(x0 + y + 1);
  }
  return hits;
}

StringScan scan_congruent_strings(int64_t x_hi, int64_t q, int64_t a, int m, double epsilon) {
  if (q < 1) throw DomainError("modulus must be >= 1");
  if (std::gcd(mod_floor(a, q), q) != 1) throw DomainError("residue not coprime to modulus");
  if (m < 0) throw DomainError("run length parameter must be >= 0");
  if (epsilon < 0) throw DomainError("gap budget must be >= 0");
  if (m > (1 << 20)) throw ResourceError("run length beyond scan budget");
  int64_t residue = mod_floor(a, q);

  StringScan scan;
  auto window = static_cast<std::size_t>(m) + 1;
  std::vector<int64_t> ring(window, 0);
  std::size_t filled = 0;
  std::size_t head = 0;     // index of the oldest prime in the ring
  std::size_t matched = 0;  // how many primes in the ring are in the class

  for_each_prime(2, x_hi, [&](int64_t p) {
    bool good = mod_floor(p, q) == residue;
    if (filled == window) {
      matched -= mod_floor(ring[head], q) == residue ? 1 : 0;
    } else {
      ++filled;
    }
    ring[head] = p;
    head = (head + 1) % window;
    matched += good ? 1 : 0;
    if (filled < window || matched != window) return;
    int64_t start = ring[head];  // oldest entry after advancing head
    int64_t gap = p - start;
    if (static_cast<double>(gap) > epsilon * std::log(static_cast<double>(start))) return;
    ++scan.count;
    if (static_cast<int64_t>(scan.hits.size()) < kMaxHits) {
      scan.hits.push_back(StringHit{start, m, q, a, gap});
    }
  });
  return scan;
}

}  // namespace pcl
