#include "pcl/dist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pcl/checked.hpp"
#include "pcl/kahan.hpp"
#include "pcl/parallel.hpp"

namespace pcl {

namespace {

int64_t floor_div(int64_t a, int64_t b) {
  int64_t q = a / b, r = a % b;
  return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

// #{n in [lo, hi) : n = a (mod q)}
int64_t progression_count(int64_t lo, int64_t hi, int64_t q, int64_t a) {
  if (hi <= lo) return 0;
  return floor_div(hi - 1 - a, q) - floor_div(lo - 1 - a, q);
}

}  // namespace

IntegerSetSpec IntegerSetSpec::interval() { return IntegerSetSpec{}; }

IntegerSetSpec IntegerSetSpec::short_interval(int64_t y) {
  if (y < 0) throw DomainError("short interval length must be >= 0");
  IntegerSetSpec s;
  s.kind = Kind::ShortInterval;
  s.y = y;
  return s;
}

IntegerSetSpec IntegerSetSpec::explicit_list(std::vector<int64_t> elements) {
  IntegerSetSpec s;
  s.kind = Kind::Explicit;
  std::sort(elements.begin(), elements.end());
  elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
  s.elements = std::move(elements);
  return s;
}

SetRange set_range(const IntegerSetSpec& spec, int64_t x) {
  if (x < 1) throw DomainError("scale x must be >= 1");
  switch (spec.kind) {
    case IntegerSetSpec::Kind::Interval:
      return SetRange{x, checked_mul(x, 2)};
    case IntegerSetSpec::Kind::ShortInterval:
      return SetRange{x, std::min(checked_add(x, spec.y), checked_mul(x, 2))};
    case IntegerSetSpec::Kind::Explicit: {
      SetRange r{x, checked_mul(x, 2)};
      auto lo = std::lower_bound(spec.elements.begin(), spec.elements.end(), r.lo);
      auto hi = std::lower_bound(spec.elements.begin(), spec.elements.end(), r.hi);
      if (lo == hi) return SetRange{x, x};
      return SetRange{*lo, *(hi - 1) + 1};
    }
  }
  throw DomainError("unknown set kind");
}

bool in_A(const IntegerSetSpec& spec, int64_t x, int64_t n) {
  SetRange dyadic{x, checked_mul(x, 2)};
  if (n < dyadic.lo || n >= dyadic.hi) return false;
  switch (spec.kind) {
    case IntegerSetSpec::Kind::Interval:
      return true;
    case IntegerSetSpec::Kind::ShortInterval:
      return n < checked_add(x, spec.y);
    case IntegerSetSpec::Kind::Explicit:
      return std::binary_search(spec.elements.begin(), spec.elements.end(), n);
  }
  throw DomainError("unknown set kind");
}

int64_t count_A(const IntegerSetSpec& spec, int64_t x) { return count_A(spec, x, 1, 0); }

int64_t count_A(const IntegerSetSpec& spec, int64_t x, int64_t q, int64_t a) {
  if (q < 1) throw DomainError("progression modulus must be >= 1");
  switch (spec.kind) {
    case IntegerSetSpec::Kind::Interval:
    case IntegerSetSpec::Kind::ShortInterval: {
      SetRange r = set_range(spec, x);
      return progression_count(r.lo, r.hi, q, a);
    }
    case IntegerSetSpec::Kind::Explicit: {
      int64_t lo = x, hi = checked_mul(x, 2);
      int64_t n = 0;
      for (int64_t e : spec.elements) {
        if (e < lo || e >= hi) continue;
        if (mod_floor(e - a, q) == 0) ++n;
      }
      return n;
    }
  }
  throw DomainError("unknown set kind");
}

PrimeSubsetSpec PrimeSubsetSpec::all() { return PrimeSubsetSpec{}; }

PrimeSubsetSpec PrimeSubsetSpec::congruent(int64_t q, int64_t a) {
  if (q < 1) throw DomainError("prime progression modulus must be >= 1");
  PrimeSubsetSpec s;
  s.kind = Kind::Congruent;
  s.q = q;
  s.a = mod_floor(a, q);
  return s;
}

PrimeSubsetSpec PrimeSubsetSpec::even_index() {
  PrimeSubsetSpec s;
  s.kind = Kind::EvenIndex;
  return s;
}

PrimeSubsetSpec PrimeSubsetSpec::explicit_list(std::vector<int64_t> elements) {
  PrimeSubsetSpec s;
  s.kind = Kind::Explicit;
  std::sort(elements.begin(), elements.end());
  elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
  s.elements = std::move(elements);
  return s;
}

PrimeView::PrimeView(const PrimeSubsetSpec& spec, int64_t value_lo, int64_t value_hi)
    : spec_(spec), lo_(std::max<int64_t>(value_lo, 0)), hi_(std::max<int64_t>(value_hi, 0)) {
  if (hi_ < lo_) hi_ = lo_;
  if (spec_.kind == PrimeSubsetSpec::Kind::Explicit) return;  // list membership needs no sieve
  member_ = prime_flags(lo_, hi_);
  switch (spec_.kind) {
    case PrimeSubsetSpec::Kind::All:
      break;
    case PrimeSubsetSpec::Kind::Congruent: {
      for (int64_t v = lo_; v < hi_; ++v) {
        if (member_[static_cast<std::size_t>(v - lo_)] && mod_floor(v - spec_.a, spec_.q) != 0) {
          member_[static_cast<std::size_t>(v - lo_)] = false;
        }
      }
      break;
    }
    case PrimeSubsetSpec::Kind::EvenIndex: {
      // 1-based global prime index; keep p_2, p_4, ...
      int64_t index = count_primes_below(lo_);
      for (int64_t v = lo_; v < hi_; ++v) {
        if (!member_[static_cast<std::size_t>(v - lo_)]) continue;
        ++index;
        if (index % 2 != 0) member_[static_cast<std::size_t>(v - lo_)] = false;
      }
      break;
    }
    case PrimeSubsetSpec::Kind::Explicit:
      break;
  }
}

bool PrimeView::contains(int64_t v) const {
  if (spec_.kind == PrimeSubsetSpec::Kind::Explicit) {
    return std::binary_search(spec_.elements.begin(), spec_.elements.end(), v);
  }
  if (v < lo_ || v >= hi_) return false;
  return member_[static_cast<std::size_t>(v - lo_)];
}

int64_t PrimeView::count_in_range() const {
  if (spec_.kind == PrimeSubsetSpec::Kind::Explicit) {
    auto a = std::lower_bound(spec_.elements.begin(), spec_.elements.end(), lo_);
    auto b = std::lower_bound(spec_.elements.begin(), spec_.elements.end(), hi_);
    return b - a;
  }
  return std::count(member_.begin(), member_.end(), true);
}

int64_t phi_L(const LinearFunction& L, int64_t q) {
  if (q < 1) throw DomainError("phi_L requires q >= 1");
  int64_t l1 = checked_abs(L.a);
  return euler_phi(checked_mul(l1, q)) / euler_phi(l1);
}

namespace {

// Minimal/maximal value of L over [lo, hi), plus a half-open cover.
SetRange value_range(const LinearFunction& L, int64_t lo, int64_t hi) {
  if (hi <= lo) return SetRange{0, 0};
  int64_t v1 = L.eval(lo), v2 = L.eval(hi - 1);
  if (v1 > v2) std::swap(v1, v2);
  return SetRange{v1, checked_add(v2, 1)};
}

}  // namespace

int64_t count_P(const PrimeSubsetSpec& P, const LinearFunction& L, const IntegerSetSpec& A,
                int64_t x, int64_t q, int64_t a) {
  if (q < 1) throw DomainError("progression modulus must be >= 1");
  SetRange r = set_range(A, x);
  if (r.hi <= r.lo) return 0;
  if (r.hi - r.lo > (int64_t{1} << 31)) throw ResourceError("count_P range beyond sieve budget");
  SetRange vals = value_range(L, r.lo, r.hi);
  PrimeView view(P, vals.lo, vals.hi);
  int64_t n_count = 0;
  if (A.kind == IntegerSetSpec::Kind::Explicit) {
    for (int64_t e : A.elements) {
      if (!in_A(A, x, e)) continue;
      if (mod_floor(e - a, q) != 0) continue;
      if (view.contains(L.eval(e))) ++n_count;
    }
    return n_count;
  }
  int64_t start = r.lo + mod_floor(a - r.lo, q);
  for (int64_t n = start; n < r.hi; n += q) {
    if (view.contains(L.eval(n))) ++n_count;
  }
  return n_count;
}

BVReport bv_scan_A(const IntegerSetSpec& A, int64_t x, int64_t q_max, int jobs) {
  if (q_max < 1) throw DomainError("q_max must be >= 1");
  BVReport rep;
  rep.kind = "A";
  rep.x = x;
  rep.q_max = q_max;
  auto total_count = static_cast<double>(count_A(A, x));
  rep.normalization = total_count;
  rep.rows.resize(static_cast<std::size_t>(q_max));
  for_each_chunk(1, q_max + 1, 64, jobs, [&](std::size_t, int64_t q_lo, int64_t q_hi) {
    for (int64_t q = q_lo; q < q_hi; ++q) {
      BVRow row;
      row.q = q;
      double expected = total_count / static_cast<double>(q);
      double best_dev = -1.0;
      double best_conc = 0.0;
      for (int64_t a = 0; a < q; ++a) {
        auto c = static_cast<double>(count_A(A, x, q, a));
        double dev = std::fabs(c - expected);
        if (dev > best_dev) {
          best_dev = dev;
          row.worst_a = a;
        }
        if (total_count > 0) best_conc = std::max(best_conc, c * static_cast<double>(q) / total_count);
      }
      row.e_q = best_dev;
      row.concentration = best_conc;
      rep.rows[static_cast<std::size_t>(q - 1)] = row;
    }
  });
  Kahan total;
  for (const auto& row : rep.rows) total.add(row.e_q);
  rep.total = total.value();
  return rep;
}

BVReport bv_scan_P(const PrimeSubsetSpec& P, const LinearFunction& L, const IntegerSetSpec& A,
                   int64_t x, int64_t q_max, int64_t B, int jobs) {
  if (q_max < 1) throw DomainError("q_max must be >= 1");
  if (B < 1) throw DomainError("exceptional modulus B must be >= 1");
  SetRange r = set_range(A, x);
  if (r.hi - r.lo > (int64_t{1} << 31)) throw ResourceError("bv scan range beyond sieve budget");
  SetRange vals = value_range(L, r.lo, r.hi);
  PrimeView view(P, vals.lo, vals.hi);

  // Gather the members once; every q then buckets this list.
  std::vector<int64_t> hits;
  for (int64_t n = r.lo; n < r.hi; ++n) {
    if (!in_A(A, x, n)) continue;
    if (view.contains(L.eval(n))) hits.push_back(n);
  }

  BVReport rep;
  rep.kind = "P";
  rep.x = x;
  rep.q_max = q_max;
  rep.normalization = static_cast<double>(hits.size());
  std::vector<BVRow> rows(static_cast<std::size_t>(q_max));
  std::vector<char> used(static_cast<std::size_t>(q_max), 0);
  for_each_chunk(1, q_max + 1, 16, jobs, [&](std::size_t, int64_t q_lo, int64_t q_hi) {
    std::vector<int64_t> bucket;
    for (int64_t q = q_lo; q < q_hi; ++q) {
      if (std::gcd(q, B) != 1) continue;
      bucket.assign(static_cast<std::size_t>(q), 0);
      for (int64_t n : hits) ++bucket[static_cast<std::size_t>(mod_floor(n, q))];
      auto phi = static_cast<double>(phi_L(L, q));
      double expected = rep.normalization / phi;
      BVRow row;
      row.q = q;
      double best_dev = -1.0;
      double best_conc = 0.0;
      for (int64_t a = 0; a < q; ++a) {
        if (std::gcd(mod_floor(L.eval(a), q), q) != 1) continue;
        auto c = static_cast<double>(bucket[static_cast<std::size_t>(a)]);
        double dev = std::fabs(c - expected);
        if (dev > best_dev) {
          best_dev = dev;
          row.worst_a = a;
        }
        if (rep.normalization > 0) best_conc = std::max(best_conc, c * phi / rep.normalization);
      }
      if (best_dev < 0) continue;  // no admissible residue
      row.e_q = best_dev;
      row.concentration = best_conc;
      rows[static_cast<std::size_t>(q - 1)] = row;
      used[static_cast<std::size_t>(q - 1)] = 1;
    }
  });
  Kahan total;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!used[i]) continue;
    rep.rows.push_back(rows[i]);
    total.add(rows[i].e_q);
  }
  rep.total = total.value();
  return rep;
}

bool rough_indicator(int64_t n, double xi, int64_t D, int64_t x) {
  if (n < 1) throw DomainError("rough_indicator requires n >= 1");
  if (D < 1) throw DomainError("rough_indicator requires D >= 1");
  if (x < 1) throw DomainError("rough_indicator requires x >= 1");
  if (xi < 0) throw DomainError("rough_indicator requires xi >= 0");
  long double threshold = std::pow(static_cast<long double>(x), static_cast<long double>(xi));
  if (threshold > 1e9L) throw ResourceError("x^xi beyond trial-division budget");
  auto t = static_cast<int64_t>(threshold);
  bool rough = true;
  for_each_prime(2, std::min<int64_t>(t, n) + 1, [&](int64_t p) {
    if (rough && n % p == 0 && D % p != 0) rough = false;
  });
  return rough;
}

}  // namespace pcl
