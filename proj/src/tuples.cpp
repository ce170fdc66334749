#include "pcl/tuples.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "pcl/checked.hpp"

namespace pcl {

int64_t LinearFunction::eval(int64_t n) const { return checked_add(checked_mul(a, n), b); }

std::string format_function(const LinearFunction& f) {
  std::string s = std::to_string(f.a) + "*n";
  if (f.b > 0) s += "+" + std::to_string(f.b);
  if (f.b < 0) s += std::to_string(f.b);
  return s;
}

namespace {

LinearFunction parse_pair(std::string_view item) {
  std::istringstream in{std::string(item)};
  int64_t a = 0, b = 0;
  if (!(in >> a >> b)) throw ParseError("expected 'a b' pair, got '" + std::string(item) + "'");
  std::string rest;
  if (in >> rest) throw ParseError("trailing tokens after 'a b' pair: '" + rest + "'");
  return LinearFunction{a, b};
}

}  // namespace

std::vector<LinearFunction> parse_tuple_text(std::string_view text) {
  std::vector<LinearFunction> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(';', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = text.substr(start, end - start);
    if (item.find_first_not_of(" \t") != std::string_view::npos) out.push_back(parse_pair(item));
    if (end == text.size()) break;
    start = end + 1;
  }
  if (out.empty()) throw ParseError("empty tuple text");
  return out;
}

std::vector<LinearFunction> parse_tuple_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open tuple file: " + path);
  std::vector<LinearFunction> out;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_pair(line));
  }
  if (out.empty()) throw ParseError("tuple file has no components: " + path);
  return out;
}

int64_t omega_p(std::span<const LinearFunction> funcs, int64_t p) {
  if (p < 2) throw DomainError("omega_p requires p >= 2");
  if (p <= kResidueEnumerationBound) {
    int64_t count = 0;
    for (int64_t n = 0; n < p; ++n) {
      bool hit = false;
      for (const auto& f : funcs) {
        if (mod_floor(checked_add(checked_mul(mod_floor(f.a, p), n), f.b), p) == 0) {
          hit = true;
          break;
        }
      }
      if (hit) ++count;
    }
    return count;
  }
  std::set<int64_t> roots;
  for (const auto& f : funcs) {
    int64_t a = mod_floor(f.a, p);
    int64_t b = mod_floor(f.b, p);
    if (a == 0) {
      if (b == 0) return p;  // component vanishes identically mod p
      continue;
    }
    int64_t inv = a == 1 ? 1 : mod_inverse(a, p);
    roots.insert(mul_mod(p - b, inv, p) % p);
  }
  return static_cast<int64_t>(roots.size());
}

bool is_admissible(std::span<const LinearFunction> funcs) {
  if (funcs.empty()) return false;
  std::set<LinearFunction> seen;
  for (const auto& f : funcs) {
    if (f.a == 0) return false;
    if (std::gcd(checked_abs(f.a), checked_abs(f.b)) != 1) return false;
    if (!seen.insert(f).second) return false;
  }
  auto k = static_cast<int64_t>(funcs.size());
  for (int64_t p : small_primes(k)) {
    if (omega_p(funcs, p) >= p) return false;
  }
  return true;
}

AdmissibleTuple make_tuple(std::vector<LinearFunction> funcs) {
  if (funcs.empty()) throw DomainError("empty tuple");
  if (funcs.size() > static_cast<std::size_t>(kMaxK)) throw CapacityError("tuple size beyond supported k");
  std::set<LinearFunction> seen;
  for (const auto& f : funcs) {
    if (f.a == 0) throw DomainError("degenerate component with a = 0");
    if (!seen.insert(f).second) throw DomainError("repeated component " + format_function(f));
  }
  AdmissibleTuple t;
  t.k = static_cast<int>(funcs.size());
  t.funcs = std::move(funcs);
  t.admissible = is_admissible(t.funcs);
  return t;
}

SieveSetup::SieveSetup(AdmissibleTuple tuple, int64_t B) : tuple_(std::move(tuple)), b_(B) {
  if (!tuple_.admissible) throw DomainError("sieve setup requires an admissible tuple");
  if (b_ < 1) throw DomainError("exceptional modulus B must be >= 1");
  if (b_ > 1) {
    for (const auto& [p, e] : factorize(b_).factors) {
      (void)e;
      b_primes_.push_back(p);
    }
  }
  int64_t level = 2 * static_cast<int64_t>(tuple_.k) * tuple_.k;
  __int128 w = 1;
  bool fits = true;
  for (int64_t p : small_primes(level)) {
    if (b_ % p == 0) continue;
    w_primes_.push_back(p);
    w_log_ += std::log(static_cast<double>(p));
    w *= p;
    if (w > INT64_MAX) fits = false;
  }
  if (fits) w_value_ = static_cast<int64_t>(w);
}

int64_t SieveSetup::w_value() const {
  if (!w_value_) throw OverflowError("W exceeds int64 for this k; use w_primes()/w_log()");
  return *w_value_;
}

ResidueData SieveSetup::residue_data(int64_t p) const {
  if (p < 2) throw DomainError("residue_data requires p >= 2");
  if (b_ % p == 0) throw PreconditionError("residue_data for a prime dividing B");
  for (int64_t q : w_primes_) {
    if (q == p) throw PreconditionError("residue_data for a level prime");
  }
  ResidueData rd;
  rd.p = p;
  if (p <= kResidueEnumerationBound) {
    for (int64_t n = 0; n < p; ++n) {
      int j = chosen_component(p, n);
      if (j >= 0) {
        rd.roots.push_back(n);
        rd.chosen.push_back(j);
      }
    }
  } else {
    std::vector<std::pair<int64_t, int>> found;
    for (int j = 0; j < tuple_.k; ++j) {
      const auto& f = tuple_.funcs[static_cast<std::size_t>(j)];
      int64_t a = mod_floor(f.a, p);
      int64_t b = mod_floor(f.b, p);
      if (a == 0) {
        if (b == 0) throw DomainError("component vanishes identically mod p");
        continue;
      }
      int64_t inv = a == 1 ? 1 : mod_inverse(a, p);
      found.emplace_back(mul_mod(p - b, inv, p) % p, j);
    }
    std::sort(found.begin(), found.end());
    for (std::size_t i = 0; i < found.size(); ++i) {
      if (i > 0 && found[i].first == rd.roots.back()) continue;  // shared root keeps smallest j
      rd.roots.push_back(found[i].first);
      rd.chosen.push_back(found[i].second);
    }
  }
  rd.omega = static_cast<int64_t>(rd.roots.size());
  return rd;
}

int SieveSetup::chosen_component(int64_t p, int64_t n_mod_p) const {
  for (int j = 0; j < tuple_.k; ++j) {
    const auto& f = tuple_.funcs[static_cast<std::size_t>(j)];
    if (mod_floor(checked_add(checked_mul(mod_floor(f.a, p), mod_floor(n_mod_p, p)), f.b), p) == 0) return j;
  }
  return -1;
}

bool SieveSetup::component_allowed(int64_t p, int j) const {
  ResidueData rd = residue_data(p);
  return std::find(rd.chosen.begin(), rd.chosen.end(), j) != rd.chosen.end();
}

std::vector<int> SieveSetup::allowed_components(int64_t p) const {
  if (p < 2) throw DomainError("allowed_components requires p >= 2");
  if (b_ % p == 0) throw PreconditionError("allowed_components for a prime dividing B");
  std::vector<std::pair<int64_t, int>> found;
  for (int j = 0; j < tuple_.k; ++j) {
    const auto& f = tuple_.funcs[static_cast<std::size_t>(j)];
    int64_t a = mod_floor(f.a, p);
    int64_t b = mod_floor(f.b, p);
    if (a == 0) {
      if (b == 0) throw DomainError("component vanishes identically mod p");
      continue;
    }
    int64_t inv = a == 1 ? 1 : mod_inverse(a, p);
    found.emplace_back(mul_mod(p - b, inv, p) % p, j);
  }
  std::sort(found.begin(), found.end());
  std::vector<int> out;
  for (std::size_t i = 0; i < found.size(); ++i) {
    if (i > 0 && found[i].first == found[i - 1].first) continue;  // shared root keeps smallest j
    out.push_back(found[i].second);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool in_support(const SieveSetup& setup, std::span<const int64_t> d) {
  if (static_cast<int>(d.size()) != setup.k()) throw DomainError("support vector length != k");
  std::vector<std::pair<int64_t, int>> primes;  // (p, slot)
  for (int j = 0; j < setup.k(); ++j) {
    int64_t dj = d[static_cast<std::size_t>(j)];
    if (dj < 1) throw DomainError("support vector entries must be >= 1");
    if (dj == 1) continue;
    for (const auto& [p, e] : factorize(dj).factors) {
      if (e > 1) return false;  // squarefree required
      primes.emplace_back(p, j);
    }
  }
  std::sort(primes.begin(), primes.end());
  for (std::size_t i = 0; i < primes.size(); ++i) {
    auto [p, j] = primes[i];
    if (i > 0 && primes[i - 1].first == p) return false;  // pairwise coprimality
    if (setup.B() % p == 0) return false;
    if (std::binary_search(setup.w_primes().begin(), setup.w_primes().end(), p)) return false;
    if (!setup.component_allowed(p, j)) return false;
  }
  return true;
}

GreedyResult greedy_admissible(int k, int64_t interval_length, int64_t q, int64_t a) {
  if (k < 1 || k > kMaxK) throw CapacityError("greedy tuple size out of range");
  if (q < 1) throw DomainError("greedy progression modulus must be >= 1");
  if (std::gcd(q, mod_floor(a, q)) != 1) throw DomainError("greedy progression requires gcd(q, a) = 1");
  if (interval_length < 1) throw DomainError("greedy interval must be non-empty");
  if (interval_length > (int64_t{1} << 28)) throw ResourceError("greedy interval too long");

  std::vector<char> alive(static_cast<std::size_t>(interval_length), 1);
  double bound = static_cast<double>(interval_length);
  for (int64_t p : small_primes(k)) {
    bound *= 1.0 - 1.0 / static_cast<double>(p);
    // Residue class of the 1-parameter family a + q*b mod p is determined
    // by b mod p when p does not divide q; otherwise no class is covered.
    if (q % p == 0) continue;
    std::vector<int64_t> count(static_cast<std::size_t>(p), 0);
    for (int64_t b = 0; b < interval_length; ++b) {
      if (alive[static_cast<std::size_t>(b)]) ++count[static_cast<std::size_t>(b % p)];
    }
    int64_t best = 0;
    for (int64_t r = 1; r < p; ++r) {
      if (count[static_cast<std::size_t>(r)] < count[static_cast<std::size_t>(best)]) best = r;
    }
    for (int64_t b = best; b < interval_length; b += p) alive[static_cast<std::size_t>(b)] = 0;
  }

  GreedyResult res;
  res.survivor_lower_bound = bound;
  std::vector<LinearFunction> funcs;
  for (int64_t b = 0; b < interval_length; ++b) {
    if (!alive[static_cast<std::size_t>(b)]) continue;
    ++res.survivors;
    if (static_cast<int>(res.shifts.size()) < k) {
      res.shifts.push_back(b);
      funcs.push_back(LinearFunction{q, checked_add(a, checked_mul(q, b))});
    }
  }
  if (static_cast<int>(res.shifts.size()) < k) throw CapacityError("interval too short: fewer survivors than k");
  res.tuple = make_tuple(std::move(funcs));
  if (!res.tuple.admissible) throw DomainError("greedy construction produced an inadmissible tuple");
  return res;
}

}  // namespace pcl
