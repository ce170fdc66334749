#include "pcl/multfunc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pcl/checked.hpp"
#include "pcl/integrals.hpp"
#include "pcl/kahan.hpp"

namespace pcl {

int64_t phi_omega(const SieveSetup& setup, int64_t d) {
  if (d < 1) throw DomainError("phi_omega requires d >= 1");
  int64_t out = 1;
  for (const auto& [p, e] : factorize(d).factors) {
    if (e > 1) throw PreconditionError("phi_omega requires squarefree d");
    ResidueData rd = setup.residue_data(p);  // also rejects level/B primes
    if (rd.omega >= p) throw DomainError("phi_omega vanishes: omega(p) = p");
    out = checked_mul(out, p - rd.omega);
  }
  return out;
}

namespace {

// Largest prime that can be "ramified": divides some a_i, some pairwise
// discriminant a_i b_j - a_j b_i, B, or the excluded modulus. Past it (and
// past 2k^2) omega(p) = k exactly.
int64_t max_special_prime(const SieveSetup& setup, const std::vector<int64_t>& excluded) {
  int64_t m = 2 * static_cast<int64_t>(setup.k()) * setup.k();
  auto absorb = [&m](int64_t n) {
    if (n == 0) return;
    for (const auto& [p, e] : factorize(n).factors) {
      (void)e;
      m = std::max(m, p);
    }
  };
  const auto& fs = setup.tuple().funcs;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    absorb(fs[i].a);
    for (std::size_t j = i + 1; j < fs.size(); ++j) {
      absorb(checked_sub(checked_mul(fs[i].a, fs[j].b), checked_mul(fs[j].a, fs[i].b)));
    }
  }
  absorb(setup.B());
  for (int64_t p : excluded) m = std::max(m, p);
  return m;
}

SingularSeries series_core(const SieveSetup& setup, const std::vector<int64_t>& excluded, int64_t P0) {
  const int k = setup.k();
  if (P0 < 2) throw DomainError("singular series truncation bound must be >= 2");
  int64_t needed = max_special_prime(setup, excluded);
  if (P0 < needed) {
    throw PreconditionError("truncation bound " + std::to_string(P0) +
                            " below largest special prime " + std::to_string(needed));
  }
  const auto& fs = setup.tuple().funcs;
  Kahan log_sum;
  int64_t last = 0;
  for_each_prime(2, P0 + 1, [&](int64_t p) {
    if (std::binary_search(excluded.begin(), excluded.end(), p)) return;
    int64_t omega;
    if (setup.B() % p == 0) {
      omega = 0;  // sieve values are coprime to B by construction
    } else if (p > needed) {
      omega = k;  // past all special primes each component has its own root
    } else {
      omega = omega_p(fs, p);
    }
    double pd = static_cast<double>(p);
    log_sum.add(std::log1p(-static_cast<double>(omega) / pd));
    log_sum.add(-static_cast<double>(k) * std::log1p(-1.0 / pd));
    last = p;
  });
  // Tail: for p > P0, -log f_p = sum_{j>=2} (k^j - k) / (j p^j), bounded by
  // c_k / p^2 with c_k = (k^2 - k) / (2 (1 - k/P0)); summing the bound over
  // p > P0 against the integral gives c_k / (P0 - c_k/P0).
  double ck = (static_cast<double>(k) * k - k) / (2.0 * (1.0 - static_cast<double>(k) / static_cast<double>(P0)));
  double tail = ck > 0 ? ck / (static_cast<double>(P0) - ck / static_cast<double>(P0)) : 0.0;
  SingularSeries out;
  out.value = std::exp(log_sum.value());
  out.truncation_prime = last;
  out.tail_log_bound = tail;
  return out;
}

std::vector<int64_t> primes_of(int64_t D) {
  std::vector<int64_t> out;
  if (D > 1) {
    for (const auto& [p, e] : factorize(D).factors) {
      (void)e;
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace

SingularSeries singular_series(const SieveSetup& setup, int64_t D, int64_t P0) {
  if (D < 1) throw DomainError("excluded modulus D must be >= 1");
  return series_core(setup, primes_of(D), P0);
}

SingularSeries singular_series_excluding(const SieveSetup& setup,
                                         const std::vector<int64_t>& excluded_primes, int64_t P0) {
  std::vector<int64_t> ex = excluded_primes;
  std::sort(ex.begin(), ex.end());
  ex.erase(std::unique(ex.begin(), ex.end()), ex.end());
  return series_core(setup, ex, P0);
}

DeltaValue delta_L(const AdmissibleTuple& tuple, LinearFunction L0) {
  DeltaValue out;
  out.L0 = L0;
  if (L0.a == 0) throw DomainError("delta_L requires a nonzero lead coefficient");
  int64_t prod = checked_abs(L0.a);
  for (const auto& f : tuple.funcs) {
    int64_t disc = checked_sub(checked_mul(f.a, L0.b), checked_mul(L0.a, f.b));
    if (disc == 0) {
      out.delta = 0;
      out.degenerate = true;
      return out;
    }
    prod = checked_mul(prod, checked_abs(disc));
  }
  out.delta = prod;
  return out;
}

DeltaRatioSum delta_ratio_sum(const AdmissibleTuple& tuple, int64_t a, int64_t shift_bound) {
  if (shift_bound < 1) throw DomainError("shift bound must be >= 1");
  for (const auto& f : tuple.funcs) {
    if (f.a != a) throw DomainError("delta_ratio_sum requires all components to share the lead coefficient");
  }
  DeltaRatioSum out;
  out.bound_shape = static_cast<double>(shift_bound) * std::log(static_cast<double>(std::max(tuple.k, 2)));
  Kahan sum;
  for (int64_t b = 1; b <= shift_bound; ++b) {
    bool in_tuple = false;
    for (const auto& f : tuple.funcs) {
      if (f.b == b) {
        in_tuple = true;
        break;
      }
    }
    if (in_tuple) continue;
    DeltaValue dv = delta_L(tuple, LinearFunction{a, b});
    if (dv.degenerate) continue;  // proportional component, excluded like members
    sum.add(static_cast<double>(dv.delta) / static_cast<double>(euler_phi(dv.delta)));
    ++out.terms;
  }
  out.sum = sum.value();
  return out;
}

PartialSummationCheck partial_summation_check(const std::function<double(int64_t)>& gamma_p,
                                              const std::function<double(double)>& G, int64_t z) {
  if (z < 3) throw DomainError("partial summation check requires z >= 3");
  if (z > 2000000) throw ResourceError("partial summation z beyond supported budget");
  std::vector<int64_t> primes = small_primes(z - 1);
  std::vector<double> gp(primes.size());
  double log_z = std::log(static_cast<double>(z));
  for (std::size_t i = 0; i < primes.size(); ++i) {
    double g = gamma_p(primes[i]);
    auto pd = static_cast<double>(primes[i]);
    if (g >= pd) throw DomainError("gamma(p) >= p makes the local factor diverge at p = " + std::to_string(primes[i]));
    gp[i] = g;
  }

  // Depth-first enumeration of squarefree d < z (all prime factors < z is
  // automatic), carrying g(d) = prod gamma(p)/(p - gamma(p)).
  Kahan emp;
  emp.add(G(0.0));  // d = 1 term
  std::vector<std::pair<std::size_t, std::pair<int64_t, double>>> stack;
  for (std::size_t i = 0; i < primes.size(); ++i) {
    if (primes[i] >= z) break;
    stack.push_back({i, {primes[i], gp[i] / (static_cast<double>(primes[i]) - gp[i])}});
  }
  while (!stack.empty()) {
    auto [idx, node] = stack.back();
    stack.pop_back();
    auto [d, g] = node;
    emp.add(g * G(std::log(static_cast<double>(d)) / log_z));
    for (std::size_t j = idx + 1; j < primes.size(); ++j) {
      if (primes[j] >= (z + d - 1) / d) break;  // d * p >= z
      stack.push_back({j, {d * primes[j], g * gp[j] / (static_cast<double>(primes[j]) - gp[j])}});
    }
  }

  Kahan log_c;
  for (std::size_t i = 0; i < primes.size(); ++i) {
    auto pd = static_cast<double>(primes[i]);
    log_c.add(-std::log1p(-gp[i] / pd));
    log_c.add(std::log1p(-1.0 / pd));
  }
  double g_int = integrate_adaptive(G, 0.0, 1.0, 1e-10);

  PartialSummationCheck out;
  out.empirical = emp.value();
  out.main_term = std::exp(log_c.value()) * log_z * g_int;
  out.small_z = z < 100;
  if (out.main_term == 0.0 || !std::isfinite(out.main_term)) {
    out.degenerate = true;
    out.ratio = std::numeric_limits<double>::quiet_NaN();
  } else {
    out.ratio = out.empirical / out.main_term;
  }
  return out;
}

}  // namespace pcl
