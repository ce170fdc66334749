#include "pcl/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>

#include "pcl/checked.hpp"
#include "pcl/integrals.hpp"
#include "pcl/kahan.hpp"
#include "pcl/multfunc.hpp"
#include "pcl/parallel.hpp"

namespace pcl {

namespace {

constexpr int64_t kSegmentLength = 1 << 18;
constexpr int64_t kScanBudget = int64_t{1} << 31;
constexpr int64_t kValueRangeBudget = int64_t{1} << 28;
constexpr double kTrialDivisionCap = 1e8;
constexpr std::size_t kDiscreteDiagnosticCap = 2000;
constexpr std::size_t kMaxExtracted = 1'000'000;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::size_t chunk_count(int64_t lo, int64_t hi) {
  if (hi <= lo) return 0;
  return static_cast<std::size_t>((hi - lo + kSegmentLength - 1) / kSegmentLength);
}

// Value interval covered by L over [lo, hi), as a half-open range.
SetRange value_cover(const LinearFunction& L, int64_t lo, int64_t hi) {
  if (hi <= lo) return SetRange{0, 0};
  int64_t v1 = L.eval(lo), v2 = L.eval(hi - 1);
  if (v1 > v2) std::swap(v1, v2);
  return SetRange{v1, checked_add(v2, 1)};
}

// Arithmetic-progression marks over a segment.
struct MarkClass {
  int64_t p = 0;
  int64_t residue = 0;  // in [0, p); ignored when everywhere is set
  bool everywhere = false;
};

// Residue of the root of L mod p, if any.
std::optional<MarkClass> root_class(const LinearFunction& L, int64_t p) {
  int64_t a = mod_floor(L.a, p);
  int64_t b = mod_floor(L.b, p);
  if (a == 0) {
    if (b == 0) return MarkClass{p, 0, true};
    return std::nullopt;
  }
  return MarkClass{p, mod_floor(-b * mod_inverse(a, p), p), false};
}

template <typename Body>
void mark_progressions(const std::vector<MarkClass>& classes, int64_t seg_lo, int64_t seg_hi,
                       Body&& body) {
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const MarkClass& mc = classes[c];
    int64_t first = mc.everywhere ? seg_lo : seg_lo + mod_floor(mc.residue - seg_lo, mc.p);
    int64_t step = mc.everywhere ? 1 : mc.p;
    for (int64_t n = first; n < seg_hi; n += step) {
      body(c, static_cast<std::size_t>(n - seg_lo));
    }
  }
}

// Distinct-prime divisor classes of L below a real threshold, skipping the
// primes of `skip_modulus`.
std::vector<MarkClass> small_prime_classes(const LinearFunction& L, double threshold, bool strict,
                                           int64_t skip_modulus) {
  if (threshold > kTrialDivisionCap) throw ResourceError("prime threshold beyond scan budget");
  std::vector<MarkClass> classes;
  auto cap = static_cast<int64_t>(threshold);
  for_each_prime(2, cap + 1, [&](int64_t p) {
    auto pd = static_cast<double>(p);
    if (strict ? (pd >= threshold) : (pd > threshold)) return;
    if (skip_modulus % p == 0) return;
    if (auto mc = root_class(L, p)) classes.push_back(*mc);
  });
  return classes;
}

// Segmented weight evaluator: reproduces weight_value over a range by
// progression marking, delivering per-chunk spans in deterministic order.
class WeightScanner {
 public:
  WeightScanner(const WeightParams& wp, const LambdaTable& table) : wp_(&wp), table_(&table) {
    const SieveSetup& setup = *wp.setup;
    for (int64_t p : setup.w_primes()) {
      for (int64_t r = 0; r < p; ++r) {
        if (setup.chosen_component(p, r) >= 0) zero_.push_back(MarkClass{p, r, false});
      }
    }
    for (const SupportPrime& sp : table.support_primes) {
      ResidueData rd = setup.residue_data(sp.p);
      for (std::size_t i = 0; i < rd.roots.size(); ++i) {
        support_.push_back(SupportClass{sp.p, rd.roots[i], rd.chosen[i]});
      }
    }
    base_weight_ = weight_from_hits(wp, table, {});
  }

  // consume(chunk_index, seg_lo, weights) runs on whole segments; chunk
  // indices are dense and ascending with n.
  void run(int64_t lo, int64_t hi, int jobs,
           const std::function<void(std::size_t, int64_t, std::span<const double>)>& consume) const {
    if (hi <= lo) return;
    if (hi - lo > kScanBudget) throw ResourceError("weight scan range beyond budget");
    for_each_chunk(lo, hi, kSegmentLength, jobs, [&](std::size_t chunk, int64_t c_lo, int64_t c_hi) {
      auto len = static_cast<std::size_t>(c_hi - c_lo);
      std::vector<char> zero(len, 0);
      mark_progressions(zero_, c_lo, c_hi, [&](std::size_t, std::size_t i) { zero[i] = 1; });
      std::vector<double> w(len, 0.0);
      if (support_.empty()) {
        for (std::size_t i = 0; i < len; ++i) w[i] = zero[i] ? 0.0 : base_weight_;
      } else {
        // Single-linked hit lists per n; classes walked in reverse so each
        // list comes out ascending in p, matching weight_value's order.
        std::vector<int32_t> head(len, -1);
        std::vector<std::pair<int32_t, int32_t>> nodes;  // (class, next)
        for (std::size_t ci = support_.size(); ci-- > 0;) {
          const SupportClass& sc = support_[ci];
          int64_t first = c_lo + mod_floor(sc.residue - c_lo, sc.p);
          for (int64_t n = first; n < c_hi; n += sc.p) {
            auto i = static_cast<std::size_t>(n - c_lo);
            nodes.emplace_back(static_cast<int32_t>(ci), head[i]);
            head[i] = static_cast<int32_t>(nodes.size() - 1);
          }
        }
        std::vector<std::pair<int64_t, int>> hits;
        for (std::size_t i = 0; i < len; ++i) {
          if (zero[i]) continue;
          hits.clear();
          for (int32_t node = head[i]; node >= 0; node = nodes[static_cast<std::size_t>(node)].second) {
            const SupportClass& sc = support_[static_cast<std::size_t>(
                nodes[static_cast<std::size_t>(node)].first)];
            hits.emplace_back(sc.p, sc.component);
          }
          w[i] = hits.empty() ? base_weight_ : weight_from_hits(*wp_, *table_, hits);
        }
      }
      consume(chunk, c_lo, std::span<const double>(w));
    });
  }

 private:
  struct SupportClass {
    int64_t p = 0;
    int64_t residue = 0;
    int component = 0;
  };

  const WeightParams* wp_;
  const LambdaTable* table_;
  std::vector<MarkClass> zero_;
  std::vector<SupportClass> support_;
  double base_weight_ = 0.0;
};

double b_over_phi_b(const SieveSetup& setup) {
  double v = 1.0;
  for (int64_t p : setup.b_primes()) v *= static_cast<double>(p) / static_cast<double>(p - 1);
  return v;
}

double n_over_phi_n(int64_t n) {
  double v = 1.0;
  for (const auto& [p, e] : factorize(n).factors) {
    v *= static_cast<double>(p) / static_cast<double>(p - 1);
  }
  return v;
}

double series_B(const VerifyContext& ctx) {
  return singular_series(ctx.setup(), ctx.setup().B(), ctx.params.series_P0).value;
}

double integral_F(int k, IntegralKind kind) {
  return profile_integral(k, kind, ProfileVariant::Full, IntegralMethod::Convolution).value;
}

PropParameters base_parameters(const VerifyContext& ctx) {
  PropParameters p;
  p.x = ctx.x;
  p.R = ctx.params.R;
  p.k = ctx.k();
  p.B = ctx.setup().B();
  return p;
}

void finish_ratio(PropReport& rep) {
  if (rep.predicted != 0.0) {
    rep.ratio = rep.empirical / rep.predicted;
  } else {
    rep.ratio = 0.0;
    if (!rep.note.empty()) rep.note += "; ";
    rep.note += "predicted term vanished";
  }
}

// Density of the level pre-sieve: prod over level primes of (p - omega(p))/p.
double level_mask_density(const VerifyContext& ctx) {
  double v = 1.0;
  for (int64_t p : ctx.setup().w_primes()) {
    int64_t om = omega_p(ctx.setup().tuple().funcs, p);
    v *= static_cast<double>(p - om) / static_cast<double>(p);
  }
  return v;
}

// Exact diagonal main term sum_{r,s} y_r y_s / (phi_omega(r) phi_omega(s))
// * prod_{p | rs} S_p(r, s), with the local factor p-1 when both vectors
// carry p in the same slot, -1 in different slots, 0 when only one side
// carries p. Pairs with different prime sets vanish, so entries are grouped
// by their prime set. `pinned` >= 0 restricts to d_pinned = 1 and switches
// to the m-pinned local factors with the given y values: the diagonal is
// p - 2 for p coprime to the pinned lead, p - 1 when p divides it.
double table_pair_sum(const LambdaTable& table, const std::vector<double>& y, int pinned,
                      int64_t pinned_lead) {
  std::map<std::vector<int64_t>, std::vector<std::size_t>> groups;
  for (std::size_t idx = 0; idx < table.entries.size(); ++idx) {
    const auto& e = table.entries[idx];
    if (pinned >= 0 && e.d[static_cast<std::size_t>(pinned)] != 1) continue;
    std::vector<int64_t> key;
    key.reserve(e.primes.size());
    for (const auto& [p, slot] : e.primes) key.push_back(p);
    groups[std::move(key)].push_back(idx);
  }
  Kahan total;
  for (const auto& [key, members] : groups) {
    for (std::size_t a : members) {
      const auto& ea = table.entries[a];
      if (y[a] == 0.0) continue;
      for (std::size_t b : members) {
        const auto& eb = table.entries[b];
        if (y[b] == 0.0) continue;
        double factor = 1.0;
        for (std::size_t i = 0; i < ea.primes.size(); ++i) {
          int64_t p = ea.primes[i].first;
          if (ea.primes[i].second == eb.primes[i].second) {
            double diag = -1.0;
            if (pinned >= 0) diag = mod_floor(pinned_lead, p) == 0 ? -1.0 : -2.0;
            factor *= static_cast<double>(p) + diag;
          } else {
            factor *= -1.0;
          }
        }
        total.add(y[a] * y[b] * factor /
                  (static_cast<double>(ea.phi_omega) * static_cast<double>(eb.phi_omega)));
      }
    }
  }
  return total.value();
}

// phi_L(p) for the pinned component: p when p divides its lead, else p - 1.
double phi_L_prime(int64_t p, int64_t a_m) {
  return mod_floor(a_m, p) == 0 ? static_cast<double>(p) : static_cast<double>(p - 1);
}

}  // namespace

PropReport sum_S1(const VerifyContext& ctx) {
  double t0 = now_seconds();
  PropReport rep;
  rep.which = "S1";
  rep.parameters = base_parameters(ctx);
  SetRange range = set_range(ctx.A, ctx.x);
  int64_t count = count_A(ctx.A, ctx.x);
  rep.set_count = count;
  rep.flagged_empty = count == 0;
  if (rep.flagged_empty) rep.note = "empty ambient set";

  WeightScanner scanner(ctx.params, ctx.table);
  std::size_t nc = chunk_count(range.lo, range.hi);
  std::vector<Kahan> sums(nc);
  std::vector<int64_t> nonzero(nc, 0);
  bool whole = ctx.A.kind != IntegerSetSpec::Kind::Explicit;
  scanner.run(range.lo, range.hi, ctx.jobs,
              [&](std::size_t chunk, int64_t seg_lo, std::span<const double> w) {
                for (std::size_t i = 0; i < w.size(); ++i) {
                  if (w[i] == 0.0) continue;
                  int64_t n = seg_lo + static_cast<int64_t>(i);
                  if (!whole && !in_A(ctx.A, ctx.x, n)) continue;
                  sums[chunk].add(w[i]);
                  ++nonzero[chunk];
                }
              });
  Kahan total;
  for (std::size_t c = 0; c < nc; ++c) {
    total.merge(sums[c]);
    rep.nonzero_weights += nonzero[c];
  }
  rep.empirical = total.value();

  int k = ctx.k();
  rep.predicted = std::pow(b_over_phi_b(ctx.setup()), k) * series_B(ctx) *
                  static_cast<double>(count) * std::pow(ctx.params.log_R, k) *
                  integral_F(k, IntegralKind::I);
  finish_ratio(rep);

  if (ctx.table.size() <= kDiscreteDiagnosticCap) {
    std::vector<double> y(ctx.table.size());
    for (std::size_t i = 0; i < ctx.table.size(); ++i) y[i] = ctx.table.entries[i].y;
    rep.discrete_available = true;
    rep.discrete_predicted = static_cast<double>(count) * level_mask_density(ctx) *
                             table_pair_sum(ctx.table, y, -1, 0);
    rep.discrete_ratio =
        rep.discrete_predicted != 0.0 ? rep.empirical / rep.discrete_predicted : 0.0;
  }
  rep.runtime = now_seconds() - t0;
  return rep;
}

PropReport sum_S2(const VerifyContext& ctx, int m_index) {
  double t0 = now_seconds();
  int k = ctx.k();
  if (m_index < 0 || m_index >= k) throw DomainError("component index out of range");
  const LinearFunction L = ctx.setup().tuple().funcs[static_cast<std::size_t>(m_index)];

  PropReport rep;
  rep.which = "S2";
  rep.parameters = base_parameters(ctx);
  rep.m_index = m_index;
  SetRange range = set_range(ctx.A, ctx.x);

  if (range.hi > range.lo) {
    double lo_val = static_cast<double>(L.eval(range.lo));
    double hi_val = static_cast<double>(L.eval(range.hi - 1));
    if (std::min(lo_val, hi_val) <= ctx.params.R) {
      throw PreconditionError("component value does not exceed the level R on the range");
    }
  }

  SetRange vals = value_cover(L, range.lo, range.hi);
  if (vals.hi - vals.lo > kValueRangeBudget) throw ResourceError("value range beyond sieve budget");
  PrimeView view(ctx.P, vals.lo, vals.hi);

  int64_t prime_count = count_P(ctx.P, L, ctx.A, ctx.x);
  rep.set_count = prime_count;
  rep.flagged_empty = prime_count == 0;
  if (rep.flagged_empty) rep.note = "no prime values on the range";

  WeightScanner scanner(ctx.params, ctx.table);
  std::size_t nc = chunk_count(range.lo, range.hi);
  std::vector<Kahan> sums(nc);
  std::vector<int64_t> nonzero(nc, 0);
  bool whole = ctx.A.kind != IntegerSetSpec::Kind::Explicit;
  scanner.run(range.lo, range.hi, ctx.jobs,
              [&](std::size_t chunk, int64_t seg_lo, std::span<const double> w) {
                for (std::size_t i = 0; i < w.size(); ++i) {
                  if (w[i] == 0.0) continue;
                  int64_t n = seg_lo + static_cast<int64_t>(i);
                  if (!whole && !in_A(ctx.A, ctx.x, n)) continue;
                  ++nonzero[chunk];
                  if (view.contains(L.eval(n))) sums[chunk].add(w[i]);
                }
              });
  Kahan total;
  for (std::size_t c = 0; c < nc; ++c) {
    total.merge(sums[c]);
    rep.nonzero_weights += nonzero[c];
  }
  rep.empirical = total.value();

  double am_factor = 1.0;
  for (const auto& [p, e] : factorize(L.a).factors) {
    if (ctx.setup().B() % p != 0) {
      am_factor *= static_cast<double>(p - 1) / static_cast<double>(p);
    }
  }
  rep.predicted = std::pow(b_over_phi_b(ctx.setup()), k - 1) * series_B(ctx) * am_factor *
                  static_cast<double>(prime_count) * std::pow(ctx.params.log_R, k + 1) *
                  integral_F(k, IntegralKind::J);
  finish_ratio(rep);

  if (ctx.table.size() <= kDiscreteDiagnosticCap) {
    std::vector<double> ym(ctx.table.size(), 0.0);
    for (std::size_t i = 0; i < ctx.table.size(); ++i) {
      const auto& e = ctx.table.entries[i];
      if (e.d[static_cast<std::size_t>(m_index)] != 1) continue;
      ym[i] = ym_direct(ctx.params, ctx.table, e.d, m_index);
    }
    double mask = 1.0;
    for (int64_t p : ctx.setup().w_primes()) {
      int64_t om = omega_p(ctx.setup().tuple().funcs, p);
      mask *= static_cast<double>(p - om) / phi_L_prime(p, L.a);
    }
    rep.discrete_available = true;
    rep.discrete_predicted = static_cast<double>(prime_count) * mask *
                             table_pair_sum(ctx.table, ym, m_index, L.a);
    rep.discrete_ratio =
        rep.discrete_predicted != 0.0 ? rep.empirical / rep.discrete_predicted : 0.0;
  }
  rep.runtime = now_seconds() - t0;
  return rep;
}

PropReport sum_S3(const VerifyContext& ctx, LinearFunction L0, double xi, int64_t D) {
  double t0 = now_seconds();
  if (xi <= 0) throw DomainError("roughness exponent must be positive");
  if (D < 1) throw DomainError("smooth modulus D must be >= 1");
  DeltaValue dv = delta_L(ctx.setup().tuple(), L0);
  if (dv.degenerate) throw DomainError("extra component is proportional to a tuple component");

  int k = ctx.k();
  PropReport rep;
  rep.which = "S3";
  rep.parameters = base_parameters(ctx);
  rep.parameters.xi = xi;
  rep.parameters.D = D;

  double log_x = std::log(static_cast<double>(ctx.x));
  double window_lo = k * std::pow(std::log(log_x), 2.0) / log_x;
  if (xi < window_lo || xi > ctx.theta / 10.0) {
    rep.note = "xi outside the policy window";
  }

  double threshold = std::pow(static_cast<double>(ctx.x), xi);
  std::vector<MarkClass> bad = small_prime_classes(L0, threshold, false, D);

  SetRange range = set_range(ctx.A, ctx.x);
  int64_t count = count_A(ctx.A, ctx.x);
  rep.set_count = count;
  rep.flagged_empty = count == 0;

  WeightScanner scanner(ctx.params, ctx.table);
  std::size_t nc = chunk_count(range.lo, range.hi);
  std::vector<Kahan> sums(nc);
  std::vector<int64_t> nonzero(nc, 0);
  bool whole = ctx.A.kind != IntegerSetSpec::Kind::Explicit;
  scanner.run(range.lo, range.hi, ctx.jobs,
              [&](std::size_t chunk, int64_t seg_lo, std::span<const double> w) {
                std::vector<char> rough(w.size(), 1);
                mark_progressions(bad, seg_lo, seg_lo + static_cast<int64_t>(w.size()),
                                  [&](std::size_t, std::size_t i) { rough[i] = 0; });
                for (std::size_t i = 0; i < w.size(); ++i) {
                  if (w[i] == 0.0) continue;
                  int64_t n = seg_lo + static_cast<int64_t>(i);
                  if (!whole && !in_A(ctx.A, ctx.x, n)) continue;
                  ++nonzero[chunk];
                  if (!rough[i]) continue;
                  if (L0.eval(n) < 1) continue;  // membership needs a positive value
                  sums[chunk].add(w[i]);
                }
              });
  Kahan total;
  for (std::size_t c = 0; c < nc; ++c) {
    total.merge(sums[c]);
    rep.nonzero_weights += nonzero[c];
  }
  rep.empirical = total.value();

  rep.predicted = (1.0 / xi) * n_over_phi_n(dv.delta) * n_over_phi_n(D) *
                  std::pow(b_over_phi_b(ctx.setup()), k) * series_B(ctx) *
                  static_cast<double>(count) * std::pow(ctx.params.log_R, k - 1) *
                  integral_F(k, IntegralKind::I);
  finish_ratio(rep);
  rep.runtime = now_seconds() - t0;
  return rep;
}

PropReport sum_S4(const VerifyContext& ctx, int m_index, double rho) {
  double t0 = now_seconds();
  int k = ctx.k();
  if (m_index < 0 || m_index >= k) throw DomainError("component index out of range");
  if (rho <= 0) throw DomainError("small-prime exponent must be positive");
  const LinearFunction L = ctx.setup().tuple().funcs[static_cast<std::size_t>(m_index)];

  PropReport rep;
  rep.which = "S4";
  rep.parameters = base_parameters(ctx);
  rep.parameters.rho = rho;
  rep.m_index = m_index;
  if (rho > ctx.theta / 10.0) rep.note = "rho above the policy cap theta/10";

  double threshold = std::pow(static_cast<double>(ctx.x), rho);
  std::vector<MarkClass> small =
      small_prime_classes(L, threshold, true, ctx.setup().B());

  SetRange range = set_range(ctx.A, ctx.x);
  int64_t count = count_A(ctx.A, ctx.x);
  rep.set_count = count;
  rep.flagged_empty = count == 0;

  WeightScanner scanner(ctx.params, ctx.table);
  std::size_t nc = chunk_count(range.lo, range.hi);
  std::vector<Kahan> sums(nc);
  std::vector<int64_t> nonzero(nc, 0);
  bool whole = ctx.A.kind != IntegerSetSpec::Kind::Explicit;
  scanner.run(range.lo, range.hi, ctx.jobs,
              [&](std::size_t chunk, int64_t seg_lo, std::span<const double> w) {
                std::vector<uint16_t> cnt(w.size(), 0);
                mark_progressions(small, seg_lo, seg_lo + static_cast<int64_t>(w.size()),
                                  [&](std::size_t, std::size_t i) { ++cnt[i]; });
                for (std::size_t i = 0; i < w.size(); ++i) {
                  if (w[i] == 0.0) continue;
                  int64_t n = seg_lo + static_cast<int64_t>(i);
                  if (!whole && !in_A(ctx.A, ctx.x, n)) continue;
                  ++nonzero[chunk];
                  if (cnt[i] > 0) sums[chunk].add(static_cast<double>(cnt[i]) * w[i]);
                }
              });
  Kahan total;
  for (std::size_t c = 0; c < nc; ++c) {
    total.merge(sums[c]);
    rep.nonzero_weights += nonzero[c];
  }
  rep.empirical = total.value();

  double log_k = std::log(static_cast<double>(k));
  rep.predicted = rho * rho * std::pow(static_cast<double>(k), 4.0) * log_k * log_k *
                  std::pow(b_over_phi_b(ctx.setup()), k) * series_B(ctx) *
                  static_cast<double>(count) * std::pow(ctx.params.log_R, k) *
                  integral_F(k, IntegralKind::I);
  finish_ratio(rep);
  rep.runtime = now_seconds() - t0;
  return rep;
}

ExtractionResult combined_extract(const VerifyContext& ctx, int m, double rho, ExtractMode mode,
                                  double eta) {
  int k = ctx.k();
  if (m < 1) throw DomainError("extraction requires m >= 1");
  if (rho <= 0) throw DomainError("small-prime exponent must be positive");
  const auto& funcs = ctx.setup().tuple().funcs;
  double log_x = std::log(static_cast<double>(ctx.x));

  int64_t lead = funcs[0].a;
  int64_t shift_cap = 0;
  std::vector<int64_t> penalty_shifts;
  if (mode == ExtractMode::Consecutive) {
    if (eta <= 0) throw DomainError("consecutive mode requires a positive shift budget");
    for (const auto& f : funcs) {
      if (f.a != lead) throw DomainError("consecutive mode requires a shared lead coefficient");
      if (f.b < 0) throw DomainError("consecutive mode requires nonnegative shifts");
    }
    if (lead < 1) throw DomainError("consecutive mode requires a positive lead coefficient");
    shift_cap = static_cast<int64_t>(eta * log_x);
    for (const auto& f : funcs) {
      if (f.b > shift_cap) throw DomainError("tuple shift exceeds the eta budget");
    }
    for (int64_t b = 1; b <= shift_cap; ++b) {
      bool in_tuple = false;
      for (const auto& f : funcs) in_tuple = in_tuple || f.b == b;
      if (!in_tuple) penalty_shifts.push_back(b);
    }
  }

  SetRange range = set_range(ctx.A, ctx.x);

  // Prime membership views, one per component.
  std::vector<PrimeView> views;
  views.reserve(funcs.size());
  for (const auto& f : funcs) {
    SetRange vals = value_cover(f, range.lo, range.hi);
    if (vals.hi - vals.lo > kValueRangeBudget) {
      throw ResourceError("value range beyond sieve budget");
    }
    views.emplace_back(ctx.P, vals.lo, vals.hi);
  }

  // Small-prime penalty classes across all components.
  double rho_threshold = std::pow(static_cast<double>(ctx.x), rho);
  std::vector<MarkClass> small;
  for (const auto& f : funcs) {
    auto classes = small_prime_classes(f, rho_threshold, true, ctx.setup().B());
    small.insert(small.end(), classes.begin(), classes.end());
  }

  // Rough-shift classes (consecutive mode): for each off-tuple shift b the
  // residues where some prime <= x^(theta/10) divides lead*n + b.
  double rough_threshold = std::pow(static_cast<double>(ctx.x), ctx.theta / 10.0);
  std::vector<std::vector<MarkClass>> shift_classes;
  for (int64_t b : penalty_shifts) {
    shift_classes.push_back(
        small_prime_classes(LinearFunction{lead, b}, rough_threshold, false, 1));
  }

  ExtractionResult result;
  result.m = m;
  result.mode = mode;
  result.rho = rho;
  result.eta = eta;

  WeightScanner scanner(ctx.params, ctx.table);
  std::size_t nc = chunk_count(range.lo, range.hi);
  std::vector<Kahan> sums(nc);
  std::vector<int64_t> nonzero(nc, 0);
  std::vector<std::vector<ExtractedPoint>> found(nc);
  bool whole = ctx.A.kind != IntegerSetSpec::Kind::Explicit;
  scanner.run(range.lo, range.hi, ctx.jobs,
              [&](std::size_t chunk, int64_t seg_lo, std::span<const double> w) {
                int64_t seg_hi = seg_lo + static_cast<int64_t>(w.size());
                std::vector<uint16_t> pen(w.size(), 0);
                mark_progressions(small, seg_lo, seg_hi,
                                  [&](std::size_t, std::size_t i) { ++pen[i]; });
                std::vector<uint16_t> roughs(w.size(),
                                             static_cast<uint16_t>(penalty_shifts.size()));
                for (const auto& classes : shift_classes) {
                  std::vector<char> smooth(w.size(), 0);
                  mark_progressions(classes, seg_lo, seg_hi,
                                    [&](std::size_t, std::size_t i) { smooth[i] = 1; });
                  for (std::size_t i = 0; i < w.size(); ++i) roughs[i] -= smooth[i];
                }
                for (std::size_t i = 0; i < w.size(); ++i) {
                  if (w[i] == 0.0) continue;
                  int64_t n = seg_lo + static_cast<int64_t>(i);
                  if (!whole && !in_A(ctx.A, ctx.x, n)) continue;
                  ++nonzero[chunk];
                  int hits = 0;
                  for (std::size_t j = 0; j < funcs.size(); ++j) {
                    if (views[j].contains(funcs[j].eval(n))) ++hits;
                  }
                  double bracket = static_cast<double>(hits) - m -
                                   static_cast<double>(k) * pen[i] -
                                   static_cast<double>(k) * roughs[i];
                  sums[chunk].add(bracket * w[i]);
                  if (bracket > 0) {
                    ExtractedPoint pt;
                    pt.n = n;
                    pt.prime_hits = hits;
                    pt.weight = w[i];
                    pt.bracket = bracket;
                    for (std::size_t j = 0; j < funcs.size(); ++j) {
                      int64_t v = funcs[j].eval(n);
                      if (views[j].contains(v)) pt.prime_values.push_back(v);
                    }
                    std::sort(pt.prime_values.begin(), pt.prime_values.end());
                    found[chunk].push_back(std::move(pt));
                  }
                }
              });

  Kahan total;
  for (std::size_t c = 0; c < nc; ++c) {
    total.merge(sums[c]);
    result.nonzero_weights += nonzero[c];
    for (auto& pt : found[c]) {
      if (result.extracted.size() >= kMaxExtracted) {
        throw CapacityError("extraction list beyond budget");
      }
      result.extracted.push_back(std::move(pt));
    }
  }
  result.s_value = total.value();

  for (const auto& pt : result.extracted) {
    bool violated = pt.prime_hits < m + 1;
    if (!violated && mode == ExtractMode::Consecutive && pt.prime_values.size() >= 2) {
      for (int64_t v = pt.prime_values.front() + 1; v < pt.prime_values.back(); ++v) {
        if (std::binary_search(pt.prime_values.begin(), pt.prime_values.end(), v)) continue;
        if (is_prime(v)) {
          violated = true;
          break;
        }
      }
    }
    if (violated) ++result.violations;
  }
  return result;
}

namespace {

// Exact rational value of the unpinned local sum over divisor patterns
// supported on single slots. Slot -1 means the vector does not carry p.
Rational brute_sp(int64_t p, int r_slot, int s_slot) {
  Rational sum = Rational::of(0, 1);
  for (int dc = 0; dc < 2; ++dc) {
    if (dc == 1 && r_slot < 0) continue;
    for (int ec = 0; ec < 2; ++ec) {
      if (ec == 1 && s_slot < 0) continue;
      if (dc == 1 && ec == 1 && r_slot != s_slot) continue;  // cross-slot pairs excluded
      int64_t d = dc ? p : 1;
      int64_t e = ec ? p : 1;
      int64_t lcm = (dc || ec) ? p : 1;
      int64_t mu = ((dc ? -1 : 1) * (ec ? -1 : 1));
      sum = sum + Rational::of(mu * d * e, lcm);
    }
  }
  return sum;
}

// Same for the pinned variant: weights mu(d) mu(e) phi_L(d) phi_L(e) /
// phi_L([d, e]) with phi_L(p) = p when p | a_m, else p - 1.
Rational brute_sp_m(int64_t p, int r_slot, int s_slot, bool p_divides_am) {
  int64_t phi_p = p_divides_am ? p : p - 1;
  Rational sum = Rational::of(0, 1);
  for (int dc = 0; dc < 2; ++dc) {
    if (dc == 1 && r_slot < 0) continue;
    for (int ec = 0; ec < 2; ++ec) {
      if (ec == 1 && s_slot < 0) continue;
      if (dc == 1 && ec == 1 && r_slot != s_slot) continue;
      int64_t phi_d = dc ? phi_p : 1;
      int64_t phi_e = ec ? phi_p : 1;
      int64_t phi_lcm = (dc || ec) ? phi_p : 1;
      int64_t mu = ((dc ? -1 : 1) * (ec ? -1 : 1));
      sum = sum + Rational::of(mu * phi_d * phi_e, phi_lcm);
    }
  }
  return sum;
}

std::string slot_name(int slot) { return slot < 0 ? "-" : std::to_string(slot); }

void check_case(LocalSumReport& rep, const std::string& label, const Rational& brute,
                const Rational& closed) {
  ++rep.cases;
  if (!(brute == closed)) rep.mismatches.push_back(LocalSumCase{label, brute, closed});
}

}  // namespace

LocalSumReport sp_identity_check(int k, int64_t p, LocalSumVariant variant, int m_index,
                                 bool p_divides_am) {
  if (k < 1 || k > kMaxK) throw DomainError("tuple size out of range");
  if (p < 3 || !is_prime(p)) throw DomainError("local sums need an odd prime");
  LocalSumReport rep;
  rep.k = k;
  rep.p = p;
  rep.variant = variant;

  switch (variant) {
    case LocalSumVariant::Sp: {
      for (int r_slot = -1; r_slot < k; ++r_slot) {
        for (int s_slot = -1; s_slot < k; ++s_slot) {
          if (r_slot < 0 && s_slot < 0) continue;  // p must divide r*s
          Rational closed = Rational::of(0, 1);
          if (r_slot >= 0 && s_slot >= 0) {
            closed = Rational::of(r_slot == s_slot ? p - 1 : -1, 1);
          }
          std::string label = "Sp k=" + std::to_string(k) + " p=" + std::to_string(p) +
                              " r=" + slot_name(r_slot) + " s=" + slot_name(s_slot);
          check_case(rep, label, brute_sp(p, r_slot, s_slot), closed);
        }
      }
      break;
    }
    case LocalSumVariant::SpM: {
      if (m_index < 0 || m_index >= k) throw DomainError("pinned index out of range");
      for (int r_slot = -1; r_slot < k; ++r_slot) {
        if (r_slot == m_index) continue;  // pinned slot carries no divisor
        for (int s_slot = -1; s_slot < k; ++s_slot) {
          if (s_slot == m_index) continue;
          if (r_slot < 0 && s_slot < 0) continue;
          Rational closed = Rational::of(0, 1);
          if (r_slot >= 0 && s_slot >= 0) {
            if (r_slot == s_slot) {
              closed = Rational::of(p_divides_am ? p - 1 : p - 2, 1);
            } else {
              closed = Rational::of(-1, 1);
            }
          }
          std::string label = "SpM k=" + std::to_string(k) + " p=" + std::to_string(p) +
                              " m=" + std::to_string(m_index) +
                              (p_divides_am ? " p|am" : " p~am") + " r=" + slot_name(r_slot) +
                              " s=" + slot_name(s_slot);
          check_case(rep, label, brute_sp_m(p, r_slot, s_slot, p_divides_am), closed);
        }
      }
      break;
    }
    case LocalSumVariant::SpMPrime: {
      if (m_index < 0 || m_index >= k) throw DomainError("pinned index out of range");
      // Configurations of (p | a_m, p | extended level W'_j): the closed form
      // distinguishes p coprime to both, p dividing the lead, and p dividing
      // the extra factor of W'_j. The defining sum runs over d_j in {1, p}
      // with d_j admitted only when coprime to W'_j.
      struct Config {
        bool p_in_wj_extra;
        Rational closed;
        const char* tag;
      };
      std::vector<Config> configs;
      if (p_divides_am) {
        configs.push_back(Config{false, Rational::of(0, 1), "p|am"});
      } else {
        configs.push_back(Config{false, Rational::of(-1, p - 1), "free"});
        configs.push_back(Config{true, Rational::of(1, 1), "p|W'j"});
      }
      int64_t phi_p = p_divides_am ? p : p - 1;
      for (int j = 0; j < k; ++j) {
        if (j == m_index) continue;
        for (const auto& cfg : configs) {
          Rational brute = Rational::of(1, 1);  // the d = (1,...,1) term
          if (!cfg.p_in_wj_extra) brute = brute + Rational::of(-p, phi_p);
          std::string label = "SpMPrime k=" + std::to_string(k) + " p=" + std::to_string(p) +
                              " m=" + std::to_string(m_index) + " j=" + std::to_string(j) + " " +
                              cfg.tag;
          check_case(rep, label, brute, cfg.closed);
        }
      }
      break;
    }
  }
  return rep;
}

LocalSumGrid sp_identity_grid(int k_max, const std::vector<int64_t>& ps) {
  LocalSumGrid grid;
  auto absorb = [&](const LocalSumReport& rep) {
    grid.cases += rep.cases;
    grid.mismatches += static_cast<int64_t>(rep.mismatches.size());
    for (const auto& c : rep.mismatches) {
      if (grid.samples.size() < 10) grid.samples.push_back(c);
    }
  };
  for (int k = 1; k <= k_max; ++k) {
    for (int64_t p : ps) {
      absorb(sp_identity_check(k, p, LocalSumVariant::Sp));
      for (int m = 0; m < k; ++m) {
        for (bool flag : {false, true}) {
          absorb(sp_identity_check(k, p, LocalSumVariant::SpM, m, flag));
          absorb(sp_identity_check(k, p, LocalSumVariant::SpMPrime, m, flag));
        }
      }
    }
  }
  return grid;
}

double delta_estimate(const VerifyContext& ctx) {
  int64_t count = count_A(ctx.A, ctx.x);
  if (count == 0) throw DomainError("empty ambient set");
  int k = ctx.k();
  double log_x = std::log(static_cast<double>(ctx.x));
  Kahan sum;
  for (const auto& f : ctx.setup().tuple().funcs) {
    auto primes = static_cast<double>(count_P(ctx.P, f, ctx.A, ctx.x));
    sum.add(primes / n_over_phi_n(f.a));
  }
  double phi_b_over_b = 1.0 / b_over_phi_b(ctx.setup());
  return (phi_b_over_b / k) * sum.value() / (static_cast<double>(count) / log_x);
}

double ym_direct(const WeightParams& wp, const LambdaTable& table, std::span<const int64_t> r,
                 int m_index) {
  const SieveSetup& setup = *wp.setup;
  int k = wp.k();
  if (static_cast<int>(r.size()) != k) throw DomainError("support vector has wrong length");
  if (m_index < 0 || m_index >= k) throw DomainError("pinned index out of range");
  for (int64_t ri : r) {
    if (ri < 1) throw DomainError("support vector entries must be >= 1");
  }
  if (r[static_cast<std::size_t>(m_index)] != 1) return 0.0;

  const auto& funcs = setup.tuple().funcs;
  const LinearFunction Lm = funcs[static_cast<std::size_t>(m_index)];
  Kahan sum;
  bool any = false;
  for (const auto& e : table.entries) {
    if (e.d[static_cast<std::size_t>(m_index)] != 1) continue;
    bool multiple = true;
    for (int i = 0; i < k && multiple; ++i) {
      multiple = e.d[static_cast<std::size_t>(i)] % r[static_cast<std::size_t>(i)] == 0;
    }
    if (!multiple) continue;
    bool restricted = true;
    double phi = 1.0;
    for (const auto& [p, slot] : e.primes) {
      const LinearFunction& Lj = funcs[static_cast<std::size_t>(slot)];
      int64_t disc = checked_sub(checked_mul(Lj.a, Lm.b), checked_mul(Lm.a, Lj.b));
      if (mod_floor(disc, p) == 0) {
        restricted = false;  // excluded from the primed support
        break;
      }
      phi *= phi_L_prime(p, Lm.a);
    }
    if (!restricted) continue;
    any = true;
    sum.add(e.lambda / phi);
  }
  if (!any) return 0.0;

  int64_t r_prod = 1;
  for (int64_t ri : r) r_prod = checked_mul(r_prod, ri);
  int mu = moebius(r_prod);
  if (mu == 0) return 0.0;
  auto phi_om = static_cast<double>(phi_omega(setup, r_prod));
  return mu * phi_om * sum.value();
}

YmShape ym_leading_shape(const WeightParams& wp, const LambdaTable& table,
                         std::span<const int64_t> r, int m_index) {
  YmShape shape;
  shape.direct = ym_direct(wp, table, r, m_index);  // validates r and m_index

  const SieveSetup& setup = *wp.setup;
  int k = wp.k();
  const LinearFunction Lm = setup.tuple().funcs[static_cast<std::size_t>(m_index)];

  double phi_wb_over_wb = 1.0;
  for (int64_t p : setup.w_primes()) phi_wb_over_wb *= 1.0 - 1.0 / static_cast<double>(p);
  for (int64_t p : setup.b_primes()) phi_wb_over_wb *= 1.0 - 1.0 / static_cast<double>(p);
  double am_part = 1.0;
  for (const auto& [p, e] : factorize(Lm.a).factors) {
    bool in_wb = false;
    for (int64_t q : setup.w_primes()) in_wb = in_wb || q == p;
    for (int64_t q : setup.b_primes()) in_wb = in_wb || q == p;
    if (!in_wb) am_part *= 1.0 - 1.0 / static_cast<double>(p);
  }

  ProfileShape ps = wp.shape;
  std::vector<double> t(static_cast<std::size_t>(k), 0.0);
  double off_sum = 0.0;
  for (int i = 0; i < k; ++i) {
    if (i == m_index) continue;
    t[static_cast<std::size_t>(i)] =
        std::log(static_cast<double>(r[static_cast<std::size_t>(i)])) / wp.log_R;
    off_sum += t[static_cast<std::size_t>(i)];
  }
  auto slice = [&](double tm) {
    t[static_cast<std::size_t>(m_index)] = tm;
    return profile_value(ps, ProfileVariant::Full, t);
  };
  double integral = integrate_breakpoints(slice, 0.0, 1.0,
                                          {0.9 * ps.U, ps.U, 0.9 - off_sum, 1.0 - off_sum}, 32);

  shape.leading = wp.log_R * wp.normalization * phi_wb_over_wb * am_part * integral;
  shape.ratio = shape.leading != 0.0 ? shape.direct / shape.leading : 0.0;
  return shape;
}

}  // namespace pcl
