#include "pcl/weights.hpp"

#include <algorithm>
#include <cmath>

#include "pcl/checked.hpp"
#include "pcl/kahan.hpp"

namespace pcl {

WeightParams make_weight_params(std::shared_ptr<const SieveSetup> setup, double R, int64_t series_P0) {
  if (!setup) throw DomainError("weight params require a sieve setup");
  if (!(R >= 2.0)) throw DomainError("weight level R must be >= 2");
  if (R > 1e9) throw ResourceError("weight level R beyond supported range");
  WeightParams wp;
  wp.setup = std::move(setup);
  wp.R = R;
  wp.log_R = std::log(R);
  wp.shape = profile_shape(wp.setup->k());
  std::vector<int64_t> excluded = wp.setup->w_primes();
  excluded.insert(excluded.end(), wp.setup->b_primes().begin(), wp.setup->b_primes().end());
  wp.series_wb = singular_series_excluding(*wp.setup, excluded, series_P0);
  wp.series_P0 = series_P0;
  double log_ratio = 0.0;
  for (int64_t p : excluded) {
    auto pd = static_cast<double>(p);
    log_ratio += std::log(pd / (pd - 1.0));
  }
  wp.normalization = std::exp(static_cast<double>(wp.k()) * log_ratio) * wp.series_wb.value;
  return wp;
}

namespace {

double transform_value(const WeightParams& wp, std::span<const int64_t> r, ProfileVariant variant) {
  const int k = wp.k();
  if (static_cast<int>(r.size()) != k) throw DomainError("support vector length != k");
  if (!in_support(*wp.setup, r)) return 0.0;
  std::vector<double> t(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    t[static_cast<std::size_t>(i)] = std::log(static_cast<double>(r[static_cast<std::size_t>(i)])) / wp.log_R;
  }
  return wp.normalization * profile_value(wp.shape, variant, t);
}

std::vector<SupportPrime> collect_support_primes(const WeightParams& wp) {
  std::vector<SupportPrime> out;
  const SieveSetup& setup = *wp.setup;
  int64_t level = 2 * static_cast<int64_t>(setup.k()) * setup.k();
  auto hi = static_cast<int64_t>(std::ceil(wp.R));
  for (int64_t p : sieve_primes(level + 1, hi)) {
    if (static_cast<double>(p) >= wp.R) continue;
    if (setup.B() % p == 0) continue;
    SupportPrime sp;
    sp.p = p;
    sp.components = setup.allowed_components(p);
    if (!sp.components.empty()) out.push_back(std::move(sp));
  }
  return out;
}

// Walk the support lattice upward from base: extensions may use any listed
// prime not already in base, each in one of its allowed slots, keeping the
// product below R. visit(d, prod, phi_omega_of_extension, depth_parity).
struct LatticeWalker {
  const WeightParams& wp;
  const std::vector<SupportPrime>& primes;
  std::vector<int64_t> d;
  double r_cap;

  template <typename Fn>
  void walk(std::size_t from, int64_t prod, int64_t phi_ext, int mu_ext, Fn&& visit) {
    visit(d, prod, phi_ext, mu_ext);
    for (std::size_t i = from; i < primes.size(); ++i) {
      const SupportPrime& sp = primes[i];
      if (static_cast<double>(prod) * static_cast<double>(sp.p) >= r_cap) break;  // primes ascend
      if (prod % sp.p == 0) continue;
      int64_t fac = sp.p;  // p - omega(p) from the allowed-slot count
      fac -= static_cast<int64_t>(root_count(sp));
      for (int j : sp.components) {
        auto ju = static_cast<std::size_t>(j);
        d[ju] = checked_mul(d[ju], sp.p);
        walk(i + 1, prod * sp.p, checked_mul(phi_ext, fac), -mu_ext, visit);
        d[ju] /= sp.p;
      }
    }
  }

  static std::size_t root_count(const SupportPrime& sp) { return sp.components.size(); }
};

}  // namespace

double y_value(const WeightParams& wp, std::span<const int64_t> r) {
  return transform_value(wp, r, ProfileVariant::Full);
}

double y_telescope_value(const WeightParams& wp, std::span<const int64_t> r) {
  return transform_value(wp, r, ProfileVariant::Telescope);
}

double lambda_value(const WeightParams& wp, std::span<const int64_t> d) {
  const int k = wp.k();
  if (static_cast<int>(d.size()) != k) throw DomainError("support vector length != k");
  if (!in_support(*wp.setup, d)) return 0.0;
  int64_t prod = 1;
  for (int64_t di : d) prod = checked_mul(prod, di);
  if (static_cast<double>(prod) >= wp.R) return 0.0;

  int mu_d = 1;
  int64_t phi_d = 1;
  for (int64_t di : d) {
    if (di == 1) continue;
    for (const auto& [p, e] : factorize(di).factors) {
      (void)e;
      mu_d = -mu_d;
      phi_d = checked_mul(phi_d, p - wp.setup->residue_data(p).omega);
    }
  }

  std::vector<SupportPrime> primes = collect_support_primes(wp);
  std::erase_if(primes, [&](const SupportPrime& sp) { return prod % sp.p == 0; });

  Kahan sum;
  LatticeWalker walker{wp, primes, std::vector<int64_t>(d.begin(), d.end()), wp.R};
  walker.walk(0, prod, 1, 1, [&](const std::vector<int64_t>& r, int64_t, int64_t phi_ext, int) {
    double yr = y_value(wp, r);
    if (yr != 0.0) sum.add(yr / (static_cast<double>(phi_d) * static_cast<double>(phi_ext)));
  });
  return mu_d * static_cast<double>(prod) * sum.value();
}

const LambdaTable::Entry* LambdaTable::find(std::span<const int64_t> d) const {
  auto it = index.find(std::vector<int64_t>(d.begin(), d.end()));
  return it == index.end() ? nullptr : &entries[it->second];
}

LambdaTable build_lambda_table(const WeightParams& wp) {
  const int k = wp.k();
  LambdaTable table;
  table.R = wp.R;
  table.support_primes = collect_support_primes(wp);

  // Pass 1: materialize every support vector with prod < R.
  std::vector<LambdaTable::Entry> raw;
  std::vector<std::pair<int64_t, int>> prime_stack;
  std::vector<int64_t> d(static_cast<std::size_t>(k), 1);
  auto dfs = [&](auto&& self, std::size_t from, int64_t prod, int64_t phi, int mu) -> void {
    if (raw.size() >= kMaxLambdaEntries) throw ResourceError("lambda table exceeds entry budget");
    LambdaTable::Entry e;
    e.d = d;
    e.primes = prime_stack;
    e.prod = prod;
    e.phi_omega = phi;
    e.mu = mu;
    e.y = y_value(wp, d);
    raw.push_back(std::move(e));
    for (std::size_t i = from; i < table.support_primes.size(); ++i) {
      const SupportPrime& sp = table.support_primes[i];
      if (static_cast<double>(prod) * static_cast<double>(sp.p) >= wp.R) break;
      int64_t fac = sp.p - static_cast<int64_t>(sp.components.size());
      for (int j : sp.components) {
        auto ju = static_cast<std::size_t>(j);
        d[ju] = checked_mul(d[ju], sp.p);
        prime_stack.emplace_back(sp.p, j);
        self(self, i + 1, prod * sp.p, checked_mul(phi, fac), -mu);
        prime_stack.pop_back();
        d[ju] /= sp.p;
      }
    }
  };
  dfs(dfs, 0, 1, 1, 1);

  std::sort(raw.begin(), raw.end(),
            [](const LambdaTable::Entry& a, const LambdaTable::Entry& b) { return a.d < b.d; });
  table.entries = std::move(raw);
  for (std::size_t i = 0; i < table.entries.size(); ++i) table.index.emplace(table.entries[i].d, i);

  // Pass 2: scatter y_r / phi_omega(r) onto every divisor d | r through the
  // subset lattice of r's primes, then finish lambda_d = mu(d) d * sum.
  std::vector<double> acc(table.entries.size(), 0.0);
  std::vector<int64_t> sub(static_cast<std::size_t>(k));
  for (const auto& e : table.entries) {
    if (e.y == 0.0) continue;
    double v = e.y / static_cast<double>(e.phi_omega);
    auto g = e.primes.size();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << g); ++mask) {
      std::fill(sub.begin(), sub.end(), 1);
      for (std::size_t b = 0; b < g; ++b) {
        if (mask & (std::uint64_t{1} << b)) {
          auto ju = static_cast<std::size_t>(e.primes[b].second);
          sub[ju] = checked_mul(sub[ju], e.primes[b].first);
        }
      }
      auto it = table.index.find(sub);
      if (it != table.index.end()) acc[it->second] += v;
    }
  }
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    auto& e = table.entries[i];
    e.lambda = e.mu * static_cast<double>(e.prod) * acc[i];
  }
  return table;
}

double weight_from_hits(const WeightParams& wp, const LambdaTable& table,
                        std::span<const std::pair<int64_t, int>> hits) {
  if (hits.size() > 24) throw CapacityError("unexpected hit multiplicity");
  std::vector<int64_t> d(static_cast<std::size_t>(wp.k()));
  Kahan sum;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << hits.size()); ++mask) {
    std::fill(d.begin(), d.end(), 1);
    double prod = 1.0;
    for (std::size_t b = 0; b < hits.size(); ++b) {
      if (mask & (std::uint64_t{1} << b)) {
        d[static_cast<std::size_t>(hits[b].second)] *= hits[b].first;
        prod *= static_cast<double>(hits[b].first);
      }
    }
    if (prod >= wp.R) continue;
    const auto* e = table.find(d);
    if (e) sum.add(e->lambda);
  }
  double s = sum.value();
  return s * s;
}

double weight_value(const WeightParams& wp, const LambdaTable& table, int64_t n) {
  const SieveSetup& setup = *wp.setup;
  for (int64_t p : setup.w_primes()) {
    if (setup.chosen_component(p, mod_floor(n, p)) >= 0) return 0.0;  // pre-sieve
  }
  std::vector<std::pair<int64_t, int>> hits;
  for (const SupportPrime& sp : table.support_primes) {
    int j = setup.chosen_component(sp.p, mod_floor(n, sp.p));
    if (j >= 0) hits.emplace_back(sp.p, j);
  }
  return weight_from_hits(wp, table, hits);
}

RoundtripReport roundtrip_check(const WeightParams& wp, const LambdaTable& table) {
  std::vector<double> acc(table.entries.size(), 0.0);
  std::vector<int64_t> sub(static_cast<std::size_t>(wp.k()));
  for (const auto& e : table.entries) {
    if (e.lambda == 0.0) continue;
    double v = e.lambda / static_cast<double>(e.prod);
    auto g = e.primes.size();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << g); ++mask) {
      std::fill(sub.begin(), sub.end(), 1);
      for (std::size_t b = 0; b < g; ++b) {
        if (mask & (std::uint64_t{1} << b)) {
          auto ju = static_cast<std::size_t>(e.primes[b].second);
          sub[ju] = checked_mul(sub[ju], e.primes[b].first);
        }
      }
      auto it = table.index.find(sub);
      if (it != table.index.end()) acc[it->second] += v;
    }
  }
  RoundtripReport rep;
  // Relative deviation uses a floor tied to the table's own magnitude, so
  // entries with y = 0 are judged against the size of their neighbours rather
  // than against an absolute epsilon.
  double y_max = 0.0;
  for (const auto& e : table.entries) y_max = std::max(y_max, std::fabs(e.y));
  double scale = std::max(1e-3 * y_max, 1e-300);
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    const auto& e = table.entries[i];
    double back = e.mu * static_cast<double>(e.phi_omega) * acc[i];
    double rel = std::fabs(back - e.y) / std::max(std::fabs(e.y), scale);
    rep.max_rel_err = std::max(rep.max_rel_err, rel);
    ++rep.checked;
  }
  return rep;
}

}  // namespace pcl
