#include "pcl/integrals.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "pcl/kahan.hpp"

namespace pcl {

namespace {

// Quintic smoothstep s(u) = 6u^5 - 15u^4 + 10u^3 on [0, 1]; C^2 joins.
double smoothstep5(double u) { return ((6.0 * u - 15.0) * u + 10.0) * u * u * u; }
double smoothstep5_deriv(double u) {
  double v = u * (1.0 - u);
  return 30.0 * v * v;
}

}  // namespace

double psi_cutoff(double t) {
  if (t <= 0.9) return 1.0;
  if (t >= 1.0) return 0.0;
  return smoothstep5((1.0 - t) / 0.1);
}

double psi_cutoff_deriv(double t) {
  if (t <= 0.9 || t >= 1.0) return 0.0;
  return -10.0 * smoothstep5_deriv((1.0 - t) / 0.1);
}

ProfileShape profile_shape(int k) {
  if (k < 1 || k > 12) throw CapacityError("profile shape requires 1 <= k <= 12");
  ProfileShape s;
  s.k = k;
  s.T = k == 1 ? 0.0 : k * std::log(static_cast<double>(k));
  s.U = 1.0 / std::sqrt(static_cast<double>(k));
  return s;
}

namespace {

// Largest point dimension any route forms (k + 1 for the J integrals).
inline constexpr std::size_t kMaxProfileDim = 13;

// Per-coordinate factor g(t) = psi(t/U) / (1 + T t) and the telescoped
// variant gt(t) = psi(t/2) / (1 + T t).
double g_factor(const ProfileShape& s, double t) {
  if (t < 0.0 || t >= s.U) return 0.0;
  return psi_cutoff(t / s.U) / (1.0 + s.T * t);
}

double g_factor_deriv(const ProfileShape& s, double t) {
  if (t < 0.0 || t >= s.U) return 0.0;
  double den = 1.0 + s.T * t;
  return psi_cutoff_deriv(t / s.U) / (s.U * den) - psi_cutoff(t / s.U) * s.T / (den * den);
}

double gt_factor(const ProfileShape& s, double t) {
  if (t < 0.0 || t >= 2.0) return 0.0;
  return psi_cutoff(t / 2.0) / (1.0 + s.T * t);
}

}  // namespace

double profile_value(const ProfileShape& s, ProfileVariant v, std::span<const double> t) {
  if (static_cast<int>(t.size()) != s.k) throw DomainError("profile point dimension != k");
  switch (v) {
    case ProfileVariant::Full: {
      double sum = 0.0, prod = 1.0;
      for (double ti : t) {
        if (ti < 0.0) return 0.0;
        sum += ti;
        prod *= g_factor(s, ti);
        if (prod == 0.0) return 0.0;
      }
      return psi_cutoff(sum) * prod;
    }
    case ProfileVariant::NoOuter: {
      double prod = 1.0;
      for (double ti : t) {
        if (ti < 0.0) return 0.0;
        prod *= g_factor(s, ti);
        if (prod == 0.0) return 0.0;
      }
      return prod;
    }
    case ProfileVariant::Telescope: {
      // sum over j of gt(t_j) prod_{i != j} g(t_i), assembled via prefix
      // and suffix products so zeros do not poison other terms.
      auto n = t.size();
      std::array<double, kMaxProfileDim + 1> pre, suf;
      pre[0] = 1.0;
      suf[n] = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (t[i] < 0.0) return 0.0;
        pre[i + 1] = pre[i] * g_factor(s, t[i]);
      }
      for (std::size_t i = n; i-- > 0;) suf[i] = suf[i + 1] * g_factor(s, t[i]);
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) total += pre[j] * gt_factor(s, t[j]) * suf[j + 1];
      return total;
    }
  }
  throw DomainError("unknown profile variant");
}

// ---------------------------------------------------------------------------
// 1-D quadrature utilities

namespace {

struct GaussRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

// Legendre nodes/weights by Newton iteration; n <= 64.
const GaussRule& gauss_rule(int n) {
  static std::vector<GaussRule> cache(65);
  if (n < 2 || n > 64) throw DomainError("gauss rule order out of range");
  GaussRule& r = cache[static_cast<std::size_t>(n)];
  if (!r.x.empty()) return r;
  r.x.resize(static_cast<std::size_t>(n));
  r.w.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    r.x[static_cast<std::size_t>(i)] = x;
    r.w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

double gauss_piece(const std::function<double(double)>& f, double a, double b, const GaussRule& r) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  Kahan acc;
  for (std::size_t i = 0; i < r.x.size(); ++i) acc.add(r.w[i] * f(mid + half * r.x[i]));
  return acc.value() * half;
}

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth > 48) return left + right;
  if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 0);
}

double integrate_breakpoints(const std::function<double(double)>& f, double a, double b,
                             std::vector<double> breakpoints, int gauss_points) {
  if (!(b > a)) return 0.0;
  breakpoints.push_back(a);
  breakpoints.push_back(b);
  std::sort(breakpoints.begin(), breakpoints.end());
  const GaussRule& rule = gauss_rule(gauss_points);
  Kahan acc;
  double prev = a;
  for (double x : breakpoints) {
    if (x <= prev + 1e-13) continue;
    if (x > b) break;
    acc.add(gauss_piece(f, prev, x, rule));
    prev = x;
  }
  if (prev < b - 1e-13) acc.add(gauss_piece(f, prev, b, rule));
  return acc.value();
}

// ---------------------------------------------------------------------------
// Convolution route
//
// With g supported on [0, U] and h = g^2, the square integral factors as
//   I_k = int_0^1 psi(s)^2 (h^{*k})(s) ds,
//   J_k = int_0^1 m(s)^2 (h^{*(k-1)})(s) ds,  m(s) = int psi(s+u) g(u) du,
// so only 1-D objects are ever formed. Convolution powers live on a
// uniform grid; each step is trapezoidal with Euler-Maclaurin endpoint
// corrections (the tracked derivative arrays feed them), and the final
// values at two grid resolutions are Richardson-combined. The profile is
// C^2 with piecewise-analytic pieces, so the corrected trapezoid error is
// O(delta^4) and the combination cancels its smooth part.

namespace {

struct GridFn {
  // samples on s_i = i * delta, i = 0..M
  std::vector<double> val;
  std::vector<double> der;
  double delta = 0.0;
};

GridFn sample_h(const ProfileShape& s, int m_log2) {
  GridFn f;
  std::size_t m = std::size_t{1} << m_log2;
  f.delta = 1.0 / static_cast<double>(m);
  f.val.resize(m + 1);
  f.der.resize(m + 1);
  for (std::size_t i = 0; i <= m; ++i) {
    double t = static_cast<double>(i) * f.delta;
    double g = g_factor(s, t);
    f.val[i] = g * g;
    f.der[i] = 2.0 * g * g_factor_deriv(s, t);
  }
  return f;
}

// One convolution step c -> c * h (integral convolution on [0, 1]).
GridFn convolve_step(const GridFn& c, const GridFn& h) {
  std::size_t m = c.val.size() - 1;
  double delta = c.delta;
  GridFn out;
  out.delta = delta;
  out.val.assign(m + 1, 0.0);
  out.der.assign(m + 1, 0.0);
  out.der[0] = c.val[0] * h.val[0];
  for (std::size_t i = 1; i <= m; ++i) {
    Kahan trap, dtrap;
    trap.add(0.5 * c.val[0] * h.val[i]);
    trap.add(0.5 * c.val[i] * h.val[0]);
    dtrap.add(0.5 * c.der[0] * h.val[i]);
    dtrap.add(0.5 * c.der[i] * h.val[0]);
    for (std::size_t j = 1; j < i; ++j) {
      trap.add(c.val[j] * h.val[i - j]);
      dtrap.add(c.der[j] * h.val[i - j]);
    }
    // endpoint correction -(delta^2/12) [f'(s) - f'(0)] for f(t) = c(t) h(s-t)
    double corr = -(delta * delta / 12.0) *
                  (c.der[i] * h.val[0] - c.val[i] * h.der[0] - c.der[0] * h.val[i] + c.val[0] * h.der[i]);
    out.val[i] = delta * trap.value() + corr;
    out.der[i] = c.val[0] * h.val[i] + delta * dtrap.value();
  }
  return out;
}

// Cubic Lagrange interpolation of grid samples at arbitrary s in [0, 1].
double grid_interp(const GridFn& f, double s) {
  auto m = static_cast<std::int64_t>(f.val.size()) - 1;
  if (s <= 0.0) return f.val[0];
  if (s >= 1.0) return f.val[static_cast<std::size_t>(m)];
  auto i0 = static_cast<std::int64_t>(std::floor(s / f.delta)) - 1;
  i0 = std::clamp<std::int64_t>(i0, 0, m - 3);
  double x = s / f.delta - static_cast<double>(i0);
  // nodes at offsets 0, 1, 2, 3
  double l0 = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
  double l1 = x * (x - 2.0) * (x - 3.0) / 2.0;
  double l2 = -x * (x - 1.0) * (x - 3.0) / 2.0;
  double l3 = x * (x - 1.0) * (x - 2.0) / 6.0;
  auto u = static_cast<std::size_t>(i0);
  return l0 * f.val[u] + l1 * f.val[u + 1] + l2 * f.val[u + 2] + l3 * f.val[u + 3];
}

double m_profile(const ProfileShape& s, double t, int gauss_points) {
  // m(t) = int_0^U psi(t + u) g(u) du; integrand kinks where t + u crosses
  // the cutoff knots and where u crosses the component knots.
  return integrate_breakpoints(
      [&](double u) { return psi_cutoff(t + u) * g_factor(s, u); }, 0.0, s.U,
      {0.9 * s.U, 0.9 - t, 1.0 - t}, gauss_points);
}

double conv_value_at(const ProfileShape& s, IntegralKind kind, int m_log2, int gauss_points) {
  GridFn h = sample_h(s, m_log2);
  if (kind == IntegralKind::I) {
    GridFn c = h;
    for (int j = 2; j <= s.k; ++j) c = convolve_step(c, h);
    auto eval = [&](double x) {
      double cv = s.k == 1 ? ([&] { double g = g_factor(s, x); return g * g; })() : grid_interp(c, x);
      double p = psi_cutoff(x);
      return p * p * cv;
    };
    return integrate_breakpoints(eval, 0.0, 1.0, {0.9, 0.9 * s.U, s.U}, gauss_points);
  }
  // J: k = 1 degenerates to m(0)^2 with no convolution factor.
  if (s.k == 1) {
    double m0 = m_profile(s, 0.0, gauss_points);
    return m0 * m0;
  }
  GridFn c = h;
  for (int j = 2; j <= s.k - 1; ++j) c = convolve_step(c, h);
  double upper = std::min(1.0, (s.k - 1) * s.U);
  auto eval = [&](double x) {
    double cv = s.k == 2 ? ([&] { double g = g_factor(s, x); return g * g; })() : grid_interp(c, x);
    if (cv == 0.0) return 0.0;
    double mv = m_profile(s, x, gauss_points);
    return mv * mv * cv;
  };
  return integrate_breakpoints(eval, 0.0, upper,
                               {0.9 * s.U, s.U, 0.9 - s.U, 1.0 - s.U, 0.9, 1.0}, gauss_points);
}

double ipow(double b, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// The NoOuter and Telescope variants have no cross-coordinate coupling, so
// their I/J integrals reduce exactly to products of five 1-D integrals.
IntegralEstimate uncoupled_closed_form(const ProfileShape& s, IntegralKind kind,
                                       ProfileVariant variant, int gauss_points) {
  auto g = [&](double t) { return g_factor(s, t); };
  auto gt = [&](double t) { return gt_factor(s, t); };
  std::vector<double> kn{0.9 * s.U, s.U};
  double A = integrate_breakpoints(g, 0.0, s.U, kn, gauss_points);
  double B2 = integrate_breakpoints([&](double t) { return g(t) * g(t); }, 0.0, s.U, kn, gauss_points);
  double At = integrate_breakpoints(gt, 0.0, 2.0, {s.U, 0.9 * s.U, 1.8}, gauss_points);
  double Bt2 = integrate_breakpoints([&](double t) { return gt(t) * gt(t); }, 0.0, 2.0,
                                     {s.U, 0.9 * s.U, 1.8}, gauss_points);
  double C = integrate_breakpoints([&](double t) { return g(t) * gt(t); }, 0.0, s.U, kn, gauss_points);
  const int k = s.k;
  double value = 0.0;
  if (variant == ProfileVariant::NoOuter) {
    value = kind == IntegralKind::I ? ipow(B2, k) : A * A * ipow(B2, k - 1);
  } else {
    if (kind == IntegralKind::I) {
      value = k * Bt2 * ipow(B2, k - 1);
      if (k >= 2) value += static_cast<double>(k) * (k - 1) * C * C * ipow(B2, k - 2);
    } else {
      value = At * At * ipow(B2, k - 1);
      if (k >= 2) {
        value += (k - 1) * Bt2 * ipow(B2, k - 2) * A * A;
        value += 2.0 * (k - 1) * C * A * At * ipow(B2, k - 2);
      }
      if (k >= 3) value += static_cast<double>(k - 1) * (k - 2) * C * C * ipow(B2, k - 3) * A * A;
    }
  }
  return IntegralEstimate{value, 1e-13 * std::fabs(value) + 1e-300, IntegralMethod::Convolution};
}

// ---------------------------------------------------------------------------
// Iterated quadrature route: nested Gauss-Legendre with the integration
// range at each level split at every point where the integrand (or any
// inner integral) loses analyticity. Pieces are analytic, so each level
// converges at Gauss speed.

struct QuadPlan {
  ProfileShape s;
  ProfileVariant variant;
  IntegralKind kind;
  int gauss_points;
  double coord_hi;  // U for Full/NoOuter, 2 for Telescope
};

double quad_nest(const QuadPlan& plan, int level, int dims, double prefix_sum,
                 std::vector<double>& point) {
  const ProfileShape& s = plan.s;
  if (level == dims) {
    if (plan.kind == IntegralKind::I) {
      double v = profile_value(s, plan.variant, point);
      return v * v;
    }
    // J point layout: t_1..t_{k-1}, u, v -> F(t, u) * F(t, v).
    // The two F arguments share a prefix, so swapping the last two slots
    // exposes each as a contiguous span.
    std::span<const double> head(point.data(), static_cast<std::size_t>(s.k));
    double fa = profile_value(s, plan.variant, head);
    std::swap(point[static_cast<std::size_t>(s.k) - 1], point[static_cast<std::size_t>(s.k)]);
    double fb = profile_value(s, plan.variant, head);
    std::swap(point[static_cast<std::size_t>(s.k) - 1], point[static_cast<std::size_t>(s.k)]);
    return fa * fb;
  }
  // Remaining coordinates that still feed the outer cutoff sum after this
  // one; for J the u/v coordinates extend the chain by one each.
  int remaining = dims - level - 1;
  std::vector<double> breaks{0.9 * s.U, s.U};
  if (plan.variant == ProfileVariant::Telescope) {
    breaks.push_back(1.8);
    breaks.push_back(2.0);
  }
  if (plan.variant != ProfileVariant::NoOuter) {
    for (int j = 0; j <= remaining; ++j) {
      breaks.push_back(0.9 - prefix_sum - j * s.U);
      breaks.push_back(1.0 - prefix_sum - j * s.U);
    }
  }
  bool last_shared = plan.kind == IntegralKind::J && level >= dims - 2;
  auto inner = [&](double x) {
    point[static_cast<std::size_t>(level)] = x;
    // u does not feed v's cutoff sum, so the prefix freezes on the last two levels
    return quad_nest(plan, level + 1, dims, last_shared ? prefix_sum : prefix_sum + x, point);
  };
  return integrate_breakpoints(inner, 0.0, plan.coord_hi, breaks, plan.gauss_points);
}

double quad_value(const ProfileShape& s, IntegralKind kind, ProfileVariant variant,
                  int gauss_points) {
  QuadPlan plan{s, variant, kind, gauss_points,
                variant == ProfileVariant::Telescope ? 2.0 : s.U};
  int dims = kind == IntegralKind::I ? s.k : s.k + 1;
  std::vector<double> point(static_cast<std::size_t>(dims), 0.0);
  return quad_nest(plan, 0, dims, 0.0, point);
}

// ---------------------------------------------------------------------------
// Stratified Monte Carlo route. Cells are visited in lexicographic order
// with one sequential RNG stream, so a fixed seed fixes the result.

IntegralEstimate mc_value(const ProfileShape& s, IntegralKind kind, ProfileVariant variant,
                          const IntegralOptions& opts) {
  int dims = kind == IntegralKind::I ? s.k : s.k + 1;
  double hi = variant == ProfileVariant::Telescope ? 2.0 : s.U;
  std::int64_t n = opts.mc_samples;
  if (n < 16) throw DomainError("too few Monte Carlo samples");
  auto cells_target = static_cast<double>(std::min<std::int64_t>(n / 4, 1 << 18));
  auto strata = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::floor(std::pow(cells_target, 1.0 / dims))));
  std::int64_t cells = 1;
  for (int d = 0; d < dims; ++d) cells *= strata;
  std::int64_t base = n / cells, rem = n % cells;

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double cell_side = hi / static_cast<double>(strata);
  double cell_vol = std::pow(cell_side, dims);

  std::vector<double> point(static_cast<std::size_t>(dims));
  std::vector<std::int64_t> idx(static_cast<std::size_t>(dims), 0);
  Kahan total;
  double var_sum = 0.0;
  for (std::int64_t ci = 0; ci < cells; ++ci) {
    std::int64_t n_c = base + (ci < rem ? 1 : 0);
    Kahan mean_acc, sq_acc;
    for (std::int64_t t = 0; t < n_c; ++t) {
      for (int d = 0; d < dims; ++d) {
        point[static_cast<std::size_t>(d)] =
            (static_cast<double>(idx[static_cast<std::size_t>(d)]) + unif(rng)) * cell_side;
      }
      double v;
      if (kind == IntegralKind::I) {
        double f = profile_value(s, variant, point);
        v = f * f;
      } else {
        std::span<const double> head(point.data(), static_cast<std::size_t>(s.k));
        double fa = profile_value(s, variant, head);
        std::swap(point[static_cast<std::size_t>(s.k) - 1], point[static_cast<std::size_t>(s.k)]);
        double fb = profile_value(s, variant, head);
        std::swap(point[static_cast<std::size_t>(s.k) - 1], point[static_cast<std::size_t>(s.k)]);
        v = fa * fb;
      }
      mean_acc.add(v);
      sq_acc.add(v * v);
    }
    double mean = n_c > 0 ? mean_acc.value() / static_cast<double>(n_c) : 0.0;
    double var = n_c > 1 ? std::max(0.0, (sq_acc.value() - static_cast<double>(n_c) * mean * mean) /
                                             static_cast<double>(n_c - 1))
                         : 0.0;
    total.add(cell_vol * mean);
    if (n_c > 0) var_sum += cell_vol * cell_vol * var / static_cast<double>(n_c);
    // lexicographic advance
    for (int d = dims - 1; d >= 0; --d) {
      auto& id = idx[static_cast<std::size_t>(d)];
      if (++id < strata) break;
      id = 0;
    }
  }
  return IntegralEstimate{total.value(), 3.0 * std::sqrt(var_sum), IntegralMethod::MonteCarlo};
}

}  // namespace

IntegralEstimate profile_integral(int k, IntegralKind kind, ProfileVariant variant,
                                  IntegralMethod method, const IntegralOptions& opts) {
  ProfileShape s = profile_shape(k);
  switch (method) {
    case IntegralMethod::Convolution: {
      if (opts.grid_log2 < 6 || opts.grid_log2 > 16) throw DomainError("grid_log2 out of range");
      if (variant != ProfileVariant::Full) return uncoupled_closed_form(s, kind, variant, opts.gauss_points);
      double fine = conv_value_at(s, kind, opts.grid_log2, opts.gauss_points);
      double coarse = conv_value_at(s, kind, opts.grid_log2 - 1, opts.gauss_points);
      double value = (16.0 * fine - coarse) / 15.0;
      double err = std::fabs(fine - coarse) / 15.0 + 1e-15 * std::fabs(value);
      return IntegralEstimate{value, err, IntegralMethod::Convolution};
    }
    case IntegralMethod::Quadrature: {
      if (k > 3) throw CapacityError("iterated quadrature supported for k <= 3 only");
      double v1 = quad_value(s, kind, variant, opts.gauss_points);
      double v2 = quad_value(s, kind, variant, std::max(6, opts.gauss_points - 4));
      return IntegralEstimate{v1, std::fabs(v1 - v2) + 1e-15 * std::fabs(v1),
                              IntegralMethod::Quadrature};
    }
    case IntegralMethod::MonteCarlo:
      return mc_value(s, kind, variant, opts);
  }
  throw DomainError("unknown integral method");
}

}  // namespace pcl
