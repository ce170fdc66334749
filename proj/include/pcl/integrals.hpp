#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pcl/errors.hpp"

namespace pcl {

// C^2 plateau cutoff: 1 on (-inf, 0.9], 0 on [1, inf), quintic smoothstep
// between. psi(0.95) = 1/2; both end derivatives vanish.
double psi_cutoff(double t);
double psi_cutoff_deriv(double t);

// Shape parameters of the k-dimensional weight profile
//   F(t) = psi(sum t_i) * prod_i psi(t_i / U) / (1 + T t_i),
// T = k log k (0 for k = 1), U = k^{-1/2}.
struct ProfileShape {
  int k = 0;
  double T = 0.0;
  double U = 0.0;
};
ProfileShape profile_shape(int k);

// Variant selection:
//   Full      - F as above (the production weight profile)
//   NoOuter   - F1: outer psi dropped (product form)
//   Telescope - F2: sum_j psi(t_j/2)/(1+T t_j) prod_{i != j} psi(t_i/U)/(1+T t_i)
enum class ProfileVariant { Full, NoOuter, Telescope };

double profile_value(const ProfileShape& s, ProfileVariant v, std::span<const double> t);

enum class IntegralKind { I, J };  // I: int F^2; J: int (int F du_k)^2
enum class IntegralMethod { Convolution, Quadrature, MonteCarlo };

struct IntegralEstimate {
  double value = 0.0;
  double error_estimate = 0.0;  // certified-style bound on the numeric error
  IntegralMethod method = IntegralMethod::Convolution;
};

struct IntegralOptions {
  int grid_log2 = 11;               // convolution grid 2^grid_log2 on [0, 1]
  int gauss_points = 16;            // nodes per analytic piece (quadrature)
  std::int64_t mc_samples = 10'000'000;
  std::uint64_t seed = 0x5EED'0F1E'1D5EED5EULL;
};

// I_k or J_k for the selected variant by the selected method.
//  - Convolution: 1-D grid self-convolutions (exact product formulas for
//    the uncoupled NoOuter/Telescope variants); k <= 12.
//  - Quadrature: iterated Gauss-Legendre split at every cutoff knot; cost
//    is exponential in k, so k <= 3.
//  - MonteCarlo: stratified, fixed seed, deterministic cell order; k <= 12.
IntegralEstimate profile_integral(int k, IntegralKind kind, ProfileVariant variant,
                                  IntegralMethod method, const IntegralOptions& opts = {});

// Adaptive Simpson on [a, b] to absolute tolerance tol.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol);

// Composite Gauss-Legendre with interior breakpoints (clipped to (a, b));
// exact for analytic pieces between consecutive breakpoints.
double integrate_breakpoints(const std::function<double(double)>& f, double a, double b,
                             std::vector<double> breakpoints, int gauss_points);

}  // namespace pcl
