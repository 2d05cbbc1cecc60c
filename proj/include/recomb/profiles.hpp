#pragma once

// Gaussian cutoff profiles, their asymptotics, the fixed-t limit and the
// L1/L2 density inequality.

#include <span>
#include <vector>

namespace recomb {

/// TV distance between N(0,1) and N(0,1+s), from the density crossing
/// point z_s^2 = (1+s) log(1+s) / s.
double gaussian_tv(double s);

/// The same quantity by adaptive Gauss-Kronrod quadrature of
/// |n_{1+s} - n_1|, split at a numerically located crossing.
double gaussian_tv_quadrature(double s);

/// Density of N(0,1+s) relative to N(0,1).
double gamma_s(double s, double z);

/// Integral of gamma_s against N(0,1), by quadrature.
double gamma_s_mass(double s);

struct AsymptoticsReport {
  double small_s = 1e-3;
  double small_ratio = 0.0;       // phi(s) / (s / sqrt(2 e pi))
  bool small_pass = false;        // within 2%
  double large_s = 1e6;
  double large_ratio = 0.0;       // (1 - phi(s)) sqrt(2 pi s / log s)
  bool large_pass = false;        // within 5%
  double large_ratio_leading = 0.0;  // (1 - phi(s)) / sqrt(2 log s / (pi s))
  double phi_at_one = 0.0;
};
AsymptoticsReport phi_asymptotics_check();

/// 1 - C(2^t, 2^{t-1}) 2^{-2^t}; equals 1 at t = 0.
double fixed_t_limit(int t);

struct QuadratureSpec {
  double step = 1e-3;
};

/// f(lambda) = 1/2 int |E_W[gamma_{e^{-lambda/2} W}(z)] - 1| dN(0,1)(z),
/// with the mean over the given W sample taken inside the absolute value.
double f_lambda(double lambda, std::span<const double> w, const QuadratureSpec& grid = {});

double tricky_phi(double x);

/// Absolute rounding allowance: extremal densities sit on the equality
/// case and land one ulp either side of it.
inline constexpr double kTrickySlack = 1e-12;

struct TrickyCheck {
  double tv = 0.0;      // 1/2 ||f - 1||_1
  double l2 = 0.0;      // ||f - 1||_2
  double bound = 0.0;   // tricky_phi(l2)
  bool holds = false;   // tv <= bound + kTrickySlack
};

/// Density f against the finite measure with the given weights. Throws
/// InvalidArgument unless weights are a probability vector and f is a
/// non-negative density of mean one (tolerance 1e-9).
TrickyCheck tricky_inequality_check(std::span<const double> f, std::span<const double> weights);

/// (1+a) on A and 1 - a pi(A) / (1 - pi(A)) off A, on a two-point space.
struct TwoValuedDensity {
  std::vector<double> f;
  std::vector<double> weights;
};
TwoValuedDensity two_valued_density(double pi_a, double a);

}  // namespace recomb
