#include "recomb/profiles.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "recomb/errors.hpp"
#include "recomb/kernels.hpp"

namespace recomb {
namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double normal_density(double z, double var) {
  return kInvSqrt2Pi / std::sqrt(var) * std::exp(-0.5 * z * z / var);
}

double integrate(auto&& f, double a, double b) {
  return gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-12);
}

// Root of a continuous function with a sign change on [lo, hi].
double bisect(auto&& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double gaussian_tv(double s) {
  if (!(s >= 0.0)) throw InvalidArgument("gaussian_tv: s must be non-negative");
  if (s == 0.0) return 0.0;
  const double z = std::sqrt((1.0 + s) * std::log1p(s) / s);
  const double inner = z / std::sqrt(1.0 + s);
  // 2 (Phi(z) - Phi(inner)) = erfc(inner / sqrt2) - erfc(z / sqrt2)
  return std::erfc(inner / std::numbers::sqrt2) - std::erfc(z / std::numbers::sqrt2);
}

double gaussian_tv_quadrature(double s) {
  if (!(s >= 0.0)) throw InvalidArgument("gaussian_tv_quadrature: s must be non-negative");
  if (s == 0.0) return 0.0;
  const double var = 1.0 + s;
  const double a = s / (2.0 * var), b = 0.5 * std::log1p(s);
  // n_{1+s}(z) - n_1(z) = n_1(z) expm1(a z^2 - b); expm1 keeps the small-s
  // difference accurate, the plain difference avoids overflow at large z.
  auto diff = [=](double z) {
    const double x = a * z * z - b;
    if (x < 1.0) return normal_density(z, 1.0) * std::expm1(x);
    return kInvSqrt2Pi * std::exp(x - 0.5 * z * z) - normal_density(z, 1.0);
  };
  double hi = 1.0;
  while (diff(hi) < 0.0 && hi < 1e3) hi *= 2;
  while (diff(hi) <= 0.0) hi *= 2;
  const double cross = bisect(diff, 0.0, hi);
  const double end = 40.0 * std::sqrt(var);
  auto abs_diff = [&](double z) { return std::abs(diff(z)); };
  // By symmetry the full integral is twice the half line; the 1/2 cancels.
  // The N(0,1) part dies within a few units of the crossing while the wide
  // density spans ~sqrt(1+s); split so each piece has a single scale.
  const double near = std::min(end, cross + 40.0);
  double total = integrate(abs_diff, 0.0, cross) + integrate(abs_diff, cross, near);
  if (end > near) total += integrate(abs_diff, near, end);
  return total;
}

double gamma_s(double s, double z) {
  if (!(s >= 0.0)) throw InvalidArgument("gamma_s: s must be non-negative");
  return std::exp(s * z * z / (2.0 * (s + 1.0))) / std::sqrt(s + 1.0);
}

double gamma_s_mass(double s) {
  const double end = 40.0 * std::sqrt(1.0 + s);
  // gamma_s(z) n(z) with the exponents combined so large z does not overflow.
  auto f = [s](double z) {
    return kInvSqrt2Pi / std::sqrt(s + 1.0) * std::exp(s * z * z / (2.0 * (s + 1.0)) - 0.5 * z * z);
  };
  return 2.0 * integrate(f, 0.0, end);
}

AsymptoticsReport phi_asymptotics_check() {
  AsymptoticsReport r;
  r.small_ratio = gaussian_tv(r.small_s) / (r.small_s / std::sqrt(2.0 * std::numbers::e * std::numbers::pi));
  r.small_pass = std::abs(r.small_ratio - 1.0) <= 0.02;
  const double s = r.large_s;
  const double tail = 1.0 - gaussian_tv(s);
  r.large_ratio = tail * std::sqrt(2.0 * std::numbers::pi * s / std::log(s));
  r.large_pass = std::abs(r.large_ratio - 1.0) <= 0.05;
  r.large_ratio_leading = tail / std::sqrt(2.0 * std::log(s) / (std::numbers::pi * s));
  r.phi_at_one = gaussian_tv(1.0);
  return r;
}

double fixed_t_limit(int t) {
  if (t < 0 || t > 30) throw InvalidArgument("fixed_t_limit: t outside [0, 30]");
  if (t == 0) return 1.0;
  const double big_n = std::ldexp(1.0, t);
  const double log_central = std::lgamma(big_n + 1.0) - 2.0 * std::lgamma(0.5 * big_n + 1.0) -
                             big_n * std::numbers::ln2;
  return -std::expm1(log_central);
}

double f_lambda(double lambda, std::span<const double> w, const QuadratureSpec& grid) {
  if (w.empty()) throw InvalidArgument("f_lambda: empty W sample");
  if (!(grid.step > 0.0)) throw InvalidArgument("f_lambda: quadrature step must be positive");
  const double scale = std::exp(-0.5 * lambda);
  std::vector<double> a(w.size()), b(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (!(w[k] > 0.0)) throw InvalidArgument("f_lambda: W samples must be positive");
    const double v = scale * w[k];
    a[k] = v / (2.0 * (1.0 + v));
    b[k] = 1.0 / std::sqrt(1.0 + v);
  }
  const double inv_m = 1.0 / static_cast<double>(w.size());
  // g(z) = mean_W gamma_{scale W}(z) increases in |z|, from below 1 at 0.
  auto g_minus_one = [&](double z) {
    kernels::CompensatedSum acc;
    const double z2 = z * z;
    for (std::size_t k = 0; k < a.size(); ++k) acc.add(b[k] * std::exp(a[k] * z2));
    return acc.value() * inv_m - 1.0;
  };
  double hi = 1.0;
  while (g_minus_one(hi) < 0.0) hi *= 2.0;
  const double zstar = bisect(g_minus_one, 0.0, hi);
  // f = int_{|z| < z*} (1 - g) dN; composite Simpson on [0, z*].
  long long cells = static_cast<long long>(std::ceil(zstar / grid.step));
  if (cells % 2) ++cells;
  cells = std::max(2ll, cells);
  const double h = zstar / static_cast<double>(cells);
  kernels::CompensatedSum acc;
  for (long long i = 0; i <= cells; ++i) {
    const double z = h * static_cast<double>(i);
    const double weight = (i == 0 || i == cells) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc.add(weight * (-g_minus_one(z)) * normal_density(z, 1.0));
  }
  return std::clamp(2.0 * acc.value() * h / 3.0, 0.0, 1.0);
}

double tricky_phi(double x) {
  if (!(x >= 0.0)) throw InvalidArgument("tricky_phi: x must be non-negative");
  return x <= 1.0 ? 0.5 * x : x * x / (1.0 + x * x);
}

TrickyCheck tricky_inequality_check(std::span<const double> f, std::span<const double> weights) {
  if (f.size() != weights.size() || f.empty())
    throw InvalidArgument("tricky_inequality_check: f and weights must have equal, nonzero size");
  kernels::CompensatedSum mass, mean;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(weights[i] >= 0.0)) throw InvalidArgument("tricky_inequality_check: negative weight");
    if (!(f[i] >= 0.0)) throw InvalidArgument("tricky_inequality_check: negative density");
    mass.add(weights[i]);
    mean.add(weights[i] * f[i]);
  }
  if (std::abs(mass.value() - 1.0) > 1e-9)
    throw InvalidArgument("tricky_inequality_check: weights do not sum to one");
  if (std::abs(mean.value() - 1.0) > 1e-9)
    throw InvalidArgument("tricky_inequality_check: density does not have mean one");
  kernels::CompensatedSum l1, l2;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = f[i] - 1.0;
    l1.add(weights[i] * std::abs(d));
    l2.add(weights[i] * d * d);
  }
  TrickyCheck c;
  c.tv = 0.5 * l1.value();
  c.l2 = std::sqrt(l2.value());
  c.bound = tricky_phi(c.l2);
  c.holds = c.tv <= c.bound + kTrickySlack;
  return c;
}

TwoValuedDensity two_valued_density(double pi_a, double a) {
  if (!(pi_a > 0.0 && pi_a < 1.0)) throw InvalidArgument("two_valued_density: pi(A) in (0,1)");
  if (!(a >= 0.0 && a <= (1.0 - pi_a) / pi_a * (1.0 + 1e-12)))
    throw InvalidArgument("two_valued_density: a outside [0, (1 - pi(A)) / pi(A)]");
  const double off = std::max(0.0, 1.0 - a * pi_a / (1.0 - pi_a));
  return {{1.0 + a, off}, {pi_a, 1.0 - pi_a}};
}

}  // namespace recomb
