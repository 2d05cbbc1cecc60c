#include "recomb/cube.hpp"

#include <cmath>
#include <string>

#include "recomb/errors.hpp"
#include "recomb/kernels.hpp"

namespace recomb {
namespace {

constexpr double kMassTol = 1e-12;
constexpr double kRoundedMassTol = 1e-9;
constexpr double kNegativeTol = -1e-9;
constexpr double kCoeffTol = 1e-9;

std::size_t dense_size(int n) { return std::size_t{1} << n; }

void check_length(int n, std::size_t len, const char* what) {
  check_dense_dimension(n);
  if (len != dense_size(n))
    throw DimensionMismatch(std::string(what) + ": expected 2^" + std::to_string(n) +
                            " entries, got " + std::to_string(len));
}

void check_site(int n, int site) {
  if (site < 1 || site > n)
    throw InvalidArgument("site index " + std::to_string(site) + " outside [1, " +
                          std::to_string(n) + "]");
}

}  // namespace

void check_dense_dimension(int n) {
  if (n < 1 || n > kDenseCap)
    throw CapacityError("dimension n=" + std::to_string(n) + " outside dense range [1, " +
                        std::to_string(kDenseCap) + "]");
}

Pmf::Pmf(int n, std::vector<double> weights) : n_(n), weights_(std::move(weights)) {
  check_length(n_, weights_.size(), "Pmf");
  for (std::size_t i = 0; i < weights_.size(); ++i)
    if (!(weights_[i] >= 0.0))
      throw InvalidArgument("Pmf: weight at index " + std::to_string(i) +
                            " is negative or NaN");
  const double mass = kernels::neumaier_sum(weights_);
  if (std::abs(mass - 1.0) > kMassTol)
    throw InvalidArgument("Pmf: total mass " + std::to_string(mass) + " differs from 1");
}

Pmf Pmf::from_rounded(int n, std::vector<double> weights) {
  check_length(n, weights.size(), "Pmf");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double& w = weights[i];
    if (w < kNegativeTol || std::isnan(w))
      throw InvalidTableError("reconstructed weight " + std::to_string(w) + " at index " +
                              std::to_string(i) + " is below tolerance");
    if (w < 0.0) w = 0.0;
  }
  const double mass = kernels::neumaier_sum(weights);
  if (std::abs(mass - 1.0) > kRoundedMassTol)
    throw InvalidTableError("reconstructed mass " + std::to_string(mass) + " differs from 1");
  return Pmf(Unchecked{}, n, std::move(weights));
}

Pmf Pmf::uniform(int n) {
  check_dense_dimension(n);
  return Pmf(Unchecked{}, n, std::vector<double>(dense_size(n), std::ldexp(1.0, -n)));
}

Pmf Pmf::point_mass(int n, std::uint32_t bits) {
  check_dense_dimension(n);
  if (bits >= dense_size(n)) throw InvalidArgument("point_mass: bits out of range");
  std::vector<double> w(dense_size(n), 0.0);
  w[bits] = 1.0;
  return Pmf(Unchecked{}, n, std::move(w));
}

Pmf Pmf::monochromatic(int n) {
  check_dense_dimension(n);
  std::vector<double> w(dense_size(n), 0.0);
  w.front() += 0.5;
  w.back() += 0.5;
  return Pmf(Unchecked{}, n, std::move(w));
}

Pmf Pmf::product(std::span<const double> biases) {
  const int n = static_cast<int>(biases.size());
  check_dense_dimension(n);
  for (double b : biases)
    if (!(std::abs(b) <= 1.0)) throw InvalidArgument("product: bias outside [-1, 1]");
  std::vector<double> w(dense_size(n), 1.0);
  // Grow the table one site at a time: [w * p_minus, w * p_plus].
  std::size_t len = 1;
  for (int i = 0; i < n; ++i) {
    const double plus = 0.5 * (1.0 + biases[i]);
    const double minus = 0.5 * (1.0 - biases[i]);
    for (std::size_t j = 0; j < len; ++j) {
      w[j + len] = w[j] * plus;
      w[j] *= minus;
    }
    len *= 2;
  }
  return Pmf(Unchecked{}, n, std::move(w));
}

FourierTable::FourierTable(int n, std::vector<double> coeffs)
    : n_(n), coeffs_(std::move(coeffs)) {
  check_length(n_, coeffs_.size(), "FourierTable");
  if (std::abs(coeffs_[0] - 1.0) > kMassTol)
    throw InvalidTableError("FourierTable: coefficient at the empty set is " +
                            std::to_string(coeffs_[0]));
  for (std::size_t s = 0; s < coeffs_.size(); ++s)
    if (!(std::abs(coeffs_[s]) <= 1.0 + kCoeffTol))
      throw InvalidTableError("FourierTable: |coeff| > 1 at subset " + std::to_string(s));
}

FourierTable FourierTable::uniform(int n) {
  check_dense_dimension(n);
  std::vector<double> c(dense_size(n), 0.0);
  c[0] = 1.0;
  return trusted(n, std::move(c));
}

FourierTable wht_forward(const Pmf& mu) {
  std::vector<double> t(mu.weights().begin(), mu.weights().end());
  kernels::wht_forward(t, mu.n());
  return FourierTable::trusted(mu.n(), std::move(t));
}

Pmf wht_inverse(const FourierTable& f) {
  if (std::abs(f[0] - 1.0) > kMassTol)
    throw InvalidTableError("wht_inverse: coefficient at the empty set must be 1");
  std::vector<double> t(f.coeffs().begin(), f.coeffs().end());
  kernels::wht_inverse(t, f.n());
  return Pmf::from_rounded(f.n(), std::move(t));
}

double tv_distance(const Pmf& mu, const Pmf& nu) {
  if (mu.n() != nu.n())
    throw DimensionMismatch("tv_distance: n=" + std::to_string(mu.n()) + " vs n=" +
                            std::to_string(nu.n()));
  kernels::CompensatedSum acc;
  for (std::size_t i = 0; i < mu.size(); ++i) acc.add(std::abs(mu[i] - nu[i]));
  return 0.5 * acc.value();
}

double marginal_bias(const Pmf& mu, int site) {
  check_site(mu.n(), site);
  const std::size_t bit = std::size_t{1} << (site - 1);
  kernels::CompensatedSum acc;
  for (std::size_t s = 0; s < mu.size(); ++s) acc.add((s & bit) ? mu[s] : -mu[s]);
  return acc.value();
}

double marginal_bias(const FourierTable& f, int site) {
  check_site(f.n(), site);
  return f[std::size_t{1} << (site - 1)];
}

FourierTable stationary_product(const FourierTable& f) {
  std::vector<double> c(f.size());
  c[0] = 1.0;
  // c[S] = c[S without its lowest site] * bias(lowest site); the lowest-bit
  // recursion gives the same product order on every call.
  for (std::size_t s = 1; s < c.size(); ++s) {
    const std::size_t low = s & (~s + 1);
    c[s] = c[s ^ low] * f[low];
  }
  return FourierTable::trusted(f.n(), std::move(c));
}

Pmf stationary_product(const Pmf& mu) {
  std::vector<double> biases(static_cast<std::size_t>(mu.n()));
  for (int i = 1; i <= mu.n(); ++i) biases[i - 1] = marginal_bias(mu, i);
  return Pmf::product(biases);
}

bool is_balanced(const Pmf& mu, double tol) {
  for (int i = 1; i <= mu.n(); ++i)
    if (std::abs(marginal_bias(mu, i)) > tol) return false;
  return true;
}

Pmf symmetrize(const Pmf& mu) {
  const std::size_t mask = mu.size() - 1;
  std::vector<double> w(mu.size());
  for (std::size_t s = 0; s < mu.size(); ++s) w[s] = 0.5 * (mu[s] + mu[s ^ mask]);
  return Pmf(mu.n(), std::move(w));
}

}  // namespace recomb
