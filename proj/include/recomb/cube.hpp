#pragma once

// Probability measures on the Boolean cube {-1,+1}^n, stored densely and
// indexed by bitmask: bit i of the index is set iff spin i+1 equals +1.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace recomb {

/// Largest dimension for which dense 2^n storage is allowed.
inline constexpr int kDenseCap = 24;

/// Throws CapacityError unless 1 <= n <= kDenseCap.
void check_dense_dimension(int n);

struct SpinConfig {
  std::uint32_t bits = 0;
  int n = 0;

  /// Spin of site i, 0-based, as +1 or -1.
  int spin(int i) const { return ((bits >> i) & 1u) ? 1 : -1; }
};

/// Walsh character chi_S(sigma) = prod_{i in S} sigma_i.
inline int character(std::uint32_t subset, std::uint32_t bits) {
  return (std::popcount(subset & ~bits) & 1) ? -1 : 1;
}

class Pmf {
 public:
  /// Validates: length 2^n, non-negative entries, total mass 1 within 1e-12.
  Pmf(int n, std::vector<double> weights);

  static Pmf uniform(int n);
  static Pmf point_mass(int n, std::uint32_t bits);
  /// 1/2 on all-minus plus 1/2 on all-plus.
  static Pmf monochromatic(int n);
  /// Product measure with E[sigma_i] = biases[i].
  static Pmf product(std::span<const double> biases);

  int n() const { return n_; }
  std::size_t size() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }
  double operator[](std::size_t bits) const { return weights_[bits]; }

  /// For weights produced by a transform: entries in [-1e-9, 0) are
  /// clamped to zero, more negative entries raise InvalidTableError, and
  /// the mass tolerance is relaxed to 1e-9.
  static Pmf from_rounded(int n, std::vector<double> weights);

 private:
  struct Unchecked {};
  Pmf(Unchecked, int n, std::vector<double> weights)
      : n_(n), weights_(std::move(weights)) {}

  int n_;
  std::vector<double> weights_;
};

/// Walsh coefficients: coeffs[S] = sum_sigma mu(sigma) chi_S(sigma).
class FourierTable {
 public:
  /// Validates: length 2^n, coeffs[0] = 1 within 1e-12, |coeffs| <= 1 + 1e-9.
  FourierTable(int n, std::vector<double> coeffs);

  static FourierTable uniform(int n);

  int n() const { return n_; }
  std::size_t size() const { return coeffs_.size(); }
  std::span<const double> coeffs() const { return coeffs_; }
  double operator[](std::size_t subset) const { return coeffs_[subset]; }

  /// Skips validation. Kernels that provably output a probability
  /// measure's table use this to avoid an O(2^n) pass per call.
  static FourierTable trusted(int n, std::vector<double> coeffs) {
    return FourierTable(Trusted{}, n, std::move(coeffs));
  }

 private:
  struct Trusted {};
  FourierTable(Trusted, int n, std::vector<double> coeffs)
      : n_(n), coeffs_(std::move(coeffs)) {}

  int n_;
  std::vector<double> coeffs_;
};

FourierTable wht_forward(const Pmf& mu);

/// Inverse transform. Entries down to -1e-9 are treated as round-off and
/// clamped to zero; anything more negative raises InvalidTableError.
Pmf wht_inverse(const FourierTable& f);

double tv_distance(const Pmf& mu, const Pmf& nu);

/// E_mu[sigma_i] for a 1-based site index.
double marginal_bias(const Pmf& mu, int site);
double marginal_bias(const FourierTable& f, int site);

/// Product of the single-site marginals of mu.
Pmf stationary_product(const Pmf& mu);
FourierTable stationary_product(const FourierTable& f);

bool is_balanced(const Pmf& mu, double tol);

/// ½(mu + mu o flip): the global spin flip symmetrises every marginal.
Pmf symmetrize(const Pmf& mu);

}  // namespace recomb
