#pragma once

// Dense transform kernels over 2^n-length tables. Each kernel has an
// OpenMP version and a serial reference; both perform the same arithmetic
// in the same order per output entry, so their results agree bitwise.

#include <cstddef>
#include <span>

namespace recomb::kernels {

/// In place: table[S] <- sum_sigma table[sigma] chi_S(sigma).
void wht_forward(std::span<double> table, int n);
void wht_forward_serial(std::span<double> table, int n);

/// In place inverse of wht_forward, including the 2^-n factor.
void wht_inverse(std::span<double> table, int n);
void wht_inverse_serial(std::span<double> table, int n);

/// out[S] = 2^-|S| sum_{T subset S} a[T] b[S \ T].
///
/// Submasks are visited in complementary pairs (T, S \ T) so that the
/// result is bitwise symmetric in (a, b). Cost is about 3^n / 2.
void collision(std::span<const double> a, std::span<const double> b,
               std::span<double> out, int n);
void collision_serial(std::span<const double> a, std::span<const double> b,
                      std::span<double> out, int n);

/// Literal submask sum without pairing; the plain reference used by tests
/// and the benchmark.
void collision_reference(std::span<const double> a, std::span<const double> b,
                         std::span<double> out, int n);

/// Compensated (Neumaier) sum.
double neumaier_sum(std::span<const double> xs);

class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if ((sum_ >= 0 ? sum_ : -sum_) >= (x >= 0 ? x : -x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace recomb::kernels
