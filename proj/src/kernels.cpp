#include "recomb/kernels.hpp"

#include <bit>
#include <cmath>
#include <cstdint>

namespace recomb::kernels {
namespace {

// Tables below this size are not worth a parallel region.
constexpr std::size_t kParallelThreshold = std::size_t{1} << 12;

struct ForwardPair {
  void operator()(double* t, std::size_t lo, std::size_t hi) const {
    const double a = t[lo];  // sigma_i = -1
    const double b = t[hi];  // sigma_i = +1
    t[lo] = a + b;
    t[hi] = b - a;
  }
};

struct InversePair {
  void operator()(double* t, std::size_t lo, std::size_t hi) const {
    const double u = t[lo];
    const double v = t[hi];
    t[lo] = 0.5 * (u - v);
    t[hi] = 0.5 * (u + v);
  }
};

inline double collision_entry(const double* a, const double* b, std::uint32_t s) {
  if (s == 0) return a[0] * b[0];
  const std::uint32_t top = std::bit_floor(s);
  const std::uint32_t rest = s ^ top;
  double acc = 0.0;
  std::uint32_t t = rest;
  while (true) {
    const std::uint32_t c = s ^ t;
    acc += a[t] * b[c] + a[c] * b[t];
    if (t == 0) break;
    t = (t - 1) & rest;
  }
  return std::ldexp(acc, -std::popcount(s));
}

template <class Pair>
void transform_openmp(std::span<double> table, int n, Pair pair) {
  double* t = table.data();
  const std::size_t size = table.size();
#pragma omp parallel if (size >= kParallelThreshold)
  for (int i = 0; i < n; ++i) {
    const std::size_t half = std::size_t{1} << i;
    const auto blocks = static_cast<long long>(size / (2 * half));
    // Share out whole blocks while there are many; split inside a block
    // once the levels get coarse.
    if (blocks >= static_cast<long long>(half)) {
#pragma omp for schedule(static)
      for (long long b = 0; b < blocks; ++b) {
        const std::size_t base = static_cast<std::size_t>(b) * 2 * half;
        for (std::size_t j = 0; j < half; ++j) pair(t, base + j, base + j + half);
      }
    } else {
      for (long long b = 0; b < blocks; ++b) {
        const std::size_t base = static_cast<std::size_t>(b) * 2 * half;
#pragma omp for schedule(static)
        for (long long j = 0; j < static_cast<long long>(half); ++j)
          pair(t, base + static_cast<std::size_t>(j), base + static_cast<std::size_t>(j) + half);
      }
    }
  }
}

template <class Pair>
void transform_serial(std::span<double> table, int n, Pair pair) {
  double* t = table.data();
  const std::size_t size = table.size();
  for (int i = 0; i < n; ++i) {
    const std::size_t half = std::size_t{1} << i;
    for (std::size_t base = 0; base < size; base += 2 * half)
      for (std::size_t j = 0; j < half; ++j) pair(t, base + j, base + j + half);
  }
}

}  // namespace

void wht_forward(std::span<double> table, int n) { transform_openmp(table, n, ForwardPair{}); }

void wht_forward_serial(std::span<double> table, int n) {
  transform_serial(table, n, ForwardPair{});
}

void wht_inverse(std::span<double> table, int n) { transform_openmp(table, n, InversePair{}); }

void wht_inverse_serial(std::span<double> table, int n) {
  transform_serial(table, n, InversePair{});
}

void collision(std::span<const double> a, std::span<const double> b,
               std::span<double> out, int n) {
  const long long size = static_cast<long long>(std::size_t{1} << n);
#pragma omp parallel for schedule(dynamic, 64) if (n >= 10)
  for (long long s = 0; s < size; ++s)
    out[static_cast<std::size_t>(s)] =
        collision_entry(a.data(), b.data(), static_cast<std::uint32_t>(s));
}

void collision_serial(std::span<const double> a, std::span<const double> b,
                      std::span<double> out, int n) {
  const std::uint32_t size = std::uint32_t{1} << n;
  for (std::uint32_t s = 0; s < size; ++s)
    out[s] = collision_entry(a.data(), b.data(), s);
}

void collision_reference(std::span<const double> a, std::span<const double> b,
                         std::span<double> out, int n) {
  const std::uint32_t size = std::uint32_t{1} << n;
  for (std::uint32_t s = 0; s < size; ++s) {
    double acc = 0.0;
    for (std::uint32_t t = 0; t < size; ++t)
      if ((t & s) == t) acc += a[t] * b[s ^ t];
    out[s] = acc / static_cast<double>(std::uint64_t{1} << std::popcount(s));
  }
}

double neumaier_sum(std::span<const double> xs) {
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

}  // namespace recomb::kernels
