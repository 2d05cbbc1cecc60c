#include <doctest.h>

#include <cmath>
#include <vector>

#include "recomb/acceptance.hpp"
#include "recomb/cube.hpp"
#include "recomb/errors.hpp"
#include "recomb/kernels.hpp"
#include "recomb/rng.hpp"

using namespace recomb;

namespace {

// Literal sum over configurations.
std::vector<double> naive_fourier(const Pmf& mu) {
  std::vector<double> c(mu.size(), 0.0);
  for (std::uint32_t s = 0; s < mu.size(); ++s)
    for (std::uint32_t x = 0; x < mu.size(); ++x) c[s] += mu[x] * character(s, x);
  return c;
}

}  // namespace

TEST_CASE("forward transform examples") {
  const FourierTable u = wht_forward(Pmf::uniform(3));
  CHECK(u[0] == 1.0);
  for (std::size_t s = 1; s < 8; ++s) CHECK(u[s] == 0.0);

  const FourierTable plus = wht_forward(Pmf::point_mass(2, 0b11));
  for (std::size_t s = 0; s < 4; ++s) CHECK(plus[s] == 1.0);

  const FourierTable mono = wht_forward(Pmf::monochromatic(2));
  CHECK(mono[0] == 1.0);
  CHECK(mono[1] == 0.0);
  CHECK(mono[2] == 0.0);
  CHECK(mono[3] == 1.0);
}

TEST_CASE("transform matches the character sum") {
  RandomStream rng = rng_substream(1, 0);
  for (int n = 1; n <= 7; ++n) {
    const Pmf mu = random_pmf(n, rng);
    const auto naive = naive_fourier(mu);
    const FourierTable f = wht_forward(mu);
    for (std::size_t s = 0; s < mu.size(); ++s) CHECK(f[s] == doctest::Approx(naive[s]).epsilon(1e-13));
  }
}

TEST_CASE("inverse transform examples and round trip") {
  const Pmf u = wht_inverse(FourierTable::uniform(4));
  for (std::size_t x = 0; x < 16; ++x) CHECK(u[x] == 1.0 / 16);

  const Pmf m = wht_inverse(FourierTable(2, {1, 0, 0, 0.5}));
  CHECK(m[0] == 3.0 / 8);
  CHECK(m[1] == 1.0 / 8);
  CHECK(m[2] == 1.0 / 8);
  CHECK(m[3] == 3.0 / 8);

  RandomStream rng = rng_substream(2, 0);
  for (int n = 1; n <= 12; ++n) {
    const Pmf mu = random_pmf(n, rng);
    const Pmf back = wht_inverse(wht_forward(mu));
    for (std::size_t x = 0; x < mu.size(); ++x) CHECK(std::abs(back[x] - mu[x]) <= 1e-12);
  }
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(Pmf(2, {0.5, 0.5, 0.0}), DimensionMismatch);
  CHECK_THROWS_AS(Pmf(1, {1.5, -0.5}), InvalidArgument);
  CHECK_THROWS_AS(Pmf(1, {0.5, 0.6}), InvalidArgument);
  CHECK_THROWS_AS(Pmf::uniform(kDenseCap + 1), CapacityError);
  CHECK_THROWS_AS(FourierTable(1, {0.9, 0.0}), InvalidTableError);
  CHECK_THROWS_AS(FourierTable(1, {1.0, 1.5}), InvalidTableError);
  CHECK_THROWS_AS(wht_inverse(FourierTable(2, {1, 0.9, 0.9, -0.9})), InvalidTableError);
}

TEST_CASE("total variation") {
  RandomStream rng = rng_substream(3, 0);
  const Pmf mu = random_pmf(5, rng);
  CHECK(tv_distance(mu, mu) == 0.0);
  CHECK(tv_distance(Pmf::point_mass(4, 0), Pmf::point_mass(4, 15)) == 1.0);
  CHECK(tv_distance(Pmf(2, {0.375, 0.125, 0.125, 0.375}), Pmf::uniform(2)) == 0.25);
  CHECK_THROWS_AS(tv_distance(Pmf::uniform(2), Pmf::uniform(3)), DimensionMismatch);
}

TEST_CASE("marginal biases") {
  CHECK(marginal_bias(Pmf::uniform(3), 2) == 0.0);
  CHECK(marginal_bias(Pmf::point_mass(3, 0b111), 3) == 1.0);
  const Pmf q = Pmf::product(std::vector<double>{0.5, 0.0});
  CHECK(marginal_bias(q, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(marginal_bias(wht_forward(q), 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(marginal_bias(q, 0), InvalidArgument);
  CHECK_THROWS_AS(marginal_bias(q, 3), InvalidArgument);
}

TEST_CASE("stationary product") {
  RandomStream rng = rng_substream(4, 0);
  const Pmf balanced = random_balanced_pmf(5, rng);
  CHECK(is_balanced(balanced, 1e-14));
  CHECK(tv_distance(stationary_product(balanced), Pmf::uniform(5)) <= 1e-14);
  CHECK(tv_distance(stationary_product(Pmf::monochromatic(2)), Pmf::uniform(2)) == 0.0);

  const std::vector<double> b{0.3, -0.7, 0.1, 0.9};
  const Pmf prod = Pmf::product(b);
  CHECK(tv_distance(stationary_product(prod), prod) <= 1e-15);
  const FourierTable fs = stationary_product(wht_forward(prod));
  const FourierTable fp = wht_forward(prod);
  for (std::size_t s = 0; s < fp.size(); ++s) CHECK(std::abs(fs[s] - fp[s]) <= 1e-15);
}

TEST_CASE("serial and OpenMP kernels agree bitwise") {
  RandomStream rng = rng_substream(5, 0);
  for (int n : {3, 8, 13}) {
    const Pmf mu = random_pmf(n, rng), nu = random_pmf(n, rng);
    std::vector<double> a(mu.weights().begin(), mu.weights().end());
    std::vector<double> b = a;
    kernels::wht_forward(a, n);
    kernels::wht_forward_serial(b, n);
    CHECK(a == b);
    std::vector<double> fa = a;
    const FourierTable fn = wht_forward(nu);
    std::vector<double> o1(a.size()), o2(a.size()), o3(a.size());
    kernels::collision(fa, fn.coeffs(), o1, n);
    kernels::collision_serial(fa, fn.coeffs(), o2, n);
    CHECK(o1 == o2);
    if (n <= 8) {
      kernels::collision_reference(fa, fn.coeffs(), o3, n);
      for (std::size_t s = 0; s < o1.size(); ++s) CHECK(std::abs(o1[s] - o3[s]) <= 1e-15);
    }
    kernels::wht_inverse(a, n);
    kernels::wht_inverse_serial(b, n);
    CHECK(a == b);
  }
}

TEST_CASE("compensated summation") {
  std::vector<double> xs{1.0, 1e100, 1.0, -1e100};
  CHECK(kernels::neumaier_sum(xs) == 2.0);
}
