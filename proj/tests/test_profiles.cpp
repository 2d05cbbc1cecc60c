#include <doctest.h>

#include <cmath>
#include <vector>

#include "recomb/discrete.hpp"
#include "recomb/errors.hpp"
#include "recomb/lowerbound.hpp"
#include "recomb/martingale.hpp"
#include "recomb/profiles.hpp"

using namespace recomb;

TEST_CASE("phi closed form against quadrature") {
  CHECK(gaussian_tv(0.0) == 0.0);
  CHECK(std::abs(gaussian_tv(1.0) - 0.1658) < 1e-3);
  CHECK(gaussian_tv(1e6) > 0.99);
  for (double s : {1e-3, 0.1, 0.5, 1.0, 3.0, 10.0, 100.0, 1e4}) {
    CHECK(std::abs(gaussian_tv(s) - gaussian_tv_quadrature(s)) < 1e-10);
    CHECK(gamma_s_mass(s) == doctest::Approx(1.0).epsilon(1e-10));
  }
  double prev = 0.0;
  for (double s = 0.01; s < 100; s *= 1.3) {
    const double v = gaussian_tv(s);
    CHECK(v > prev);
    prev = v;
  }
  CHECK_THROWS_AS(gaussian_tv(-1.0), InvalidArgument);
}

TEST_CASE("asymptotic ratios") {
  const AsymptoticsReport a = phi_asymptotics_check();
  CHECK(a.small_pass);
  CHECK(std::abs(a.small_ratio - 1) < 0.02);
  // Against the true leading term the large-s ratio is near one.
  CHECK(std::abs(a.large_ratio_leading - 1) < 0.1);
  CHECK(a.large_ratio == doctest::Approx(2 * a.large_ratio_leading).epsilon(1e-12));
}

TEST_CASE("fixed-t limit") {
  CHECK(fixed_t_limit(0) == 1.0);
  CHECK(fixed_t_limit(1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(fixed_t_limit(2) == doctest::Approx(0.625).epsilon(1e-14));
  CHECK(fixed_t_limit(3) == doctest::Approx(0.7265625).epsilon(1e-14));
  for (int t = 1; t <= 3; ++t) CHECK(std::abs(mono_mixture_tv(2000, t) - fixed_t_limit(t)) < 0.01);
}

TEST_CASE("f(lambda)") {
  const std::vector<double> one{1.0};
  for (double l = -10; l <= 10; l += 0.5)
    CHECK(std::abs(f_lambda(l, one) - gaussian_tv(std::exp(-l / 2))) < 1e-6);

  const auto w = w_values(w_infinity_samples(2000, StreamFamily{41, 0}));
  CHECK(f_lambda(40.0, w) < 1e-6);
  CHECK(f_lambda(-40.0, w) > 0.99);
  double prev = 1.0;
  for (double l = -8; l <= 8; l += 0.5) {
    const double f = f_lambda(l, w);
    CHECK(f <= prev);
    prev = f;
  }
  CHECK_THROWS_AS(f_lambda(0.0, std::vector<double>{}), InvalidArgument);
}

TEST_CASE("L1 against L2 inequality") {
  CHECK(tricky_phi(1.0) == 0.5);
  CHECK(tricky_phi(0.4) == 0.2);
  CHECK(tricky_phi(2.0) == doctest::Approx(0.8));
  double prev = 0.0;
  for (double x = 0; x < 10; x += 0.01) {
    CHECK(tricky_phi(x) >= prev);
    prev = tricky_phi(x);
  }

  const std::vector<double> flat{1.0, 1.0}, half{0.5, 0.5};
  const TrickyCheck z = tricky_inequality_check(flat, half);
  CHECK(z.tv == 0.0);
  CHECK(z.bound == 0.0);

  const TwoValuedDensity d = two_valued_density(0.5, 1.0);
  const TrickyCheck c = tricky_inequality_check(d.f, d.weights);
  CHECK(c.tv == 0.5);
  CHECK(c.l2 == 1.0);
  CHECK(c.bound == 0.5);

  CHECK_THROWS_AS(tricky_inequality_check(std::vector<double>{2.0, 1.0}, half), InvalidArgument);
  CHECK_THROWS_AS(tricky_inequality_check(flat, std::vector<double>{0.5, 0.6}), InvalidArgument);
}

TEST_CASE("block products") {
  const BlockSpec spec = make_block_spec(10, 4);
  CHECK(spec.alpha == 2);
  CHECK(spec.leftover == 2);
  const BlockProduct b = block_product_pmf(spec);
  CHECK(b.block_sizes() == std::vector<long long>{4, 4, 2});
  const Pmf mu = b.to_pmf();
  CHECK(mu[0] == 0.125);
  CHECK(mu[(1u << 10) - 1] == 0.125);
  CHECK(mu[0b1111] == 0.125);
  CHECK(is_balanced(mu, 1e-15));
  CHECK_THROWS_AS(make_block_spec(3, 4), InvalidArgument);

  const auto bin = binomial_pmf(10, 0.3);
  double mass = 0.0, mean = 0.0;
  for (std::size_t k = 0; k < bin.size(); ++k) {
    mass += bin[k];
    mean += k * bin[k];
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(mean == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("discrete block lower bound") {
  for (int t : {0, 1, 2}) {
    const DiscreteLowerBound b = lowerbound_experiment_discrete(3 * (80 << t), t);
    CHECK(std::abs(b.mean_xi / b.mean_xi_formula - 1) < 1e-9);
    CHECK(std::abs(b.second_xi / b.second_xi_formula - 1) < 1e-9);
    CHECK(b.pi_block <= 0.05);
    CHECK(b.pz_ratio >= 1.0 / 12);
  }
  const DiscreteLowerBound b = lowerbound_experiment_discrete(5120, 3, 20000, StreamFamily{42, 0});
  CHECK(b.bound > 0.9);
  CHECK(std::abs(b.mc_second_xi - b.second_xi_formula) <= 4 * b.mc_second_xi_se);
  CHECK_THROWS_AS(lowerbound_experiment_discrete(100, 3), InvalidArgument);
}

TEST_CASE("continuous block lower bound") {
  const ContinuousLowerBound b =
      lowerbound_experiment_continuous(1000, 2.0, 200, 16, StreamFamily{43, 0});
  CHECK(b.second_moment_violations == 0);
  CHECK(b.max_first_moment_z <= 4.0);
  CHECK(b.bound <= b.z_law_tv + 1e-12);
  CHECK(b.bound > 0.0);
}
