#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "recomb/acceptance.hpp"
#include "recomb/discrete.hpp"
#include "recomb/errors.hpp"
#include "recomb/estimate.hpp"

using namespace recomb;

namespace {

double coeff12(const FourierTable& f) { return f[3]; }

}  // namespace

TEST_CASE("collision examples") {
  const Pmf pi = Pmf::uniform(3);
  CHECK(tv_distance(collide(pi, pi), pi) == 0.0);

  const Pmf mono = Pmf::monochromatic(2);
  const Pmf mm = collide(mono, mono);
  const double expect[] = {3.0 / 8, 1.0 / 8, 1.0 / 8, 3.0 / 8};
  for (std::size_t x = 0; x < 4; ++x) {
    CHECK(mm[x] == doctest::Approx(expect[x]).epsilon(1e-15));
    CHECK(collide_direct(mono, mono)[x] == doctest::Approx(expect[x]).epsilon(1e-15));
  }
  const FourierTable fm = wht_forward(mono);
  const FourierTable c = collide(fm, fm);
  CHECK(c[1] == 0.0);
  CHECK(c[2] == 0.0);
  CHECK(c[3] == 0.5);
}

TEST_CASE("collision is commutative bit for bit") {
  RandomStream rng = rng_substream(11, 0);
  for (int k = 0; k < 50; ++k) {
    const int n = 1 + k % 9;
    const FourierTable a = wht_forward(random_pmf(n, rng)), b = wht_forward(random_pmf(n, rng));
    const FourierTable ab = collide(a, b), ba = collide(b, a);
    for (std::size_t s = 0; s < ab.size(); ++s) CHECK(ab[s] == ba[s]);
  }
}

TEST_CASE("direct oracle on 100 pairs and at n = 1") {
  RandomStream rng = rng_substream(12, 0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int n = 1 + k % 6;
    const Pmf mu = random_pmf(n, rng), nu = random_pmf(n, rng);
    const Pmf a = collide(mu, nu), b = collide_direct(mu, nu);
    for (std::size_t x = 0; x < a.size(); ++x) worst = std::max(worst, std::abs(a[x] - b[x]));
  }
  CHECK(worst <= 1e-12);

  const Pmf mu = random_pmf(1, rng), nu = random_pmf(1, rng);
  CHECK(marginal_bias(collide_direct(mu, nu), 1) ==
        doctest::Approx(0.5 * (marginal_bias(mu, 1) + marginal_bias(nu, 1))).epsilon(1e-14));
  CHECK_THROWS_AS(collide_direct(Pmf::uniform(kDirectCap + 1), Pmf::uniform(kDirectCap + 1)),
                  CapacityError);
  CHECK_THROWS_AS(collide(Pmf::uniform(2), Pmf::uniform(3)), DimensionMismatch);
}

TEST_CASE("collision preserves marginals and is not associative") {
  RandomStream rng = rng_substream(13, 0);
  const Pmf mu = random_pmf(5, rng);
  const Pmf nu = collide(mu, mu);
  for (int i = 1; i <= 5; ++i) CHECK(marginal_bias(nu, i) == doctest::Approx(marginal_bias(mu, i)).epsilon(1e-13));

  const FourierTable m = wht_forward(Pmf::monochromatic(2));
  const FourierTable mm = collide(m, m);
  CHECK(coeff12(collide(mm, mm)) == 0.25);
  CHECK(coeff12(collide(collide(mm, m), m)) == 11.0 / 32);
}

TEST_CASE("discrete evolution") {
  RandomStream rng = rng_substream(14, 0);
  const Pmf mu = random_pmf(4, rng);
  CHECK(tv_distance(evolve_discrete(mu, 0), mu) == 0.0);
  const FourierTable m = wht_forward(Pmf::monochromatic(2));
  for (int t = 0; t <= 12; ++t) {
    CHECK(coeff12(evolve_discrete(m, t)) == std::ldexp(1.0, -t));
    CHECK(tv_distance(evolve_discrete(Pmf::monochromatic(2), t), Pmf::uniform(2)) ==
          doctest::Approx(std::ldexp(1.0, -t - 1)).epsilon(1e-14));
  }
  // Evolution of a product measure is trivial.
  const Pmf prod = Pmf::product(std::vector<double>{0.2, -0.4, 0.6});
  CHECK(tv_distance(evolve_discrete(prod, 5), prod) < 1e-15);
}

TEST_CASE("quenched environments") {
  RandomStream rng = rng_substream(15, 0);
  const QuenchedEnvironment env = sample_quenched(Pmf::monochromatic(5), 3, rng);
  CHECK(env.leaves == 8);
  for (std::size_t x = 0; x < env.leaves; ++x)
    for (int i = 1; i < 5; ++i) CHECK(env.spin(x, i) == env.spin(x, 0));

  QuenchedEnvironment e;
  e.n = 2;
  e.leaves = 2;
  e.spins = {1, -1, 1, 1};
  refresh_frequencies(e);
  CHECK(e.q == std::vector<double>{1.0, 0.0});
  const Pmf qm = quenched_measure(e);
  CHECK(qm[0b01] == 0.5);
  CHECK(qm[0b11] == 0.5);

  QuenchedEnvironment h;
  h.n = 2;
  h.leaves = 4;
  // Frequencies q = (1/2, -1/2).
  h.spins = {1, -1, 1, -1, 1, 1, -1, -1};
  refresh_frequencies(h);
  const Pmf hm = quenched_measure(h);
  CHECK(hm[0] == doctest::Approx(3.0 / 16));
  CHECK(hm[1] == doctest::Approx(9.0 / 16));
  CHECK(hm[2] == doctest::Approx(1.0 / 16));
  CHECK(hm[3] == doctest::Approx(3.0 / 16));

  QuenchedEnvironment zero;
  zero.n = 3;
  zero.leaves = 2;
  zero.spins = {1, -1, 1, -1, 1, -1};
  refresh_frequencies(zero);
  CHECK(tv_distance(quenched_measure(zero), Pmf::uniform(3)) == 0.0);
}

TEST_CASE("quenched average reproduces the evolution") {
  RandomStream rng = rng_substream(16, 0);
  const Pmf mu = random_pmf(4, rng);
  const Pmf exact = evolve_discrete(mu, 3);
  const QuenchedAverage avg = quenched_average(mu, 3, 100000, StreamFamily{16, 1});
  for (std::size_t x = 0; x < exact.size(); ++x)
    CHECK(std::abs(avg.weights.mean[x] - exact[x]) <= 3 * avg.weights.std_error[x] + 1e-12);

  const Pmf bal = random_balanced_pmf(4, rng);
  const QuenchedAverage b = quenched_average(bal, 2, 20000, StreamFamily{16, 2});
  for (std::size_t i = 1; i <= 4; ++i) {
    const std::size_t s = std::size_t{1} << (i - 1);
    CHECK(std::abs(b.fourier.mean[s]) <= 3 * b.fourier.std_error[s] + 1e-12);
  }
}

TEST_CASE("fragmentation") {
  RandomStream rng = rng_substream(17, 0);
  CHECK(fragmentation_time(1, rng) == 0);

  constexpr int kRuns = 100000;
  std::vector<int> times2(kRuns), times8(kRuns);
  for (auto& x : times2) x = fragmentation_time(2, rng);
  for (auto& x : times8) x = fragmentation_time(8, rng);
  for (int t = 1; t <= 6; ++t) {
    const double p = std::ldexp(1.0, -t);
    const double hat = std::count_if(times2.begin(), times2.end(), [t](int x) { return x > t; }) /
                       static_cast<double>(kRuns);
    CHECK(std::abs(hat - p) <= 3 * std::sqrt(p * (1 - p) / kRuns));
  }
  for (int t = 1; t <= 12; ++t) {
    const double hat = std::count_if(times8.begin(), times8.end(), [t](int x) { return x > t; }) /
                       static_cast<double>(kRuns);
    // The union bound is tight as t grows, so allow for sampling noise.
    const double bound = 28 * std::ldexp(1.0, -t);
    CHECK(hat <= bound + 3 * std::sqrt(bound * (1 - std::min(bound, 1.0)) / kRuns));
  }

  FragmentationState s = fragmentation_start(3);
  CHECK_FALSE(s.fragmented());
  s = fragmentation_step(s, rng);
  CHECK(s.t == 1);
  for (auto u : s.labels) CHECK(u < 2);
}

TEST_CASE("exact monochromatic path") {
  CHECK(mono_mixture_tv(1, 5) < 1e-14);
  CHECK(mono_mixture_tv(2, 1) == doctest::Approx(0.25).epsilon(1e-14));
  for (int n : {1, 7, 100}) {
    for (int t : {0, 3, 9}) {
      const auto law = mono_count_law(n, t);
      CHECK(law.size() == static_cast<std::size_t>(n) + 1);
      CHECK(std::accumulate(law.begin(), law.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK(mono_mixture_tv(2000, 1) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK_THROWS_AS(mono_count_law(1 << 22, 40), CapacityError);
}

TEST_CASE("alpha and beta statistics") {
  const AlphaBeta z = alpha_beta(0.0, 5);
  CHECK(z.alpha == 0.0);
  CHECK(z.beta == 0.0);
  CHECK_FALSE(z.degenerate);
  CHECK(alpha_beta(1.0, 5).degenerate);
  const AlphaBeta h = alpha_beta(0.5, 4);
  CHECK(h.alpha == doctest::Approx(std::log(3.0)).epsilon(1e-14));
  CHECK(h.beta == doctest::Approx(2 * std::log(0.75)).epsilon(1e-14));
}

TEST_CASE("upper bounds") {
  const DiscreteBounds b = discrete_upper_bounds(8, 3);
  CHECK(b.s == 1.0);
  CHECK(b.sum_bound == 1.0);
  CHECK(b.pair_bound == 3.5);
  REQUIRE(b.large_s.has_value());
  CHECK(*b.large_s == doctest::Approx(1 - 0.5 * std::exp(-2.0)));
  CHECK_FALSE(discrete_upper_bounds(8, 5).large_s.has_value());
}
