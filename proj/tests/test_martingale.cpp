#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "recomb/errors.hpp"
#include "recomb/estimate.hpp"
#include "recomb/martingale.hpp"

using namespace recomb;

TEST_CASE("W on hand-made trees") {
  YuleTree single = YuleTree::from_children({{-1, -1}});
  single.horizon = 2.0;
  CHECK(martingale_W(single).W == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
  YuleTree cherry = YuleTree::from_children({{1, 2}, {-1, -1}, {-1, -1}});
  cherry.horizon = 2.0;
  CHECK(martingale_W(cherry).W == doctest::Approx(std::exp(1.0) / 2).epsilon(1e-15));

  RandomStream rng = rng_substream(31, 0);
  CHECK(sample_w(0.0, rng).W == 1.0);
}

TEST_CASE("W_t has mean one") {
  const auto s = w_samples(5.0, 100000, StreamFamily{31, 1});
  ScalarAccumulator acc;
  for (const auto& x : s) acc.add(x.W);
  CHECK(std::abs(acc.mean() - 1.0) <= 4 * acc.std_error());
}

TEST_CASE("P(W_t < 1) for t <= 1") {
  for (double t : {0.5, 1.0}) {
    const auto w = w_values(w_samples(t, 100000, StreamFamily{32, static_cast<std::uint64_t>(t * 10)}));
    const TailEstimate e = w_tail_probability(w, 1.0, true);
    const double p = 1 - std::exp(-t);
    CHECK(std::abs(e.p - p) <= 3 * std::sqrt(p * (1 - p) / e.samples));
    CHECK(e.lo <= e.p);
    CHECK(e.p <= e.hi);
  }
}

TEST_CASE("leaf cap is reported") {
  YuleCaps caps;
  caps.max_leaves = 64;
  CHECK_THROWS_AS(w_samples(30.0, 100, StreamFamily{33, 0}, caps), CapacityError);
}

TEST_CASE("closure sampler for W_inf") {
  const auto s = w_infinity_samples(10000, StreamFamily{34, 0});
  ScalarAccumulator acc;
  for (const auto& x : s) {
    CHECK(x.W > 0.0);
    acc.add(x.W);
  }
  CHECK(std::abs(acc.mean() - 1.0) <= 4 * acc.std_error());

  const auto again = w_infinity_samples(100, StreamFamily{34, 0});
  for (std::size_t i = 0; i < again.size(); ++i) CHECK(again[i].W == s[i].W);

  // The surrogate has converged by T = 30: extending it to 40 is invisible.
  ClosureOptions at40;
  at40.horizon = 40.0;
  const auto w30 = w_values(w_infinity_samples(4000, StreamFamily{35, 0}));
  const auto w40 = w_values(w_infinity_samples(4000, StreamFamily{35, 1}, at40));
  CHECK(ks_statistic(w30, w40) < ks_critical_99(w30.size(), w40.size()));
}

TEST_CASE("tail estimates") {
  const std::vector<double> w{0.1, 0.2, 0.5, 1.0, 2.0};
  CHECK(w_tail_probability(w, 0.5).hits == 3);
  CHECK(w_tail_probability(w, 0.5, true).hits == 2);
  double prev = 0.0;
  for (double e : {0.05, 0.15, 0.3, 0.7, 1.5, 3.0}) {
    const double p = w_tail_probability(w, e).p;
    CHECK(p >= prev);
    prev = p;
  }
  CHECK_THROWS_AS(w_tail_probability(std::vector<double>{}, 0.5), InvalidArgument);
}

TEST_CASE("Kolmogorov-Smirnov statistic") {
  CHECK(ks_statistic({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(ks_statistic({1, 2}, {3, 4}) == 1.0);
  CHECK(ks_statistic({1, 3}, {2, 4}) == doctest::Approx(0.5));
  CHECK(ks_critical_99(100, 100) == doctest::Approx(1.628 * std::sqrt(0.02)));
}

TEST_CASE("Poisson paths and the spine identity") {
  RandomStream rng = rng_substream(36, 0);
  ScalarAccumulator count;
  for (int k = 0; k < 20000; ++k) {
    const SpinePath p = sample_poisson_path(0.5, 4.0, rng);
    CHECK(std::is_sorted(p.jump_times.begin(), p.jump_times.end()));
    CHECK(p.count(4.0) == p.jump_times.size());
    count.add(static_cast<double>(p.count(2.0)));
  }
  CHECK(std::abs(count.mean() - 1.0) <= 4 * count.std_error());

  const SpinalReport r = spinal_identity_check(1.0, 20000, StreamFamily{36, 1});
  CHECK(r.pass);
  CHECK(r.functionals.size() == 5);
  for (const auto& f : r.functionals) CHECK(std::abs(f.z_exact) <= 4.0);
}
