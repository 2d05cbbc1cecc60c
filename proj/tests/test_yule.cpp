#include <doctest.h>

#include <cmath>
#include <vector>

#include "recomb/acceptance.hpp"
#include "recomb/discrete.hpp"
#include "recomb/errors.hpp"
#include "recomb/parallel.hpp"
#include "recomb/yule.hpp"

using namespace recomb;

namespace {

// Root 0 with children 1, 2; node 1 with children 3, 4; node 3 with 5, 6.
YuleTree left_comb_4() {
  return YuleTree::from_children({{1, 2}, {3, 4}, {-1, -1}, {5, 6}, {-1, -1}, {-1, -1}, {-1, -1}});
}

}  // namespace

TEST_CASE("Yule tree basics") {
  RandomStream rng = rng_substream(21, 0);
  const YuleTree root = sample_yule(0.0, rng);
  CHECK(root.leaf_count() == 1);
  CHECK(root.nodes.size() == 1);
  for (int k = 0; k < 100; ++k) {
    const YuleTree tr = sample_yule(3.0, rng);
    CHECK(leaf_weight_sum(tr) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(tr.nodes.size() == 2 * tr.leaf_count() - 1);
    for (std::size_t i = 1; i < tr.nodes.size(); ++i) {
      const YuleNode& v = tr.nodes[i];
      CHECK(v.birth_time >= tr.nodes[v.parent].birth_time);
      CHECK(v.birth_time <= 3.0);
      CHECK(v.depth == tr.nodes[v.parent].depth + 1);
    }
  }
  YuleCaps caps;
  caps.max_leaves = 16;
  CHECK_THROWS_AS(sample_yule(20.0, rng, caps), CapacityError);
  try {
    sample_yule(20.0, rng, caps);
  } catch (const CapacityError& e) {
    CHECK(e.partial().leaves >= 16);
  }
}

TEST_CASE("root survives with probability e^-t") {
  RandomStream rng = rng_substream(22, 0);
  constexpr int kRuns = 100000;
  int unsplit = 0;
  for (int k = 0; k < kRuns; ++k) unsplit += sample_yule(1.0, rng).leaf_count() == 1;
  const double p = std::exp(-1.0);
  CHECK(std::abs(unsplit / double(kRuns) - p) <= 3 * std::sqrt(p * (1 - p) / kRuns));
}

TEST_CASE("tree measure") {
  RandomStream rng = rng_substream(23, 0);
  const Pmf mu = random_pmf(3, rng);
  const YuleTree leaf = YuleTree::from_children({{-1, -1}});
  CHECK(tv_distance(tree_measure(leaf, mu), mu) < 1e-15);
  const YuleTree cherry = YuleTree::from_children({{1, 2}, {-1, -1}, {-1, -1}});
  CHECK(tv_distance(tree_measure(cherry, mu), collide(mu, mu)) < 1e-15);

  const FourierTable m = wht_forward(Pmf::monochromatic(2));
  CHECK(tree_measure(left_comb_4(), m)[3] == 11.0 / 32);
  CHECK(leaf_weight_sum(left_comb_4()) == 1.0);
}

TEST_CASE("continuous evolution") {
  const FourierTable u = FourierTable::uniform(3);
  const FourierTable eu = evolve_continuous(u, 2.0);
  for (std::size_t s = 0; s < u.size(); ++s) CHECK(eu[s] == u[s]);

  const FourierTable m = wht_forward(Pmf::monochromatic(2));
  for (double t : {0.5, 1.0, 3.0}) {
    const FourierTable e = evolve_continuous(m, t, 1e-3);
    CHECK(std::abs(e[3] - std::exp(-t / 2)) <= 1e-8);
    CHECK(std::abs(tv_distance(wht_inverse(e), Pmf::uniform(2)) - std::exp(-t / 2) / 2) <= 1e-8);
  }

  RandomStream rng = rng_substream(24, 0);
  for (int n = 2; n <= 6; ++n) {
    const FourierTable mu = wht_forward(random_pmf(n, rng));
    const FourierTable two = evolve_continuous(evolve_continuous(mu, 0.7, 1e-3), 1.1, 1e-3);
    const FourierTable one = evolve_continuous(mu, 1.8, 1e-3);
    for (std::size_t s = 0; s < mu.size(); ++s) {
      CHECK(std::abs(two[s] - one[s]) <= 1e-7);
      CHECK(std::abs(one[s]) <= 1.0);
    }
    CHECK(one[0] == 1.0);
  }
  CHECK_THROWS_AS(evolve_continuous(m, 1.0, 0.0), InvalidArgument);
}

TEST_CASE("Wild estimator") {
  RandomStream rng = rng_substream(25, 0);
  const Pmf mu = random_pmf(3, rng);
  const WildEstimate zero = wild_mc_estimate(mu, 0.0, 100, StreamFamily{25, 1});
  for (std::size_t x = 0; x < mu.size(); ++x) CHECK(zero.weights.mean[x] == doctest::Approx(mu[x]).epsilon(1e-14));

  const WildEstimate m =
      wild_mc_estimate(Pmf::monochromatic(2), 1.0, 20000, StreamFamily{25, 2});
  CHECK(std::abs(m.fourier.mean[3] - std::exp(-0.5)) <= 4 * m.fourier.std_error[3]);

  // Same stream family, different worker counts.
  const int threads = parallel::max_threads();
  parallel::set_threads(1);
  const WildEstimate a = wild_mc_estimate(mu, 1.5, 5000, StreamFamily{25, 3});
  parallel::set_threads(3);
  const WildEstimate b = wild_mc_estimate(mu, 1.5, 5000, StreamFamily{25, 3});
  parallel::set_threads(threads);
  CHECK(a.fourier.mean == b.fourier.mean);
  CHECK(a.fourier.std_error == b.fourier.std_error);
}

TEST_CASE("leaf walks hit x with probability 2^-|x|") {
  // Leaves at depth 1, 2, 3, 4, 4.
  const YuleTree tree = YuleTree::from_children(
      {{1, 2}, {-1, -1}, {3, 4}, {-1, -1}, {5, 6}, {-1, -1}, {7, 8}, {-1, -1}, {-1, -1}});
  RandomStream rng = rng_substream(26, 0);
  constexpr int kDraws = 100000;
  std::vector<int> hits(tree.nodes.size(), 0);
  for (int k = 0; k < kDraws; ++k) ++hits[sample_partition_on_tree(tree, 1, rng).leaf[0]];
  for (auto leaf : tree.leaves) {
    const double p = std::ldexp(1.0, -tree.nodes[leaf].depth);
    CHECK(std::abs(hits[leaf] / double(kDraws) - p) <= 3 * std::sqrt(p * (1 - p) / kDraws));
  }
}

TEST_CASE("tree quenched measure") {
  RandomStream rng = rng_substream(27, 0);
  const Pmf mu = random_pmf(3, rng);
  const YuleTree leaf = YuleTree::from_children({{-1, -1}});
  const QuenchedEnvironment env = sample_leaf_environment(leaf, mu, rng);
  const Pmf q = quenched_measure_ct(leaf, env);
  double top = 0.0;
  for (std::size_t x = 0; x < q.size(); ++x) top = std::max(top, q[x]);
  CHECK(top == 1.0);

  const Pmf mu3 = random_pmf(3, rng);
  const FourierTable exact = evolve_continuous(wht_forward(mu3), 1.0, 1e-3);
  const WildEstimate d = double_average_estimate(mu3, 1.0, 100000, StreamFamily{27, 1});
  for (std::size_t s = 0; s < exact.size(); ++s)
    CHECK(std::abs(d.fourier.mean[s] - exact[s]) <= 4 * d.fourier.std_error[s] + 1e-12);
}

TEST_CASE("continuous upper bounds") {
  const ContinuousBounds b = continuous_upper_bounds(10, 4.0);
  CHECK(b.sum_bound == doctest::Approx(10 * std::exp(-2.0)));
  CHECK(b.pair_bound == doctest::Approx(45 * std::exp(-2.0)));
}
