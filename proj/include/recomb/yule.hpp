#pragma once

// Continuous-time recombination: Yule trees, tree measures, the Fourier
// ODE and tree-based Monte Carlo estimators.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "recomb/cube.hpp"
#include "recomb/discrete.hpp"
#include "recomb/estimate.hpp"
#include "recomb/rng.hpp"

namespace recomb {

struct YuleNode {
  std::int32_t parent = -1;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double birth_time = 0.0;
  int depth = 0;

  bool is_leaf() const { return left < 0; }
};

struct YuleTree {
  double horizon = 0.0;
  std::vector<YuleNode> nodes;      // nodes[0] is the root
  std::vector<std::int32_t> leaves; // in creation order

  std::size_t leaf_count() const { return leaves.size(); }
  /// Builds a tree from its shape alone (birth times set to the depth);
  /// used for hand-made examples. children[i] is {-1,-1} for a leaf.
  static YuleTree from_children(const std::vector<std::pair<int, int>>& children);
};

struct YuleCaps {
  std::size_t max_leaves = std::size_t{1} << 22;
};

YuleTree sample_yule(double t, RandomStream& rng, const YuleCaps& caps = {});

/// sum over leaves of 2^-|x|, compensated.
double leaf_weight_sum(const YuleTree& tree);

/// Evaluates the tree: leaves carry mu, internal nodes the collision of
/// their children.
FourierTable tree_measure(const YuleTree& tree, const FourierTable& mu);
Pmf tree_measure(const YuleTree& tree, const Pmf& mu);

inline constexpr double kDefaultStep = 0.01;

/// Classical RK4 on d/dt c = c o c - c with c(empty) held at 1. The step
/// is h, shortened uniformly when h does not divide t. Throws
/// InvariantViolation if any coefficient leaves [-1 - 1e-9, 1 + 1e-9].
FourierTable evolve_continuous(const FourierTable& mu, double t, double h = kDefaultStep);
Pmf evolve_continuous(const Pmf& mu, double t, double h = kDefaultStep);

/// Average of tree_measure over M sampled trees.
struct WildEstimate {
  TableEstimate fourier;
  TableEstimate weights;
  std::size_t max_leaves_seen = 0;
};
WildEstimate wild_mc_estimate(const Pmf& mu, double t, std::size_t samples,
                              const StreamFamily& streams, const YuleCaps& caps = {});

/// leaf[i] is the leaf reached by site i's fair walk from the root.
struct LeafAssignment {
  std::vector<std::int32_t> leaf;
};
LeafAssignment sample_partition_on_tree(const YuleTree& tree, int n, RandomStream& rng);

/// Leaf-indexed iid samples from mu: spins[k * n + i] for the k-th leaf of
/// tree.leaves.
QuenchedEnvironment sample_leaf_environment(const YuleTree& tree, const Pmf& mu,
                                            RandomStream& rng);

/// Biases q(i) = sum_x 2^-|x| xi_i(x) over the tree leaves.
std::vector<double> tree_frequencies(const YuleTree& tree, const QuenchedEnvironment& env);

/// Product measure with biases tree_frequencies(tree, env).
Pmf quenched_measure_ct(const YuleTree& tree, const QuenchedEnvironment& env);
FourierTable quenched_fourier_ct(const YuleTree& tree, const QuenchedEnvironment& env);

/// Average of the tree quenched measure over both the tree and the leaf
/// environment.
WildEstimate double_average_estimate(const Pmf& mu, double t, std::size_t samples,
                                     const StreamFamily& streams, const YuleCaps& caps = {});

struct ContinuousBounds {
  double sum_bound = 0.0;   // n e^{-t/2}
  double pair_bound = 0.0;  // n(n-1) e^{-t/2} / 2
};
ContinuousBounds continuous_upper_bounds(int n, double t);

}  // namespace recomb
