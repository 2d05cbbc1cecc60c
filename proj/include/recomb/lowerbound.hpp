#pragma once

// Block-monochromatic initial states and the lower-bound experiments
// built on squared block magnetizations.

#include <cstddef>
#include <vector>

#include "recomb/cube.hpp"
#include "recomb/rng.hpp"
#include "recomb/yule.hpp"

namespace recomb {

struct BlockSpec {
  long long p = 0;         // block size
  long long alpha = 0;     // number of full blocks
  long long leftover = 0;  // size of the final partial block

  long long n() const { return p * alpha + leftover; }
};

/// alpha = floor(n / p). Throws InvalidArgument if alpha < 1 or p < 1.
BlockSpec make_block_spec(long long n, long long p);
void validate(const BlockSpec& spec);

/// Monochromatic on each full block and on the leftover block,
/// independent across blocks. Kept structural; to_pmf materialises it for
/// n within the dense cap.
struct BlockProduct {
  BlockSpec spec;

  /// Sizes of the blocks in site order (leftover last, omitted if empty).
  std::vector<long long> block_sizes() const;
  Pmf to_pmf() const;
};
BlockProduct block_product_pmf(const BlockSpec& spec);

/// P(Bin(trials, prob) = k) for k = 0..trials, in log space.
std::vector<double> binomial_pmf(long long trials, double prob);

struct DiscreteLowerBound {
  BlockSpec spec;
  int t = 0;
  double mean_xi = 0.0;          // mu_t(Xi_1), from the exact block law
  double mean_xi_formula = 0.0;  // p(p-1) 2^-t + p
  double second_xi = 0.0;        // mu_t(Xi_1^2), exact
  double second_xi_formula = 0.0;
  double pz_ratio = 0.0;         // mu_t(Xi)^2 / (4 mu_t(Xi^2))
  double pi_block = 0.0;         // pi(Xi_1 >= 20p)
  double mu_block = 0.0;         // mu_t(Xi_1 >= 20p)
  long long threshold = 0;       // ceil(alpha / 15)
  double pi_a = 0.0;             // pi(Z >= alpha/15)
  double mu_a_c = 0.0;           // mu_t(Z < alpha/15)
  double bound = 0.0;            // 1 - pi_a - mu_a_c
  // Monte Carlo check of the second moment over quenched block samples.
  std::size_t mc_samples = 0;
  double mc_second_xi = 0.0;
  double mc_second_xi_se = 0.0;
};

/// p = 80 * 2^t. When mc_samples > 0 the second moment is also estimated
/// by sampling 2^t leaf spins and then the block spins given their mean.
DiscreteLowerBound lowerbound_experiment_discrete(long long n, int t, std::size_t mc_samples = 0,
                                                  const StreamFamily& streams = {});

struct ContinuousLowerBound {
  BlockSpec spec;
  double t = 0.0;
  double r = 0.0;                  // n e^{-t/2}
  double w_threshold = 0.0;        // (1 v log(1/t)) / alpha
  std::size_t trees = 0;
  std::size_t inner = 0;
  double pi_a = 0.0;
  double mu_a_c = 0.0;             // tree-averaged
  double mu_a_c_se = 0.0;
  double bound = 0.0;
  double z_law_tv = 0.0;           // TV between the laws of Z under mu_t and pi
  // Over all trees: violations of E_T[Xi^2] <= 3[(p-1)(r/alpha)W + p]^2.
  std::size_t second_moment_violations = 0;
  // Over trees with W >= w_threshold: minimum Paley-Zygmund ratio.
  double min_pz_ratio = 0.0;
  std::size_t trees_on_event = 0;
  // Largest |z| of the per-tree first-moment check over the checked trees.
  std::size_t first_moment_trees = 0;
  double max_first_moment_z = 0.0;
};

/// p = floor(sqrt(80 n) e^{t/4} (1 v log(1/t))^{-1/2}).
BlockSpec continuous_block_spec(long long n, double t);

ContinuousLowerBound lowerbound_experiment_continuous(long long n, double t, std::size_t trees,
                                                      std::size_t inner,
                                                      const StreamFamily& streams,
                                                      const YuleCaps& caps = {});

}  // namespace recomb
