#pragma once

// The additive martingale W_t = e^{t/2} sum_{leaves x} 4^-|x| of the Yule
// tree, its long-time surrogates, tail estimates and the spinal identity.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "recomb/rng.hpp"
#include "recomb/yule.hpp"

namespace recomb {

struct MartingaleSample {
  double t = 0.0;
  double W = 0.0;
  std::size_t leaf_count = 0;
};

MartingaleSample martingale_W(const YuleTree& tree);

/// One W_t draw by depth-first growth; no tree is stored. Consumes the
/// stream in a fixed order, so it is reproducible but not the same draw
/// as martingale_W(sample_yule(t, rng)).
MartingaleSample sample_w(double t, RandomStream& rng, const YuleCaps& caps = {});

/// M draws of W_t, chunked over substreams.
std::vector<MartingaleSample> w_samples(double t, std::size_t samples,
                                        const StreamFamily& streams, const YuleCaps& caps = {});

/// Long-horizon surrogate for W_infinity. A subtree rooted at x born at
/// time b contributes 4^-|x| e^{b/2} W' to W_T with W' an independent
/// copy of W_{T-b}; once that prefactor falls below delta the subtree is
/// replaced by its mean. The surrogate has the same mean as W_T.
struct ClosureOptions {
  double horizon = 30.0;
  double delta = 1e-4;
  std::size_t max_nodes = std::size_t{1} << 26;
};

struct ClosureSample {
  double W = 0.0;
  std::size_t leaves = 0;      // tips still alive at the horizon
  std::size_t closed = 0;      // subtrees replaced by their mean
  double closed_mass = 0.0;    // their share of W
};

ClosureSample sample_w_closure(const ClosureOptions& options, RandomStream& rng);

std::vector<ClosureSample> w_infinity_samples(std::size_t samples, const StreamFamily& streams,
                                              const ClosureOptions& options = {});

std::vector<double> w_values(std::span<const MartingaleSample> samples);
std::vector<double> w_values(std::span<const ClosureSample> samples);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Asymptotic 99% critical value 1.628 sqrt((n + m) / (n m)).
double ks_critical_99(std::size_t n, std::size_t m);

struct TailEstimate {
  double epsilon = 0.0;
  std::size_t hits = 0;
  std::size_t samples = 0;
  double p = 0.0;
  double std_error = 0.0;
  double lo = 0.0;  // 95% Wilson interval
  double hi = 0.0;
};

/// Empirical P(W <= epsilon) (or P(W < epsilon) when strict).
TailEstimate w_tail_probability(std::span<const double> w, double epsilon, bool strict = false);

struct SpinePath {
  double horizon = 0.0;
  std::vector<double> jump_times;

  /// Number of jumps in [0, s].
  std::size_t count(double s) const;
};

SpinePath sample_poisson_path(double rate, double horizon, RandomStream& rng);

struct SpinalFunctional {
  std::string name;
  double reweighted_mean = 0.0;
  double reweighted_se = 0.0;
  double direct_mean = 0.0;
  double direct_se = 0.0;
  double exact = 0.0;
  double z_two_sample = 0.0;
  double z_exact = 0.0;
  bool pass = false;
};

struct SpinalReport {
  double t = 0.0;
  std::size_t samples = 0;
  std::vector<SpinalFunctional> functionals;
  bool pass = false;
};

/// Compares E[e^{t/2} 2^{-X_t} G(X)] for a rate-1 Poisson path X against
/// E[G(Y)] for a rate-1/2 path Y on the functional library
/// {1, X_t, 1{X_{t/2} = 0}, X_{t/4}, exp(-X_{t/2})}. Each functional
/// passes when the two-sample z-score and the z-score against the
/// closed form are both within 4.
SpinalReport spinal_identity_check(double t, std::size_t samples, const StreamFamily& streams);

}  // namespace recomb
