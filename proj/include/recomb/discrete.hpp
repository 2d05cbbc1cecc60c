#pragma once

// Discrete-time recombination: collision products, the iterated dynamics,
// leaf environments, the fragmentation process and the exchangeable path
// for monochromatic initial states.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "recomb/cube.hpp"
#include "recomb/estimate.hpp"
#include "recomb/rng.hpp"

namespace recomb {

/// Fourier form: (mu o nu)^(S) = 2^-|S| sum_{T subset S} mu^(T) nu^(S\T).
FourierTable collide(const FourierTable& mu, const FourierTable& nu);
FourierTable collide_serial(const FourierTable& mu, const FourierTable& nu);
Pmf collide(const Pmf& mu, const Pmf& nu);

inline constexpr int kDirectCap = 10;

/// 2^-n sum_A mu_A (x) nu_{A^c}, by enumerating A and both marginals.
Pmf collide_direct(const Pmf& mu, const Pmf& nu);

/// t self-collisions.
FourierTable evolve_discrete(const FourierTable& mu, int t);
Pmf evolve_discrete(const Pmf& mu, int t);

inline constexpr int kMaxQuenchedSteps = 30;
/// Largest leaf_spins array (N * n entries) sample_quenched will allocate.
inline constexpr std::size_t kMaxEnvironmentEntries = std::size_t{1} << 28;

struct QuenchedEnvironment {
  int n = 0;
  std::size_t leaves = 0;            // N
  std::vector<std::int8_t> spins;    // row-major N x n, entries +-1
  std::vector<double> q;             // q(i) = N^-1 sum_x spins(x, i)

  int spin(std::size_t leaf, int site) const {
    return spins[leaf * static_cast<std::size_t>(n) + static_cast<std::size_t>(site)];
  }
};

/// Recomputes q from spins.
void refresh_frequencies(QuenchedEnvironment& env);

/// Product measure with biases q.
Pmf quenched_measure(const QuenchedEnvironment& env);
FourierTable quenched_fourier(const QuenchedEnvironment& env);

/// Draws 2^t iid configurations from mu.
QuenchedEnvironment sample_quenched(const Pmf& mu, int t, RandomStream& rng);

/// Inverse-CDF sampler over a Pmf.
class PmfSampler {
 public:
  explicit PmfSampler(const Pmf& mu);
  std::uint32_t operator()(RandomStream& rng) const;

 private:
  std::vector<double> cdf_;
};

/// Mean of the quenched measure over M environments; estimates both the
/// Fourier coefficients and the weights.
struct QuenchedAverage {
  TableEstimate fourier;
  TableEstimate weights;
};
QuenchedAverage quenched_average(const Pmf& mu, int t, std::size_t samples,
                                 const StreamFamily& streams);

inline constexpr int kMaxFragmentationSteps = 64;

struct FragmentationState {
  int t = 0;
  std::vector<std::uint64_t> labels;  // U_i; the block of site i at step t

  std::size_t blocks() const { return 1ull << t; }
  /// True iff no two sites share a label.
  bool fragmented() const;
};

FragmentationState fragmentation_start(int n);

/// U_i <- 2 U_i + [i in A] with A a uniform subset of [n].
FragmentationState fragmentation_step(FragmentationState state, RandomStream& rng);

/// First t at which every block holds at most one site.
int fragmentation_time(int n, RandomStream& rng);

/// Budget on n * (number of retained mixture components).
inline constexpr double kMixtureBudget = 1e9;

/// Law of the number of +1 spins under the t-step evolution of the
/// monochromatic measure on n sites.
std::vector<double> mono_count_law(int n, int t);

/// Exact TV distance between the t-step evolution of the monochromatic
/// measure and the uniform measure, for any n within budget.
double mono_mixture_tv(int n, int t);

struct AlphaBeta {
  double alpha = 0.0;
  double beta = 0.0;
  bool degenerate = false;
};
AlphaBeta alpha_beta(double qbar, int n);

struct DiscreteBounds {
  double sum_bound = 0.0;        // n 2^-t
  double pair_bound = 0.0;       // n(n-1) 2^-t / 2
  std::optional<double> large_s; // 1 - e^{-2s}/2, only when s >= log(2)/2
  double s = 0.0;
};
DiscreteBounds discrete_upper_bounds(int n, int t);

}  // namespace recomb
