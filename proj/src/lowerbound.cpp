#include "recomb/lowerbound.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "recomb/discrete.hpp"
#include "recomb/errors.hpp"
#include "recomb/estimate.hpp"
#include "recomb/kernels.hpp"
#include "recomb/parallel.hpp"

namespace recomb {
namespace {

// Xi >= 20p for a block magnetization M = 2m - p, in exact integers.
bool xi_event(long long p, long long m) {
  const long long mag = 2 * m - p;
  return mag * mag >= 20 * p;
}

double pow4(double x) { return (x * x) * (x * x); }

// P(Z >= k) and the full law of Z ~ Bin(alpha, prob).
double binomial_upper_tail(long long trials, double prob, long long k) {
  const std::vector<double> pmf = binomial_pmf(trials, prob);
  kernels::CompensatedSum acc;
  for (long long j = std::max(0ll, k); j <= trials; ++j) acc.add(pmf[j]);
  return std::clamp(acc.value(), 0.0, 1.0);
}

double event_probability(long long p, const std::vector<double>& law) {
  kernels::CompensatedSum acc;
  for (long long m = 0; m <= p; ++m)
    if (xi_event(p, m)) acc.add(law[m]);
  return std::clamp(acc.value(), 0.0, 1.0);
}

// Second moment of Xi for a block of p spins that are iid given bias qbar,
// averaged over qbar with the given moments.
double second_moment(double p, double q2, double q4) {
  return p * (p - 1) * (p - 2) * (p - 3) * q4 + (6 * p * (p - 1) * (p - 2) + 4 * p * (p - 1)) * q2 +
         3 * p * (p - 1) + p;
}

long long block_count(double mean_bias, long long p, RandomStream& rng) {
  const double up = 0.5 * (1.0 + mean_bias);
  long long plus = 0;
  for (long long j = 0; j < p; ++j) plus += rng.uniform() < up;
  return plus;
}

}  // namespace

BlockSpec make_block_spec(long long n, long long p) {
  if (p < 1) throw InvalidArgument("block spec: p must be positive");
  BlockSpec s{p, n / p, n % p};
  validate(s);
  return s;
}

void validate(const BlockSpec& spec) {
  if (spec.p < 1 || spec.alpha < 1 || spec.leftover < 0 || spec.leftover >= spec.p)
    throw InvalidArgument("block spec: need p >= 1, alpha >= 1 and 0 <= leftover < p (p=" +
                          std::to_string(spec.p) + ", alpha=" + std::to_string(spec.alpha) +
                          ", leftover=" + std::to_string(spec.leftover) + ")");
}

std::vector<long long> BlockProduct::block_sizes() const {
  std::vector<long long> sizes(static_cast<std::size_t>(spec.alpha), spec.p);
  if (spec.leftover > 0) sizes.push_back(spec.leftover);
  return sizes;
}

Pmf BlockProduct::to_pmf() const {
  const long long n = spec.n();
  if (n > kDenseCap) throw CapacityError("block product: n=" + std::to_string(n) + " is not dense");
  check_dense_dimension(static_cast<int>(n));
  std::vector<double> w(std::size_t{1} << n, 0.0);
  const auto sizes = block_sizes();
  const std::size_t patterns = std::size_t{1} << sizes.size();
  const double mass = std::ldexp(1.0, -static_cast<int>(sizes.size()));
  for (std::size_t pat = 0; pat < patterns; ++pat) {
    std::uint32_t bits = 0;
    int offset = 0;
    for (std::size_t b = 0; b < sizes.size(); ++b) {
      if ((pat >> b) & 1u) bits |= ((std::uint32_t{1} << sizes[b]) - 1) << offset;
      offset += static_cast<int>(sizes[b]);
    }
    w[bits] += mass;
  }
  return Pmf(static_cast<int>(n), std::move(w));
}

BlockProduct block_product_pmf(const BlockSpec& spec) {
  validate(spec);
  return {spec};
}

std::vector<double> binomial_pmf(long long trials, double prob) {
  if (trials < 0 || !(prob >= 0.0 && prob <= 1.0))
    throw InvalidArgument("binomial_pmf: need trials >= 0 and prob in [0, 1]");
  std::vector<double> pmf(static_cast<std::size_t>(trials) + 1, 0.0);
  if (prob == 0.0) {
    pmf.front() = 1.0;
    return pmf;
  }
  if (prob == 1.0) {
    pmf.back() = 1.0;
    return pmf;
  }
  const double lp = std::log(prob), lq = std::log1p(-prob);
  const double lg = std::lgamma(static_cast<double>(trials) + 1.0);
  for (long long k = 0; k <= trials; ++k) {
    const double kk = static_cast<double>(k);
    pmf[k] = std::exp(lg - std::lgamma(kk + 1.0) -
                      std::lgamma(static_cast<double>(trials - k) + 1.0) + kk * lp +
                      static_cast<double>(trials - k) * lq);
  }
  return pmf;
}

DiscreteLowerBound lowerbound_experiment_discrete(long long n, int t, std::size_t mc_samples,
                                                  const StreamFamily& streams) {
  if (t < 0 || t > 20) throw InvalidArgument("lowerbound_discrete: t outside [0, 20]");
  DiscreteLowerBound r;
  r.t = t;
  const long long p = 80ll << t;
  if (n < p)
    throw InvalidArgument("lowerbound_discrete: n=" + std::to_string(n) +
                          " is smaller than one block of 80 * 2^t = " + std::to_string(p));
  r.spec = make_block_spec(n, p);
  const double pd = static_cast<double>(p);
  const double inv_n = std::ldexp(1.0, -t);

  const std::vector<double> law = mono_count_law(static_cast<int>(p), t);
  kernels::CompensatedSum m1, m2;
  for (long long m = 0; m <= p; ++m) {
    const double mag2 = static_cast<double>((2 * m - p) * (2 * m - p));
    m1.add(law[m] * mag2);
    m2.add(law[m] * mag2 * mag2);
  }
  r.mean_xi = m1.value();
  r.second_xi = m2.value();
  r.mean_xi_formula = pd * (pd - 1) * inv_n + pd;
  const double q4 = 3 * inv_n * inv_n * (1 - inv_n) + inv_n * inv_n * inv_n;
  r.second_xi_formula = second_moment(pd, inv_n, q4);
  r.pz_ratio = r.mean_xi * r.mean_xi / (4 * r.second_xi);

  r.pi_block = event_probability(p, binomial_pmf(p, 0.5));
  r.mu_block = event_probability(p, law);
  r.threshold = (r.spec.alpha + 14) / 15;
  r.pi_a = binomial_upper_tail(r.spec.alpha, r.pi_block, r.threshold);
  r.mu_a_c = 1.0 - binomial_upper_tail(r.spec.alpha, r.mu_block, r.threshold);
  r.bound = 1.0 - r.pi_a - r.mu_a_c;

  if (mc_samples > 0) {
    const long long leaves = 1ll << t;
    const std::size_t tasks = parallel::chunk_count(mc_samples);
    auto parts = parallel::map_tasks<ScalarAccumulator>(tasks, [&](std::size_t task) {
      RandomStream rng = streams.stream(task);
      ScalarAccumulator acc;
      const std::size_t begin = task * parallel::kChunk;
      const std::size_t end = std::min(mc_samples, begin + parallel::kChunk);
      for (std::size_t k = begin; k < end; ++k) {
        long long plus = 0;
        for (long long x = 0; x < leaves; ++x) plus += rng.coin();
        const double qbar = static_cast<double>(2 * plus - leaves) / static_cast<double>(leaves);
        const long long b = block_count(qbar, p, rng);
        acc.add(pow4(static_cast<double>(2 * b - p)));
      }
      return acc;
    });
    ScalarAccumulator total;
    for (const auto& a : parts) total.merge(a);
    r.mc_samples = mc_samples;
    r.mc_second_xi = total.mean();
    r.mc_second_xi_se = total.std_error();
  }
  return r;
}

BlockSpec continuous_block_spec(long long n, double t) {
  if (!(t > 0.0)) throw InvalidArgument("continuous block spec: t must be positive");
  const double factor = std::max(1.0, std::log(1.0 / t));
  const long long p = static_cast<long long>(
      std::floor(std::sqrt(80.0 * static_cast<double>(n)) * std::exp(0.25 * t) / std::sqrt(factor)));
  if (p < 2) throw InvalidArgument("continuous block spec: p=" + std::to_string(p) + " < 2");
  if (p > n)
    throw InvalidArgument("continuous block spec: block size " + std::to_string(p) +
                          " exceeds n=" + std::to_string(n));
  return make_block_spec(n, p);
}

ContinuousLowerBound lowerbound_experiment_continuous(long long n, double t, std::size_t trees,
                                                      std::size_t inner,
                                                      const StreamFamily& streams,
                                                      const YuleCaps& caps) {
  if (trees == 0 || inner == 0)
    throw InvalidArgument("lowerbound_continuous: trees and inner must be positive");
  ContinuousLowerBound r;
  r.t = t;
  r.spec = continuous_block_spec(n, t);
  r.trees = trees;
  r.inner = inner;
  const long long p = r.spec.p, alpha = r.spec.alpha;
  const double pd = static_cast<double>(p);
  r.r = static_cast<double>(n) * std::exp(-0.5 * t);
  r.w_threshold = std::max(1.0, std::log(1.0 / t)) / static_cast<double>(alpha);
  const long long threshold = (alpha + 14) / 15;

  const double pi_block = event_probability(p, binomial_pmf(p, 0.5));
  r.pi_a = binomial_upper_tail(alpha, pi_block, threshold);
  const std::vector<double> pi_z = binomial_pmf(alpha, pi_block);

  constexpr std::size_t kFirstMomentTrees = 16;
  constexpr std::size_t kFirstMomentDraws = 4000;

  struct Partial {
    ScalarAccumulator mu_a_c;
    std::vector<kernels::CompensatedSum> z_law;
    std::size_t violations = 0;
    std::size_t on_event = 0;
    double min_pz = INFINITY;
    std::size_t first_checked = 0;
    double max_first_z = 0.0;
  };
  const std::size_t tasks = parallel::chunk_count(trees);
  auto parts = parallel::map_tasks<Partial>(tasks, [&](std::size_t task) {
    RandomStream rng = streams.stream(task);
    Partial part;
    part.z_law.resize(static_cast<std::size_t>(alpha) + 1);
    const std::size_t begin = task * parallel::kChunk;
    const std::size_t end = std::min(trees, begin + parallel::kChunk);
    for (std::size_t k = begin; k < end; ++k) {
      const YuleTree tree = sample_yule(t, rng, caps);
      std::vector<double> w;
      w.reserve(tree.leaf_count());
      kernels::CompensatedSum s2, s4;
      for (auto x : tree.leaves) {
        const double wx = std::ldexp(1.0, -tree.nodes[x].depth);
        w.push_back(wx);
        s2.add(wx * wx);
        s4.add(pow4(wx));
      }
      const double q2 = s2.value();
      const double q4 = 3 * q2 * q2 - 2 * s4.value();
      const double big_w = std::exp(0.5 * t) * q2;
      const double first = pd * (pd - 1) * q2 + pd;
      const double second = second_moment(pd, q2, q4);
      const double cap = (pd - 1) * (r.r / static_cast<double>(alpha)) * big_w + pd;
      if (second > 3 * cap * cap) ++part.violations;
      if (big_w >= r.w_threshold) {
        ++part.on_event;
        part.min_pz = std::min(part.min_pz, first * first / (4 * second));
      }
      auto draw_bias = [&] {
        kernels::CompensatedSum q;
        for (double wx : w) q.add(rng.coin() ? wx : -wx);
        return std::clamp(q.value(), -1.0, 1.0);
      };
      if (k < kFirstMomentTrees) {
        ScalarAccumulator xi;
        for (std::size_t j = 0; j < kFirstMomentDraws; ++j) {
          const long long b = block_count(draw_bias(), p, rng);
          const double mag = static_cast<double>(2 * b - p);
          xi.add(mag * mag);
        }
        ++part.first_checked;
        part.max_first_z =
            std::max(part.max_first_z, std::abs(xi.mean() - first) / xi.std_error());
      }
      // Given the tree the blocks are iid; Z given the block biases is
      // Poisson-binomial with the exact per-block event probabilities.
      std::vector<double> tree_law(static_cast<std::size_t>(alpha) + 1, 0.0);
      for (std::size_t j = 0; j < inner; ++j) {
        std::vector<double> law(static_cast<std::size_t>(alpha) + 1, 0.0);
        law[0] = 1.0;
        for (long long i = 0; i < alpha; ++i) {
          const double prob =
              event_probability(p, binomial_pmf(p, 0.5 * (1.0 + draw_bias())));
          for (long long z = i + 1; z >= 1; --z) law[z] = law[z] * (1 - prob) + law[z - 1] * prob;
          law[0] *= 1 - prob;
        }
        for (long long z = 0; z <= alpha; ++z) tree_law[z] += law[z] / static_cast<double>(inner);
      }
      double miss = 0.0;
      for (long long z = 0; z < threshold; ++z) miss += tree_law[z];
      part.mu_a_c.add(miss);
      for (long long z = 0; z <= alpha; ++z) part.z_law[z].add(tree_law[z]);
    }
    return part;
  });
  ScalarAccumulator mu_a_c;
  std::vector<double> z_law(static_cast<std::size_t>(alpha) + 1, 0.0);
  r.min_pz_ratio = INFINITY;
  for (const auto& part : parts) {
    mu_a_c.merge(part.mu_a_c);
    for (long long z = 0; z <= alpha; ++z) z_law[z] += part.z_law[z].value();
    r.second_moment_violations += part.violations;
    r.trees_on_event += part.on_event;
    r.min_pz_ratio = std::min(r.min_pz_ratio, part.min_pz);
    r.first_moment_trees += part.first_checked;
    r.max_first_moment_z = std::max(r.max_first_moment_z, part.max_first_z);
  }
  r.mu_a_c = mu_a_c.mean();
  r.mu_a_c_se = mu_a_c.std_error();
  r.bound = 1.0 - r.pi_a - r.mu_a_c;
  kernels::CompensatedSum tv;
  for (long long z = 0; z <= alpha; ++z)
    tv.add(std::abs(z_law[z] / static_cast<double>(trees) - pi_z[z]));
  r.z_law_tv = 0.5 * tv.value();
  return r;
}

}  // namespace recomb
