#include "recomb/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "recomb/errors.hpp"
#include "recomb/kernels.hpp"
#include "recomb/parallel.hpp"

namespace recomb {
namespace {

void check_same_n(int a, int b, const char* what) {
  if (a != b)
    throw DimensionMismatch(std::string(what) + ": n=" + std::to_string(a) + " vs n=" +
                            std::to_string(b));
}

double log_choose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}


}  // namespace

FourierTable collide(const FourierTable& mu, const FourierTable& nu) {
  check_same_n(mu.n(), nu.n(), "collide");
  std::vector<double> out(mu.size());
  kernels::collision(mu.coeffs(), nu.coeffs(), out, mu.n());
  out[0] = 1.0;
  return FourierTable::trusted(mu.n(), std::move(out));
}

FourierTable collide_serial(const FourierTable& mu, const FourierTable& nu) {
  check_same_n(mu.n(), nu.n(), "collide");
  std::vector<double> out(mu.size());
  kernels::collision_serial(mu.coeffs(), nu.coeffs(), out, mu.n());
  out[0] = 1.0;
  return FourierTable::trusted(mu.n(), std::move(out));
}

Pmf collide(const Pmf& mu, const Pmf& nu) {
  return wht_inverse(collide(wht_forward(mu), wht_forward(nu)));
}

Pmf collide_direct(const Pmf& mu, const Pmf& nu) {
  check_same_n(mu.n(), nu.n(), "collide_direct");
  const int n = mu.n();
  if (n > kDirectCap)
    throw CapacityError("collide_direct: n=" + std::to_string(n) + " exceeds " +
                        std::to_string(kDirectCap));
  const std::uint32_t size = std::uint32_t{1} << n;
  const std::uint32_t full = size - 1;
  std::vector<double> out(size, 0.0);
  std::vector<double> mu_a(size), nu_ac(size);
  for (std::uint32_t a = 0; a < size; ++a) {
    const std::uint32_t ac = full ^ a;
    std::fill(mu_a.begin(), mu_a.end(), 0.0);
    std::fill(nu_ac.begin(), nu_ac.end(), 0.0);
    for (std::uint32_t s = 0; s < size; ++s) {
      mu_a[s & a] += mu[s];
      nu_ac[s & ac] += nu[s];
    }
    for (std::uint32_t s = 0; s < size; ++s) out[s] += mu_a[s & a] * nu_ac[s & ac];
  }
  for (double& w : out) w = std::ldexp(w, -n);
  return Pmf::from_rounded(n, std::move(out));
}

FourierTable evolve_discrete(const FourierTable& mu, int t) {
  if (t < 0) throw InvalidArgument("evolve_discrete: t must be non-negative");
  FourierTable cur = mu;
  for (int k = 0; k < t; ++k) cur = collide(cur, cur);
  return cur;
}

Pmf evolve_discrete(const Pmf& mu, int t) {
  if (t == 0) return mu;
  return wht_inverse(evolve_discrete(wht_forward(mu), t));
}

void refresh_frequencies(QuenchedEnvironment& env) {
  env.q.assign(static_cast<std::size_t>(env.n), 0.0);
  std::vector<long long> count(static_cast<std::size_t>(env.n), 0);
  for (std::size_t x = 0; x < env.leaves; ++x)
    for (int i = 0; i < env.n; ++i) count[i] += env.spin(x, i);
  for (int i = 0; i < env.n; ++i)
    env.q[i] = static_cast<double>(count[i]) / static_cast<double>(env.leaves);
}

Pmf quenched_measure(const QuenchedEnvironment& env) { return Pmf::product(env.q); }

FourierTable quenched_fourier(const QuenchedEnvironment& env) {
  check_dense_dimension(env.n);
  std::vector<double> c(std::size_t{1} << env.n);
  c[0] = 1.0;
  for (std::size_t s = 1; s < c.size(); ++s) {
    const std::size_t low = s & (~s + 1);
    c[s] = c[s ^ low] * env.q[std::countr_zero(low)];
  }
  return FourierTable::trusted(env.n, std::move(c));
}

PmfSampler::PmfSampler(const Pmf& mu) : cdf_(mu.size()) {
  kernels::CompensatedSum acc;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    acc.add(mu[i]);
    cdf_[i] = acc.value();
  }
  // Normalise away the residual mass error so the last bucket always catches u.
  const double total = cdf_.back();
  for (double& c : cdf_) c /= total;
  cdf_.back() = 1.0;
}

std::uint32_t PmfSampler::operator()(RandomStream& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<std::uint32_t>(std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1));
}

QuenchedEnvironment sample_quenched(const Pmf& mu, int t, RandomStream& rng) {
  if (t < 0 || t > kMaxQuenchedSteps)
    throw CapacityError("sample_quenched: t=" + std::to_string(t) + " outside [0, " +
                        std::to_string(kMaxQuenchedSteps) + "]");
  QuenchedEnvironment env;
  env.n = mu.n();
  env.leaves = std::size_t{1} << t;
  if (env.leaves * static_cast<std::size_t>(env.n) > kMaxEnvironmentEntries)
    throw CapacityError("sample_quenched: environment of " + std::to_string(env.leaves) +
                        " x " + std::to_string(env.n) + " spins exceeds the memory cap");
  const PmfSampler draw(mu);
  env.spins.resize(env.leaves * static_cast<std::size_t>(env.n));
  for (std::size_t x = 0; x < env.leaves; ++x) {
    const std::uint32_t bits = draw(rng);
    for (int i = 0; i < env.n; ++i)
      env.spins[x * static_cast<std::size_t>(env.n) + static_cast<std::size_t>(i)] =
          ((bits >> i) & 1u) ? 1 : -1;
  }
  refresh_frequencies(env);
  return env;
}

QuenchedAverage quenched_average(const Pmf& mu, int t, std::size_t samples,
                                 const StreamFamily& streams) {
  if (samples == 0) throw InvalidArgument("quenched_average: need at least one sample");
  struct Partial {
    TableAccumulator fourier, weights;
  };
  const std::size_t tasks = parallel::chunk_count(samples);
  auto parts = parallel::map_tasks<Partial>(tasks, [&](std::size_t task) {
    RandomStream rng = streams.stream(task);
    Partial p{TableAccumulator(mu.size()), TableAccumulator(mu.size())};
    const std::size_t begin = task * parallel::kChunk;
    const std::size_t end = std::min(samples, begin + parallel::kChunk);
    for (std::size_t k = begin; k < end; ++k) {
      const QuenchedEnvironment env = sample_quenched(mu, t, rng);
      const Pmf q = quenched_measure(env);
      p.weights.add(std::vector<double>(q.weights().begin(), q.weights().end()));
      const FourierTable f = quenched_fourier(env);
      p.fourier.add(std::vector<double>(f.coeffs().begin(), f.coeffs().end()));
    }
    return p;
  });
  Partial total{TableAccumulator(mu.size()), TableAccumulator(mu.size())};
  for (const auto& p : parts) {
    total.fourier.merge(p.fourier);
    total.weights.merge(p.weights);
  }
  return {total.fourier.finish(mu.n()), total.weights.finish(mu.n())};
}

bool FragmentationState::fragmented() const {
  std::vector<std::uint64_t> sorted = labels;
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
}

FragmentationState fragmentation_start(int n) {
  if (n < 1) throw InvalidArgument("fragmentation: n must be positive");
  FragmentationState s;
  s.labels.assign(static_cast<std::size_t>(n), 0);
  return s;
}

FragmentationState fragmentation_step(FragmentationState state, RandomStream& rng) {
  if (state.t >= kMaxFragmentationSteps)
    throw CapacityError("fragmentation: labels exhausted after " +
                        std::to_string(kMaxFragmentationSteps) + " steps");
  for (auto& u : state.labels) u = 2 * u + (rng.coin() ? 1u : 0u);
  ++state.t;
  return state;
}

int fragmentation_time(int n, RandomStream& rng) {
  FragmentationState s = fragmentation_start(n);
  while (!s.fragmented()) s = fragmentation_step(std::move(s), rng);
  return s.t;
}

std::vector<double> mono_count_law(int n, int t) {
  if (n < 1) throw InvalidArgument("mono_count_law: n must be positive");
  if (t < 0 || t > kMaxQuenchedSteps)
    throw CapacityError("mono_count_law: t=" + std::to_string(t) + " outside [0, " +
                        std::to_string(kMaxQuenchedSteps) + "]");
  const double big_n = std::ldexp(1.0, t);
  const long long leaves = 1ll << t;
  // K ~ Bin(N, 1/2) is the number of +1 leaves. Hoeffding gives
  // P(|K - N/2| >= d) <= 2 exp(-2 d^2 / N); d is chosen so that the
  // discarded tails carry less than 1e-15 of mass.
  const double d = std::ceil(std::sqrt(0.5 * big_n * std::log(2.0 / 1e-15)));
  const long long lo = std::max(0ll, static_cast<long long>(std::floor(0.5 * big_n - d)));
  const long long hi = leaves - lo;
  const double log_half_n = -big_n * std::log(2.0);
  const double kept = static_cast<double>(hi - lo + 1);
  if (static_cast<double>(n) * kept > kMixtureBudget)
    throw CapacityError("mono_mixture: n * components = " +
                        std::to_string(static_cast<double>(n) * kept) + " exceeds budget");

  std::vector<double> law(static_cast<std::size_t>(n) + 1);
  std::vector<double> lc(static_cast<std::size_t>(n) + 1);
  for (int m = 0; m <= n; ++m) lc[m] = log_choose(n, m);
  std::vector<kernels::CompensatedSum> acc(static_cast<std::size_t>(n) + 1);
  for (long long k = lo; k <= hi; ++k) {
    const double p = static_cast<double>(k) / big_n;
    const double log_wk = log_choose(big_n, static_cast<double>(k)) + log_half_n;
    const double lp = std::log(p), lq = std::log1p(-p);
    for (int m = 0; m <= n; ++m) {
      double term;
      if (k == 0)
        term = (m == 0) ? 0.0 : -INFINITY;
      else if (k == leaves)
        term = (m == n) ? 0.0 : -INFINITY;
      else
        term = lc[m] + m * lp + (n - m) * lq;
      acc[m].add(std::exp(log_wk + term));
    }
  }
  for (int m = 0; m <= n; ++m) law[m] = acc[m].value();
  return law;
}

double mono_mixture_tv(int n, int t) {
  const std::vector<double> law = mono_count_law(n, t);
  kernels::CompensatedSum tv;
  const double log_uniform = -n * std::log(2.0);
  for (int m = 0; m <= n; ++m) tv.add(std::abs(law[m] - std::exp(log_choose(n, m) + log_uniform)));
  return std::clamp(0.5 * tv.value(), 0.0, 1.0);
}

AlphaBeta alpha_beta(double qbar, int n) {
  if (!(std::abs(qbar) <= 1.0)) throw InvalidArgument("alpha_beta: |qbar| must be <= 1");
  AlphaBeta ab;
  if (std::abs(qbar) == 1.0) {
    ab.degenerate = true;
    ab.alpha = 0.0;
    ab.beta = 0.0;
    return ab;
  }
  ab.alpha = 0.5 * std::sqrt(static_cast<double>(n)) * (std::log1p(qbar) - std::log1p(-qbar));
  ab.beta = 0.5 * n * std::log1p(-qbar * qbar);
  return ab;
}

DiscreteBounds discrete_upper_bounds(int n, int t) {
  DiscreteBounds b;
  b.s = std::ldexp(static_cast<double>(n), -t);
  b.sum_bound = b.s;
  b.pair_bound = 0.5 * static_cast<double>(n) * (n - 1) * std::ldexp(1.0, -t);
  if (b.s >= 0.5 * std::log(2.0)) b.large_s = 1.0 - 0.5 * std::exp(-2.0 * b.s);
  return b;
}

}  // namespace recomb
