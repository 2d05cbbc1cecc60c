#include "recomb/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "recomb/errors.hpp"
#include "recomb/estimate.hpp"
#include "recomb/kernels.hpp"
#include "recomb/parallel.hpp"

namespace recomb {
namespace {

struct Pending {
  double birth;
  int depth;
};

template <class Sample, class Draw>
std::vector<Sample> chunked_draws(std::size_t samples, const StreamFamily& streams, Draw&& draw) {
  const std::size_t tasks = parallel::chunk_count(samples);
  auto parts = parallel::map_tasks<std::vector<Sample>>(tasks, [&](std::size_t task) {
    RandomStream rng = streams.stream(task);
    const std::size_t begin = task * parallel::kChunk;
    const std::size_t end = std::min(samples, begin + parallel::kChunk);
    std::vector<Sample> out;
    out.reserve(end - begin);
    for (std::size_t k = begin; k < end; ++k) out.push_back(draw(rng));
    return out;
  });
  std::vector<Sample> all;
  all.reserve(samples);
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return all;
}

}  // namespace

MartingaleSample martingale_W(const YuleTree& tree) {
  kernels::CompensatedSum acc;
  for (auto x : tree.leaves) acc.add(std::ldexp(1.0, -2 * tree.nodes[x].depth));
  return {tree.horizon, std::exp(0.5 * tree.horizon) * acc.value(), tree.leaf_count()};
}

MartingaleSample sample_w(double t, RandomStream& rng, const YuleCaps& caps) {
  if (!(t >= 0.0)) throw InvalidArgument("sample_w: t must be non-negative");
  const double scale = std::exp(0.5 * t);
  kernels::CompensatedSum acc;
  std::size_t leaves = 0, nodes = 0;
  std::vector<Pending> stack{{0.0, 0}};
  while (!stack.empty()) {
    const Pending x = stack.back();
    stack.pop_back();
    ++nodes;
    const double ring = x.birth + rng.exponential();
    if (ring > t) {
      acc.add(std::ldexp(1.0, -2 * x.depth));
      if (++leaves > caps.max_leaves)
        throw CapacityError("sample_w: leaf cap " + std::to_string(caps.max_leaves) +
                                " exceeded at t=" + std::to_string(t),
                            {leaves, nodes, x.birth});
      continue;
    }
    stack.push_back({ring, x.depth + 1});
    stack.push_back({ring, x.depth + 1});
  }
  return {t, scale * acc.value(), leaves};
}

std::vector<MartingaleSample> w_samples(double t, std::size_t samples,
                                        const StreamFamily& streams, const YuleCaps& caps) {
  return chunked_draws<MartingaleSample>(samples, streams,
                                         [&](RandomStream& rng) { return sample_w(t, rng, caps); });
}

ClosureSample sample_w_closure(const ClosureOptions& options, RandomStream& rng) {
  const double horizon = options.horizon;
  if (!(horizon >= 0.0)) throw InvalidArgument("closure: horizon must be non-negative");
  if (!(options.delta > 0.0 && options.delta < 1.0))
    throw InvalidArgument("closure: delta must lie in (0, 1)");
  const double log_delta = std::log(options.delta);
  const double log4 = std::log(4.0);
  const double tip_scale = std::exp(0.5 * horizon);
  kernels::CompensatedSum tips, closed;
  ClosureSample out;
  std::size_t nodes = 0;
  std::vector<Pending> stack{{0.0, 0}};
  while (!stack.empty()) {
    const Pending x = stack.back();
    stack.pop_back();
    if (++nodes > options.max_nodes)
      throw CapacityError("closure: node cap " + std::to_string(options.max_nodes) +
                              " exceeded",
                          {out.leaves, nodes, x.birth});
    // Prefactor 4^-d e^{b/2} below delta: close the subtree at its mean.
    const double log_prefactor = 0.5 * x.birth - x.depth * log4;
    if (log_prefactor < log_delta) {
      closed.add(std::exp(log_prefactor));
      ++out.closed;
      continue;
    }
    const double ring = x.birth + rng.exponential();
    if (ring > horizon) {
      tips.add(std::ldexp(tip_scale, -2 * x.depth));
      ++out.leaves;
      continue;
    }
    stack.push_back({ring, x.depth + 1});
    stack.push_back({ring, x.depth + 1});
  }
  out.W = tips.value() + closed.value();
  out.closed_mass = closed.value();
  return out;
}

std::vector<ClosureSample> w_infinity_samples(std::size_t samples, const StreamFamily& streams,
                                              const ClosureOptions& options) {
  return chunked_draws<ClosureSample>(
      samples, streams, [&](RandomStream& rng) { return sample_w_closure(options, rng); });
}

std::vector<double> w_values(std::span<const MartingaleSample> samples) {
  std::vector<double> w;
  w.reserve(samples.size());
  for (const auto& s : samples) w.push_back(s.W);
  return w;
}

std::vector<double> w_values(std::span<const ClosureSample> samples) {
  std::vector<double> w;
  w.reserve(samples.size());
  for (const auto& s : samples) w.push_back(s.W);
  return w;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_99(std::size_t n, std::size_t m) {
  const double a = static_cast<double>(n), b = static_cast<double>(m);
  return 1.628 * std::sqrt((a + b) / (a * b));
}

TailEstimate w_tail_probability(std::span<const double> w, double epsilon, bool strict) {
  if (w.empty()) throw InvalidArgument("w_tail_probability: empty sample");
  TailEstimate e;
  e.epsilon = epsilon;
  e.samples = w.size();
  for (double x : w) e.hits += strict ? (x < epsilon) : (x <= epsilon);
  const double m = static_cast<double>(e.samples);
  e.p = static_cast<double>(e.hits) / m;
  e.std_error = std::sqrt(e.p * (1.0 - e.p) / m);
  const double z = 1.959963984540054;
  const double denom = 1.0 + z * z / m;
  const double centre = (e.p + z * z / (2 * m)) / denom;
  const double half = z * std::sqrt(e.p * (1 - e.p) / m + z * z / (4 * m * m)) / denom;
  e.lo = std::max(0.0, centre - half);
  e.hi = std::min(1.0, centre + half);
  return e;
}

std::size_t SpinePath::count(double s) const {
  return static_cast<std::size_t>(
      std::upper_bound(jump_times.begin(), jump_times.end(), s) - jump_times.begin());
}

SpinePath sample_poisson_path(double rate, double horizon, RandomStream& rng) {
  if (!(rate > 0.0)) throw InvalidArgument("poisson path: rate must be positive");
  SpinePath path;
  path.horizon = horizon;
  double time = rng.exponential() / rate;
  while (time <= horizon) {
    path.jump_times.push_back(time);
    time += rng.exponential() / rate;
  }
  return path;
}

SpinalReport spinal_identity_check(double t, std::size_t samples, const StreamFamily& streams) {
  if (!(t > 0.0)) throw InvalidArgument("spinal_identity_check: t must be positive");
  if (samples < 2) throw InvalidArgument("spinal_identity_check: need at least two samples");
  struct Functional {
    std::string name;
    std::function<double(const SpinePath&)> g;
    double exact;
  };
  const std::vector<Functional> library = {
      {"one", [](const SpinePath&) { return 1.0; }, 1.0},
      {"X_t", [t](const SpinePath& p) { return static_cast<double>(p.count(t)); }, t / 2},
      {"X_{t/2}=0", [t](const SpinePath& p) { return p.count(t / 2) == 0 ? 1.0 : 0.0; },
       std::exp(-t / 4)},
      {"X_{t/4}", [t](const SpinePath& p) { return static_cast<double>(p.count(t / 4)); },
       t / 8},
      {"exp(-X_{t/2})",
       [t](const SpinePath& p) { return std::exp(-static_cast<double>(p.count(t / 2))); },
       std::exp(0.25 * t * (std::exp(-1.0) - 1.0))},
  };
  const std::size_t k = library.size();
  struct Partial {
    std::vector<ScalarAccumulator> reweighted, direct;
  };
  const StreamFamily forward = streams.child(0), slowed = streams.child(1);
  const double tilt = std::exp(0.5 * t);
  const std::size_t tasks = parallel::chunk_count(samples);
  auto parts = parallel::map_tasks<Partial>(tasks, [&](std::size_t task) {
    RandomStream rx = forward.stream(task), ry = slowed.stream(task);
    Partial p{std::vector<ScalarAccumulator>(k), std::vector<ScalarAccumulator>(k)};
    const std::size_t begin = task * parallel::kChunk;
    const std::size_t end = std::min(samples, begin + parallel::kChunk);
    for (std::size_t s = begin; s < end; ++s) {
      const SpinePath x = sample_poisson_path(1.0, t, rx);
      const SpinePath y = sample_poisson_path(0.5, t, ry);
      const double weight = std::ldexp(tilt, -static_cast<int>(x.count(t)));
      for (std::size_t f = 0; f < k; ++f) {
        p.reweighted[f].add(weight * library[f].g(x));
        p.direct[f].add(library[f].g(y));
      }
    }
    return p;
  });
  std::vector<ScalarAccumulator> rw(k), dr(k);
  for (const auto& p : parts)
    for (std::size_t f = 0; f < k; ++f) {
      rw[f].merge(p.reweighted[f]);
      dr[f].merge(p.direct[f]);
    }
  SpinalReport report;
  report.t = t;
  report.samples = samples;
  report.pass = true;
  for (std::size_t f = 0; f < k; ++f) {
    SpinalFunctional r;
    r.name = library[f].name;
    r.reweighted_mean = rw[f].mean();
    r.reweighted_se = rw[f].std_error();
    r.direct_mean = dr[f].mean();
    r.direct_se = dr[f].std_error();
    r.exact = library[f].exact;
    const double se2 = std::hypot(r.reweighted_se, r.direct_se);
    r.z_two_sample = se2 > 0 ? (r.reweighted_mean - r.direct_mean) / se2 : 0.0;
    r.z_exact = r.reweighted_se > 0 ? (r.reweighted_mean - r.exact) / r.reweighted_se : 0.0;
    r.pass = std::abs(r.z_two_sample) <= 4.0 && std::abs(r.z_exact) <= 4.0;
    report.pass = report.pass && r.pass;
    report.functionals.push_back(std::move(r));
  }
  return report;
}

}  // namespace recomb
