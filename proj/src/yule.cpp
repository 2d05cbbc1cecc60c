#include "recomb/yule.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "recomb/errors.hpp"
#include "recomb/kernels.hpp"
#include "recomb/parallel.hpp"

namespace recomb {
namespace {

constexpr double kCoeffSlack = 1e-9;

struct Ring {
  double time;
  std::int32_t node;
  bool operator>(const Ring& o) const {
    return time > o.time || (time == o.time && node > o.node);
  }
};

void vector_field(std::span<const double> c, std::vector<double>& out, int n) {
  kernels::collision(c, c, out, n);
  for (std::size_t s = 0; s < out.size(); ++s) out[s] -= c[s];
  out[0] = 0.0;
}

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

YuleTree YuleTree::from_children(const std::vector<std::pair<int, int>>& children) {
  if (children.empty()) throw InvalidArgument("from_children: empty tree");
  YuleTree tree;
  tree.nodes.resize(children.size());
  for (std::size_t i = 0; i < children.size(); ++i) {
    const auto [l, r] = children[i];
    if ((l < 0) != (r < 0)) throw InvalidArgument("from_children: node with one child");
    if (l >= 0) {
      if (static_cast<std::size_t>(l) <= i || static_cast<std::size_t>(r) <= i ||
          static_cast<std::size_t>(l) >= children.size() ||
          static_cast<std::size_t>(r) >= children.size())
        throw InvalidArgument("from_children: children must follow their parent");
      tree.nodes[i].left = l;
      tree.nodes[i].right = r;
      tree.nodes[l].parent = tree.nodes[r].parent = static_cast<std::int32_t>(i);
    }
  }
  int max_depth = 0;
  for (std::size_t i = 1; i < tree.nodes.size(); ++i) {
    auto& node = tree.nodes[i];
    if (node.parent < 0) throw InvalidArgument("from_children: unreachable node");
    node.depth = tree.nodes[node.parent].depth + 1;
    node.birth_time = node.depth;
    max_depth = std::max(max_depth, node.depth);
  }
  for (std::size_t i = 0; i < tree.nodes.size(); ++i)
    if (tree.nodes[i].is_leaf()) tree.leaves.push_back(static_cast<std::int32_t>(i));
  tree.horizon = max_depth;
  return tree;
}

YuleTree sample_yule(double t, RandomStream& rng, const YuleCaps& caps) {
  if (!(t >= 0.0)) throw InvalidArgument("sample_yule: t must be non-negative");
  YuleTree tree;
  tree.horizon = t;
  tree.nodes.push_back(YuleNode{});
  std::priority_queue<Ring, std::vector<Ring>, std::greater<>> clocks;
  clocks.push({rng.exponential(), 0});
  std::size_t leaves = 1;
  while (!clocks.empty() && clocks.top().time <= t) {
    const Ring ring = clocks.top();
    clocks.pop();
    if (leaves + 1 > caps.max_leaves)
      throw CapacityError("sample_yule: leaf cap " + std::to_string(caps.max_leaves) +
                              " reached at time " + std::to_string(ring.time),
                          {leaves, tree.nodes.size(), ring.time});
    const auto parent = ring.node;
    const int depth = tree.nodes[parent].depth + 1;
    for (int c = 0; c < 2; ++c) {
      YuleNode child;
      child.parent = parent;
      child.birth_time = ring.time;
      child.depth = depth;
      const auto id = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.push_back(child);
      (c == 0 ? tree.nodes[parent].left : tree.nodes[parent].right) = id;
      clocks.push({ring.time + rng.exponential(), id});
    }
    ++leaves;
  }
  tree.leaves.reserve(leaves);
  for (std::size_t i = 0; i < tree.nodes.size(); ++i)
    if (tree.nodes[i].is_leaf()) tree.leaves.push_back(static_cast<std::int32_t>(i));
  return tree;
}

double leaf_weight_sum(const YuleTree& tree) {
  kernels::CompensatedSum acc;
  for (auto x : tree.leaves) acc.add(std::ldexp(1.0, -tree.nodes[x].depth));
  return acc.value();
}

FourierTable tree_measure(const YuleTree& tree, const FourierTable& mu) {
  if (tree.nodes[0].is_leaf()) return mu;
  const int n = mu.n();
  std::vector<std::vector<double>> value(tree.nodes.size());
  auto of = [&](std::int32_t x) -> std::span<const double> {
    return tree.nodes[x].is_leaf() ? mu.coeffs() : std::span<const double>(value[x]);
  };
  // Children always carry larger indices than their parent.
  for (std::size_t i = tree.nodes.size(); i-- > 0;) {
    const auto& node = tree.nodes[i];
    if (node.is_leaf()) continue;
    value[i].resize(mu.size());
    kernels::collision(of(node.left), of(node.right), value[i], n);
    std::vector<double>().swap(value[node.left]);
    std::vector<double>().swap(value[node.right]);
  }
  return FourierTable::trusted(n, std::move(value[0]));
}

Pmf tree_measure(const YuleTree& tree, const Pmf& mu) {
  return wht_inverse(tree_measure(tree, wht_forward(mu)));
}

FourierTable evolve_continuous(const FourierTable& mu, double t, double h) {
  if (!(t >= 0.0)) throw InvalidArgument("evolve_continuous: t must be non-negative");
  if (!(h > 0.0)) throw InvalidArgument("evolve_continuous: h must be positive");
  if (t == 0.0) return mu;
  const double ratio = t / h;
  long long steps = std::llround(ratio);
  if (std::abs(ratio - static_cast<double>(steps)) > 1e-9 * ratio)
    steps = static_cast<long long>(std::ceil(ratio));
  steps = std::max(1ll, steps);
  const double dt = t / static_cast<double>(steps);
  const int n = mu.n();
  const std::size_t size = mu.size();
  std::vector<double> c = to_vector(mu.coeffs());
  std::vector<double> k1(size), k2(size), k3(size), k4(size), tmp(size);
  for (long long step = 0; step < steps; ++step) {
    vector_field(c, k1, n);
    for (std::size_t s = 0; s < size; ++s) tmp[s] = c[s] + 0.5 * dt * k1[s];
    vector_field(tmp, k2, n);
    for (std::size_t s = 0; s < size; ++s) tmp[s] = c[s] + 0.5 * dt * k2[s];
    vector_field(tmp, k3, n);
    for (std::size_t s = 0; s < size; ++s) tmp[s] = c[s] + dt * k3[s];
    vector_field(tmp, k4, n);
    for (std::size_t s = 0; s < size; ++s)
      c[s] += dt / 6.0 * (k1[s] + 2.0 * k2[s] + 2.0 * k3[s] + k4[s]);
    c[0] = 1.0;
    for (std::size_t s = 1; s < size; ++s)
      if (!(std::abs(c[s]) <= 1.0 + kCoeffSlack))
        throw InvariantViolation("evolve_continuous: coefficient " + std::to_string(c[s]) +
                                 " at subset " + std::to_string(s) + " after step " +
                                 std::to_string(step + 1) + " exceeds 1");
  }
  return FourierTable::trusted(n, std::move(c));
}

Pmf evolve_continuous(const Pmf& mu, double t, double h) {
  if (t == 0.0) return mu;
  return wht_inverse(evolve_continuous(wht_forward(mu), t, h));
}

namespace {

struct WildPartial {
  TableAccumulator fourier, weights;
  std::size_t max_leaves = 0;
};

template <class PerSample>
WildEstimate run_tree_estimator(const Pmf& mu, std::size_t samples,
                                const StreamFamily& streams, PerSample&& per_sample) {
  if (samples == 0) throw InvalidArgument("tree estimator: need at least one sample");
  const std::size_t tasks = parallel::chunk_count(samples);
  auto parts = parallel::map_tasks<WildPartial>(tasks, [&](std::size_t task) {
    RandomStream rng = streams.stream(task);
    WildPartial p{TableAccumulator(mu.size()), TableAccumulator(mu.size()), 0};
    const std::size_t begin = task * parallel::kChunk;
    const std::size_t end = std::min(samples, begin + parallel::kChunk);
    for (std::size_t k = begin; k < end; ++k) {
      std::size_t leaves = 0;
      const FourierTable f = per_sample(rng, leaves);
      p.max_leaves = std::max(p.max_leaves, leaves);
      p.fourier.add(to_vector(f.coeffs()));
      p.weights.add(to_vector(wht_inverse(f).weights()));
    }
    return p;
  });
  WildPartial total{TableAccumulator(mu.size()), TableAccumulator(mu.size()), 0};
  for (const auto& p : parts) {
    total.fourier.merge(p.fourier);
    total.weights.merge(p.weights);
    total.max_leaves = std::max(total.max_leaves, p.max_leaves);
  }
  return {total.fourier.finish(mu.n()), total.weights.finish(mu.n()), total.max_leaves};
}

}  // namespace

WildEstimate wild_mc_estimate(const Pmf& mu, double t, std::size_t samples,
                              const StreamFamily& streams, const YuleCaps& caps) {
  const FourierTable mu_hat = wht_forward(mu);
  return run_tree_estimator(mu, samples, streams, [&](RandomStream& rng, std::size_t& leaves) {
    const YuleTree tree = sample_yule(t, rng, caps);
    leaves = tree.leaf_count();
    return tree_measure(tree, mu_hat);
  });
}

LeafAssignment sample_partition_on_tree(const YuleTree& tree, int n, RandomStream& rng) {
  if (n < 1) throw InvalidArgument("sample_partition_on_tree: n must be positive");
  LeafAssignment a;
  a.leaf.resize(static_cast<std::size_t>(n));
  for (auto& leaf : a.leaf) {
    std::int32_t x = 0;
    while (!tree.nodes[x].is_leaf()) x = rng.coin() ? tree.nodes[x].right : tree.nodes[x].left;
    leaf = x;
  }
  return a;
}

QuenchedEnvironment sample_leaf_environment(const YuleTree& tree, const Pmf& mu,
                                            RandomStream& rng) {
  QuenchedEnvironment env;
  env.n = mu.n();
  env.leaves = tree.leaf_count();
  if (env.leaves * static_cast<std::size_t>(env.n) > kMaxEnvironmentEntries)
    throw CapacityError("sample_leaf_environment: environment exceeds the memory cap",
                        {env.leaves, tree.nodes.size(), tree.horizon});
  env.spins.resize(env.leaves * static_cast<std::size_t>(env.n));
  const PmfSampler draw(mu);
  for (std::size_t x = 0; x < env.leaves; ++x) {
    const std::uint32_t bits = draw(rng);
    for (int i = 0; i < env.n; ++i)
      env.spins[x * static_cast<std::size_t>(env.n) + static_cast<std::size_t>(i)] =
          ((bits >> i) & 1u) ? 1 : -1;
  }
  refresh_frequencies(env);
  return env;
}

std::vector<double> tree_frequencies(const YuleTree& tree, const QuenchedEnvironment& env) {
  if (env.leaves != tree.leaf_count())
    throw DimensionMismatch("tree_frequencies: environment has " + std::to_string(env.leaves) +
                            " leaves, tree has " + std::to_string(tree.leaf_count()));
  std::vector<kernels::CompensatedSum> acc(static_cast<std::size_t>(env.n));
  for (std::size_t k = 0; k < env.leaves; ++k) {
    const double w = std::ldexp(1.0, -tree.nodes[tree.leaves[k]].depth);
    for (int i = 0; i < env.n; ++i) acc[i].add(w * env.spin(k, i));
  }
  std::vector<double> q(static_cast<std::size_t>(env.n));
  for (int i = 0; i < env.n; ++i) q[i] = std::clamp(acc[i].value(), -1.0, 1.0);
  return q;
}

Pmf quenched_measure_ct(const YuleTree& tree, const QuenchedEnvironment& env) {
  return Pmf::product(tree_frequencies(tree, env));
}

FourierTable quenched_fourier_ct(const YuleTree& tree, const QuenchedEnvironment& env) {
  const std::vector<double> q = tree_frequencies(tree, env);
  check_dense_dimension(env.n);
  std::vector<double> c(std::size_t{1} << env.n);
  c[0] = 1.0;
  for (std::size_t s = 1; s < c.size(); ++s) {
    const std::size_t low = s & (~s + 1);
    c[s] = c[s ^ low] * q[std::countr_zero(low)];
  }
  return FourierTable::trusted(env.n, std::move(c));
}

WildEstimate double_average_estimate(const Pmf& mu, double t, std::size_t samples,
                                     const StreamFamily& streams, const YuleCaps& caps) {
  return run_tree_estimator(mu, samples, streams, [&](RandomStream& rng, std::size_t& leaves) {
    const YuleTree tree = sample_yule(t, rng, caps);
    leaves = tree.leaf_count();
    const QuenchedEnvironment env = sample_leaf_environment(tree, mu, rng);
    return quenched_fourier_ct(tree, env);
  });
}

ContinuousBounds continuous_upper_bounds(int n, double t) {
  const double r = n * std::exp(-0.5 * t);
  return {r, 0.5 * (n - 1) * r};
}

}  // namespace recomb
