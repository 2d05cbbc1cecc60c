// recomb: experiment driver. Every subcommand writes CSV data files and a
// JSON manifest into the output directory.
//
// Exit codes: 0 ok, 1 check failed, 2 configuration, 3 capacity, 4 invariant.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "recomb/acceptance.hpp"
#include "recomb/cube.hpp"
#include "recomb/discrete.hpp"
#include "recomb/errors.hpp"
#include "recomb/io.hpp"
#include "recomb/lowerbound.hpp"
#include "recomb/martingale.hpp"
#include "recomb/parallel.hpp"
#include "recomb/profiles.hpp"
#include "recomb/rng.hpp"
#include "recomb/version.hpp"
#include "recomb/yule.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using recomb::io::format_double;

namespace {

constexpr int kExitCheck = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitInvariant = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Params {
  int n = 0;
  double t = 0.0;
  std::string lambda = "-4..4";
  double lambda_step = 1.0;
  std::size_t M = 0;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
  std::string config;
  std::string mu, nu, init = "mono";
  bool direct = false;
  double h = recomb::kDefaultStep;
  double every = 0.0;
  double horizon = 30.0;
  double delta = 1e-4;
  std::size_t max_leaves = recomb::YuleCaps{}.max_leaves;
  std::size_t max_nodes = recomb::ClosureOptions{}.max_nodes;
  std::vector<double> eps{0.5, 0.25, 0.125};
  std::size_t trees = 2000, inner = 64;
  bool emit_tree = false, emit_environment = false;
  std::vector<int> only;
};

// What a subcommand produced: named CSV payloads plus manifest extras.
struct Outputs {
  std::vector<std::pair<std::string, std::string>> files;  // name, content
  json results = json::object();
  json cap_events = json::array();
  int status = 0;
};

struct Command {
  std::string name;
  std::string help;
  bool stochastic = false;
  std::function<void(CLI::App&, Params&)> options;
  std::function<Outputs(const Params&, CLI::App&)> run;
};

bool given(CLI::App& app, const std::string& name) {
  const CLI::Option* opt = app.get_option_no_throw("--" + name);
  return opt && opt->count() > 0;
}

std::uint64_t require_seed(const Params& p, CLI::App& app) {
  if (!given(app, "seed")) throw ConfigError(app.get_name() + ": --seed is required");
  return p.seed;
}

int require_integer_t(const Params& p) {
  if (p.t < 0 || p.t != std::floor(p.t) || p.t > 1e6)
    throw ConfigError("--t must be a non-negative integer for discrete time, got " +
                      format_double(p.t));
  return static_cast<int>(p.t);
}

void require_positive(std::size_t v, const char* name) {
  if (v == 0) throw ConfigError(std::string("--") + name + " must be positive");
}

std::vector<double> lambda_grid(const Params& p) {
  const std::string& s = p.lambda;
  const auto dots = s.find("..");
  double lo, hi;
  try {
    if (dots == std::string::npos) {
      lo = hi = recomb::io::parse_double(s);
    } else {
      lo = recomb::io::parse_double(s.substr(0, dots));
      hi = recomb::io::parse_double(s.substr(dots + 2));
    }
  } catch (const std::exception&) {
    throw ConfigError("--lambda: expected a or a..b, got '" + s + "'");
  }
  if (!(p.lambda_step > 0)) throw ConfigError("--lambda-step must be positive");
  if (hi < lo) throw ConfigError("--lambda: upper end below lower end");
  std::vector<double> grid;
  const auto count = static_cast<long long>(std::floor((hi - lo) / p.lambda_step + 1e-9));
  for (long long k = 0; k <= count; ++k) grid.push_back(lo + static_cast<double>(k) * p.lambda_step);
  return grid;
}

recomb::StreamFamily streams(const Params& p, CLI::App& app, std::uint64_t tag) {
  return {require_seed(p, app), tag};
}

recomb::Pmf initial_state(const Params& p, CLI::App& app, const std::string& file) {
  if (!file.empty()) return recomb::io::read_pmf(file);
  if (p.n <= 0) throw ConfigError("--n is required unless an input file is given");
  if (p.init == "mono") return recomb::Pmf::monochromatic(p.n);
  if (p.init == "uniform") return recomb::Pmf::uniform(p.n);
  recomb::RandomStream rng = streams(p, app, 0x1417).stream(0);
  if (p.init == "random") return recomb::random_pmf(p.n, rng);
  if (p.init == "random-balanced") return recomb::random_balanced_pmf(p.n, rng);
  throw ConfigError("--init: unknown state '" + p.init + "'");
}

void add_state_options(CLI::App& app, Params& p) {
  app.add_option("--mu", p.mu, "Initial measure (.json or index,value .csv)");
  app.add_option("--n", p.n, "Dimension when no file is given");
  app.add_option("--init", p.init, "mono | uniform | random | random-balanced")
      ->check(CLI::IsMember({"mono", "uniform", "random", "random-balanced"}));
}

void add_seed(CLI::App& app, Params& p) {
  app.add_option("--seed", p.seed, "64-bit master seed");
}

// ---------------------------------------------------------------- commands

Outputs run_collide(const Params& p, CLI::App& app) {
  const recomb::Pmf mu = initial_state(p, app, p.mu);
  const recomb::Pmf nu = p.nu.empty() ? mu : recomb::io::read_pmf(p.nu);
  Outputs o;
  const recomb::Pmf out = p.direct ? recomb::collide_direct(mu, nu) : recomb::collide(mu, nu);
  o.files.emplace_back("collide.csv", recomb::io::to_csv(out));
  o.results["tv_to_uniform"] = recomb::tv_distance(out, recomb::Pmf::uniform(out.n()));
  o.results["path"] = p.direct ? "direct" : "fourier";
  return o;
}

Outputs run_evolve_discrete(const Params& p, CLI::App& app) {
  const int t = require_integer_t(p);
  const recomb::Pmf mu = initial_state(p, app, p.mu);
  const recomb::Pmf pi = recomb::Pmf::uniform(mu.n());
  Outputs o;
  recomb::io::CsvBuilder csv({"t", "tv", "upper_bound"});
  recomb::FourierTable f = recomb::wht_forward(mu);
  recomb::Pmf state = mu;
  for (int k = 0; k <= t; ++k) {
    if (k > 0) {
      f = recomb::collide(f, f);
      state = recomb::wht_inverse(f);
    }
    const auto b = recomb::discrete_upper_bounds(mu.n(), k);
    csv.row({std::to_string(k), format_double(recomb::tv_distance(state, pi)),
             format_double(std::min(1.0, b.sum_bound))});
  }
  o.files.emplace_back("evolve-discrete.csv", csv.str());
  o.files.emplace_back("evolve-discrete.table.csv", recomb::io::to_csv(state));
  if (p.emit_environment) {
    recomb::RandomStream rng = streams(p, app, 0xe1).stream(0);
    o.files.emplace_back("evolve-discrete.environment.csv",
                         recomb::io::environment_csv(recomb::sample_quenched(mu, t, rng)));
  }
  return o;
}

Outputs run_evolve_continuous(const Params& p, CLI::App& app) {
  if (!(p.t >= 0)) throw ConfigError("--t must be non-negative");
  if (!(p.h > 0)) throw ConfigError("--step must be positive");
  const recomb::Pmf mu = initial_state(p, app, p.mu);
  const recomb::Pmf pi = recomb::Pmf::uniform(mu.n());
  const double every = p.every > 0 ? p.every : std::max(p.t, 1e-300);
  Outputs o;
  recomb::io::CsvBuilder csv({"t", "tv", "upper_bound"});
  recomb::FourierTable f = recomb::wht_forward(mu);
  double now = 0.0;
  const auto emit = [&] {
    const auto b = recomb::continuous_upper_bounds(mu.n(), now);
    csv.row({format_double(now), format_double(recomb::tv_distance(recomb::wht_inverse(f), pi)),
             format_double(std::min(1.0, b.sum_bound))});
  };
  emit();
  const auto steps = static_cast<long long>(std::ceil(p.t / every - 1e-9));
  for (long long k = 1; k <= steps; ++k) {
    const double next = std::min(p.t, static_cast<double>(k) * every);
    f = recomb::evolve_continuous(f, next - now, p.h);
    now = next;
    emit();
  }
  o.files.emplace_back("evolve-continuous.csv", csv.str());
  o.files.emplace_back("evolve-continuous.table.csv", recomb::io::to_csv(recomb::wht_inverse(f)));
  return o;
}

Outputs run_profile_discrete(const Params& p, CLI::App&) {
  if (p.n < 2) throw ConfigError("--n must be at least 2");
  const int t0 = static_cast<int>(std::floor(std::log2(static_cast<double>(p.n))));
  Outputs o;
  recomb::io::CsvBuilder csv({"lambda", "s", "tv_exact", "phi_s", "upper_bound"});
  for (double lambda : lambda_grid(p)) {
    if (lambda != std::floor(lambda)) throw ConfigError("--lambda: discrete offsets must be integers");
    const int t = t0 + static_cast<int>(lambda);
    if (t < 0) throw ConfigError("--lambda: t = floor(log2 n) + lambda is negative");
    const auto b = recomb::discrete_upper_bounds(p.n, t);
    double upper = std::min(1.0, b.sum_bound);
    if (b.large_s) upper = std::min(upper, *b.large_s);
    csv.row({format_double(lambda), format_double(b.s),
             format_double(recomb::mono_mixture_tv(p.n, t)),
             format_double(recomb::gaussian_tv(b.s)), format_double(upper)});
  }
  o.files.emplace_back("profile-discrete.csv", csv.str());
  o.results["t_offset"] = t0;
  return o;
}

json closure_events(std::span<const recomb::ClosureSample> samples, const recomb::ClosureOptions& c) {
  std::size_t closed = 0, touched = 0;
  double mass = 0.0;
  for (const auto& s : samples) {
    closed += s.closed;
    touched += s.closed > 0 ? 1 : 0;
    mass += s.closed_mass;
  }
  json events = json::array();
  if (closed > 0)
    events.push_back({{"cap", "closure"},
                      {"detail", "subtrees with 4^-d e^{b/2} < delta replaced by their mean"},
                      {"delta", c.delta},
                      {"subtrees", closed},
                      {"samples_affected", touched},
                      {"mean_closed_mass", mass / static_cast<double>(samples.size())}});
  events.push_back({{"cap", "horizon"}, {"detail", "W_inf approximated by W_T"}, {"T", c.horizon}});
  return events;
}

recomb::ClosureOptions closure_options(const Params& p) {
  recomb::ClosureOptions c;
  c.horizon = p.horizon;
  c.delta = p.delta;
  c.max_nodes = p.max_nodes;
  return c;
}

Outputs run_profile_continuous(const Params& p, CLI::App& app) {
  require_positive(p.M, "M");
  const recomb::ClosureOptions c = closure_options(p);
  const auto samples = recomb::w_infinity_samples(p.M, streams(p, app, 0xc0), c);
  const auto w = recomb::w_values(samples);
  Outputs o;
  recomb::io::CsvBuilder csv({"lambda", "scale", "tv", "upper", "lower"});
  for (double lambda : lambda_grid(p)) {
    const double scale = std::exp(-0.5 * lambda);
    csv.row({format_double(lambda), format_double(scale), format_double(recomb::f_lambda(lambda, w)),
             format_double(std::min(1.0, scale)), "NA"});
  }
  o.files.emplace_back("profile-continuous.csv", csv.str());
  o.cap_events = closure_events(samples, c);
  return o;
}

Outputs run_fragmentation(const Params& p, CLI::App& app) {
  if (p.n < 1) throw ConfigError("--n must be positive");
  require_positive(p.M, "M");
  const auto family = streams(p, app, 0xf4);
  const std::size_t chunks = recomb::parallel::chunk_count(p.M);
  const auto parts = recomb::parallel::map_tasks<std::vector<int>>(chunks, [&](std::size_t c) {
    recomb::RandomStream rng = family.stream(c);
    const std::size_t lo = c * recomb::parallel::kChunk;
    const std::size_t hi = std::min(p.M, lo + recomb::parallel::kChunk);
    std::vector<int> times;
    for (std::size_t i = lo; i < hi; ++i) times.push_back(recomb::fragmentation_time(p.n, rng));
    return times;
  });
  std::vector<int> times;
  for (const auto& part : parts) times.insert(times.end(), part.begin(), part.end());
  Outputs o;
  recomb::io::CsvBuilder raw({"sample", "time"});
  int tmax = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    raw.row({std::to_string(i), std::to_string(times[i])});
    tmax = std::max(tmax, times[i]);
  }
  recomb::io::CsvBuilder surv({"t", "p_not_fragmented", "std_error", "pair_bound"});
  for (int t = 0; t <= tmax; ++t) {
    std::size_t alive = 0;
    for (int x : times) alive += x > t ? 1 : 0;
    const double q = static_cast<double>(alive) / static_cast<double>(times.size());
    const double se = std::sqrt(q * (1 - q) / static_cast<double>(times.size()));
    const double bound = 0.5 * p.n * (p.n - 1.0) * std::ldexp(1.0, -t);
    surv.row({std::to_string(t), format_double(q), format_double(se),
              format_double(std::min(1.0, bound))});
  }
  o.files.emplace_back("fragmentation.csv", raw.str());
  o.files.emplace_back("fragmentation_survival.csv", surv.str());
  return o;
}

Outputs run_martingale(const Params& p, CLI::App& app) {
  if (!(p.t >= 0)) throw ConfigError("--t must be non-negative");
  require_positive(p.M, "M");
  recomb::YuleCaps caps;
  caps.max_leaves = p.max_leaves;
  const auto family = streams(p, app, 0x3a);
  const auto samples = recomb::w_samples(p.t, p.M, family, caps);
  recomb::ScalarAccumulator acc;
  for (const auto& s : samples) acc.add(s.W);
  Outputs o;
  o.files.emplace_back("martingale.csv", recomb::io::w_csv(samples));
  if (p.emit_tree) {
    recomb::RandomStream rng = family.child(1).stream(0);
    o.files.emplace_back("martingale.tree.csv",
                         recomb::io::tree_csv(recomb::sample_yule(p.t, rng, caps)));
  }
  o.results["mean_W"] = acc.mean();
  o.results["std_error"] = acc.std_error();
  return o;
}

Outputs run_w_tail(const Params& p, CLI::App& app) {
  require_positive(p.M, "M");
  if (p.eps.empty()) throw ConfigError("--eps needs at least one value");
  const recomb::ClosureOptions c = closure_options(p);
  const auto samples = recomb::w_infinity_samples(p.M, streams(p, app, 0x7a), c);
  const auto w = recomb::w_values(samples);
  Outputs o;
  recomb::io::CsvBuilder csv({"epsilon", "hits", "samples", "p", "std_error", "lo95", "hi95", "log_p"});
  for (double e : p.eps) {
    const auto est = recomb::w_tail_probability(w, e);
    csv.row({format_double(e), std::to_string(est.hits), std::to_string(est.samples),
             format_double(est.p), format_double(est.std_error), format_double(est.lo),
             format_double(est.hi), est.hits ? format_double(std::log(est.p)) : "-inf"});
  }
  o.files.emplace_back("w-tail.csv", csv.str());
  o.files.emplace_back("w-tail.samples.csv", recomb::io::w_csv(samples, c.horizon));
  o.cap_events = closure_events(samples, c);
  return o;
}

Outputs run_lowerbound_discrete(const Params& p, CLI::App& app) {
  if (p.n < 1) throw ConfigError("--n must be positive");
  const int t = require_integer_t(p);
  const recomb::StreamFamily family =
      p.M > 0 ? streams(p, app, 0x1d) : recomb::StreamFamily{0, 0x1d};
  const auto b = recomb::lowerbound_experiment_discrete(p.n, t, p.M, family);
  recomb::io::CsvBuilder csv({"n", "t", "p", "alpha", "mean_xi", "mean_xi_formula", "second_xi",
                          "second_xi_formula", "pz_ratio", "pi_block", "mu_block", "pi_a",
                          "mu_a_c", "bound", "mc_samples", "mc_second_xi", "mc_second_xi_se"});
  csv.row({std::to_string(p.n), std::to_string(t), std::to_string(b.spec.p),
           std::to_string(b.spec.alpha), format_double(b.mean_xi), format_double(b.mean_xi_formula),
           format_double(b.second_xi), format_double(b.second_xi_formula),
           format_double(b.pz_ratio), format_double(b.pi_block), format_double(b.mu_block),
           format_double(b.pi_a), format_double(b.mu_a_c), format_double(b.bound),
           std::to_string(b.mc_samples), format_double(b.mc_second_xi),
           format_double(b.mc_second_xi_se)});
  Outputs o;
  o.files.emplace_back("lowerbound-discrete.csv", csv.str());
  o.results["bound"] = b.bound;
  return o;
}

Outputs run_lowerbound_continuous(const Params& p, CLI::App& app) {
  if (p.n < 1) throw ConfigError("--n must be positive");
  if (!(p.t > 0)) throw ConfigError("--t must be positive");
  require_positive(p.trees, "trees");
  require_positive(p.inner, "inner");
  recomb::YuleCaps caps;
  caps.max_leaves = p.max_leaves;
  const auto b = recomb::lowerbound_experiment_continuous(p.n, p.t, p.trees, p.inner,
                                                          streams(p, app, 0x1c), caps);
  recomb::io::CsvBuilder csv({"n", "t", "p", "alpha", "r", "w_threshold", "trees", "inner", "pi_a",
                          "mu_a_c", "mu_a_c_se", "bound", "z_law_tv",
                          "second_moment_violations", "min_pz_ratio", "trees_on_event",
                          "first_moment_trees", "max_first_moment_z"});
  csv.row({std::to_string(p.n), format_double(p.t), std::to_string(b.spec.p),
           std::to_string(b.spec.alpha), format_double(b.r), format_double(b.w_threshold),
           std::to_string(b.trees), std::to_string(b.inner), format_double(b.pi_a),
           format_double(b.mu_a_c), format_double(b.mu_a_c_se), format_double(b.bound),
           format_double(b.z_law_tv), std::to_string(b.second_moment_violations),
           format_double(b.min_pz_ratio), std::to_string(b.trees_on_event),
           std::to_string(b.first_moment_trees), format_double(b.max_first_moment_z)});
  Outputs o;
  o.files.emplace_back("lowerbound-continuous.csv", csv.str());
  o.results["bound"] = b.bound;
  return o;
}

Outputs run_spinal_check(const Params& p, CLI::App& app) {
  if (!(p.t > 0)) throw ConfigError("--t must be positive");
  require_positive(p.M, "M");
  const auto rep = recomb::spinal_identity_check(p.t, p.M, streams(p, app, 0x5b));
  recomb::io::CsvBuilder csv({"functional", "reweighted_mean", "reweighted_se", "direct_mean",
                          "direct_se", "exact", "z_two_sample", "z_exact", "pass"});
  for (const auto& f : rep.functionals)
    csv.row({f.name, format_double(f.reweighted_mean), format_double(f.reweighted_se),
             format_double(f.direct_mean), format_double(f.direct_se), format_double(f.exact),
             format_double(f.z_two_sample), format_double(f.z_exact), f.pass ? "1" : "0"});
  Outputs o;
  o.files.emplace_back("spinal-check.csv", csv.str());
  o.results["pass"] = rep.pass;
  o.status = rep.pass ? 0 : kExitCheck;
  return o;
}

Outputs run_selftest(const Params& p, CLI::App& app) {
  recomb::AcceptanceOptions opts;
  if (given(app, "seed")) opts.seed = p.seed;
  opts.only = p.only;
  const auto results = recomb::run_acceptance(opts, [](const recomb::CriterionResult& r) {
    std::printf("%s\n", recomb::format_result(r).c_str());
    std::fflush(stdout);
  });
  recomb::io::CsvBuilder csv({"id", "name", "pass", "known_issue", "detail"});
  for (const auto& r : results)
    csv.row({std::to_string(r.id), r.name, r.pass ? "1" : "0", r.known_issue, r.detail});
  Outputs o;
  o.files.emplace_back("selftest.csv", csv.str());
  const bool ok = recomb::acceptance_ok(results);
  o.results["ok"] = ok;
  o.results["acceptance_seed"] = opts.seed;
  o.status = ok ? 0 : kExitCheck;
  return o;
}

std::vector<Command> commands() {
  return {
      {"collide", "Collision product of one or two measures", false,
       [](CLI::App& a, Params& p) {
         add_state_options(a, p);
         add_seed(a, p);
         a.add_option("--nu", p.nu, "Second measure (defaults to mu)");
         a.add_flag("--direct", p.direct, "Use the direct 2^-n sum over A (n <= 10)");
       },
       run_collide},
      {"evolve-discrete", "Discrete-time recombination trajectory", false,
       [](CLI::App& a, Params& p) {
         add_state_options(a, p);
         add_seed(a, p);
         a.add_option("--t", p.t, "Number of steps");
         a.add_flag("--emit-environment", p.emit_environment,
                    "Also write one sampled quenched environment (needs --seed)");
       },
       run_evolve_discrete},
      {"evolve-continuous", "Continuous-time recombination by RK4", false,
       [](CLI::App& a, Params& p) {
         add_state_options(a, p);
         add_seed(a, p);
         a.add_option("--t", p.t, "Final time");
         a.add_option("--step", p.h, "Integrator step");
         a.add_option("--every", p.every, "Output spacing (default: only t)");
       },
       run_evolve_continuous},
      {"profile-discrete", "Monochromatic TV at t = floor(log2 n) + lambda vs phi", false,
       [](CLI::App& a, Params& p) {
         a.add_option("--n", p.n, "Dimension");
         a.add_option("--lambda", p.lambda, "Offset range a..b");
         a.add_option("--lambda-step", p.lambda_step, "Grid spacing");
         add_seed(a, p);
       },
       run_profile_discrete},
      {"profile-continuous", "Limit profile f(lambda) from sampled W", true,
       [](CLI::App& a, Params& p) {
         a.add_option("--lambda", p.lambda, "Range a..b");
         a.add_option("--lambda-step", p.lambda_step, "Grid spacing");
         a.add_option("--M", p.M, "Number of W samples");
         a.add_option("--horizon", p.horizon, "Surrogate horizon T for W_inf");
         a.add_option("--delta", p.delta, "Closure threshold");
         a.add_option("--max-nodes", p.max_nodes, "Node cap per W sample");
         add_seed(a, p);
       },
       run_profile_continuous},
      {"fragmentation", "Fragmentation times of the binary splitting process", true,
       [](CLI::App& a, Params& p) {
         a.add_option("--n", p.n, "Number of sites");
         a.add_option("--M", p.M, "Number of runs");
         add_seed(a, p);
       },
       run_fragmentation},
      {"martingale", "Samples of the additive martingale W_t", true,
       [](CLI::App& a, Params& p) {
         a.add_option("--t", p.t, "Time");
         a.add_option("--M", p.M, "Number of samples");
         a.add_option("--max-leaves", p.max_leaves, "Leaf cap per tree");
         a.add_flag("--emit-tree", p.emit_tree, "Also write one sampled Yule tree");
         add_seed(a, p);
       },
       run_martingale},
      {"w-tail", "Small-value tail P(W <= eps) of the limit martingale", true,
       [](CLI::App& a, Params& p) {
         a.add_option("--M", p.M, "Number of samples");
         a.add_option("--eps", p.eps, "Thresholds")->delimiter(',');
         a.add_option("--horizon", p.horizon, "Surrogate horizon T");
         a.add_option("--delta", p.delta, "Closure threshold");
         a.add_option("--max-nodes", p.max_nodes, "Node cap per sample");
         add_seed(a, p);
       },
       run_w_tail},
      {"lowerbound-discrete", "Block-product lower bound, discrete time", false,
       [](CLI::App& a, Params& p) {
         a.add_option("--n", p.n, "Dimension");
         a.add_option("--t", p.t, "Steps");
         a.add_option("--M", p.M, "Monte Carlo draws for the second moment (0: none)");
         add_seed(a, p);
       },
       run_lowerbound_discrete},
      {"lowerbound-continuous", "Block-product lower bound over Yule trees", true,
       [](CLI::App& a, Params& p) {
         a.add_option("--n", p.n, "Dimension");
         a.add_option("--t", p.t, "Time");
         a.add_option("--trees", p.trees, "Outer tree samples");
         a.add_option("--inner", p.inner, "Environment draws per tree");
         a.add_option("--max-leaves", p.max_leaves, "Leaf cap per tree");
         add_seed(a, p);
       },
       run_lowerbound_continuous},
      {"spinal-check", "Size-biased spine identity on path functionals", true,
       [](CLI::App& a, Params& p) {
         a.add_option("--t", p.t, "Time");
         a.add_option("--M", p.M, "Samples per side");
         add_seed(a, p);
       },
       run_spinal_check},
      {"selftest", "Run the acceptance suite", false,
       [](CLI::App& a, Params& p) {
         a.add_option("--only", p.only, "Criterion ids")->delimiter(',');
         add_seed(a, p);
       },
       run_selftest},
  };
}

void add_common(CLI::App& sub, Params& p) {
  sub.add_option("--threads", p.threads, "Worker threads (results do not depend on it)");
  sub.add_option("--out", p.out, "Output directory");
  sub.add_option("--config", p.config, "key=value file; flags override it");
}

struct ConfigEntry {
  int line;
  std::string key, value;
};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<ConfigEntry> read_config(const std::string& path) {
  std::string text;
  try {
    text = recomb::io::read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("--config: ") + e.what());
  }
  std::vector<ConfigEntry> out;
  int line = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string raw = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    raw = trim(raw);
    if (raw.empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line) + ": expected key=value");
    ConfigEntry e{line, trim(raw.substr(0, eq)), trim(raw.substr(eq + 1))};
    if (e.key.empty()) throw ConfigError(path + ":" + std::to_string(line) + ": empty key");
    out.push_back(std::move(e));
  }
  return out;
}

struct Parsed {
  std::unique_ptr<CLI::App> app;
  std::unique_ptr<Params> params;
  CLI::App* sub = nullptr;
  const Command* command = nullptr;
};

Parsed build(const std::vector<Command>& cmds) {
  Parsed out;
  out.app = std::make_unique<CLI::App>("Recombination dynamics on the Boolean cube", "recomb");
  out.params = std::make_unique<Params>();
  out.app->require_subcommand(1);
  out.app->option_defaults()->always_capture_default();
  out.app->set_version_flag("--version", std::string(recomb::kVersion));
  for (const auto& c : cmds) {
    CLI::App* sub = out.app->add_subcommand(c.name, c.help);
    c.options(*sub, *out.params);
    add_common(*sub, *out.params);
  }
  return out;
}

// CLI11 reads "-4..4" as an option name; glue such values to their flag.
std::vector<std::string> normalise(std::vector<std::string> args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if ((args[i] == "--lambda" || args[i] == "--eps") && i + 1 < args.size()) {
      out.push_back(args[i] + "=" + args[i + 1]);
      ++i;
    } else {
      out.push_back(args[i]);
    }
  }
  return out;
}

int parse_args(CLI::App& app, std::vector<std::string> args) {
  std::reverse(args.begin(), args.end());
  app.parse(args);
  return 0;
}

std::string option_name(const std::string& token) {
  return token.substr(2, token.find('=') - 2);
}

json config_echo(CLI::App& sub) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_lnames().empty() ? "" : opt->get_lnames().front();
    if (name.empty() || name == "help" || name == "config") continue;
    if (opt->count() > 0) {
      const auto& r = opt->results();
      cfg[name] = r.size() == 1 ? json(r.front()) : json(r);
    } else {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  const auto cmds = commands();
  std::vector<std::string> user(argv + 1, argv + argc);
  user = normalise(user);

  Parsed parsed = build(cmds);
  std::vector<std::string> config_args;
  std::string config_path;
  std::string command_name;
  try {
    // Find the subcommand and an optional --config before the real parse.
    if (!user.empty()) command_name = user.front();
    for (std::size_t i = 0; i + 1 < user.size(); ++i)
      if (user[i] == "--config") config_path = user[i + 1];
    for (const auto& u : user)
      if (u.rfind("--config=", 0) == 0) config_path = u.substr(9);
    const Command* cmd = nullptr;
    for (const auto& c : cmds)
      if (c.name == command_name) cmd = &c;
    if (!config_path.empty() && cmd) {
      std::set<std::string> on_command_line;
      for (const auto& u : user)
        if (u.rfind("--", 0) == 0) on_command_line.insert(option_name(u));
      for (const auto& e : read_config(config_path)) {
        const std::string where = config_path + ":" + std::to_string(e.line) + ": ";
        if (e.key == "config") throw ConfigError(where + "config files cannot nest");
        Parsed probe = build(cmds);
        if (!probe.app->get_subcommand(command_name)->get_option_no_throw("--" + e.key))
          throw ConfigError(where + "unknown key '" + e.key + "' for " + command_name);
        try {
          parse_args(*probe.app, {command_name, "--" + e.key + "=" + e.value});
        } catch (const CLI::ParseError& err) {
          throw ConfigError(where + "key '" + e.key + "': " + err.what());
        }
        if (!on_command_line.count(e.key)) config_args.push_back("--" + e.key + "=" + e.value);
      }
    }
    std::vector<std::string> args;
    if (!user.empty()) {
      args.push_back(user.front());
      args.insert(args.end(), config_args.begin(), config_args.end());
      args.insert(args.end(), user.begin() + 1, user.end());
    }
    parse_args(*parsed.app, args);
  } catch (const CLI::ParseError& e) {
    return parsed.app->exit(e) == 0 ? 0 : kExitConfig;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "recomb: %s\n", e.what());
    return kExitConfig;
  }

  CLI::App* sub = parsed.app->get_subcommands().front();
  const Command* cmd = nullptr;
  for (const auto& c : cmds)
    if (c.name == sub->get_name()) cmd = &c;
  Params& p = *parsed.params;

  // Precedence: --out on the command line, then RECOMB_OUT_DIR, then the
  // config file, then the default.
  const bool out_on_command_line =
      std::any_of(user.begin(), user.end(),
                  [](const std::string& u) { return u == "--out" || u.rfind("--out=", 0) == 0; });
  fs::path out_dir = "recomb-out";
  if (out_on_command_line) {
    out_dir = p.out;
  } else if (const char* env = std::getenv("RECOMB_OUT_DIR"); env && *env) {
    out_dir = env;
  } else if (given(*sub, "out")) {
    out_dir = p.out;
  }
  if (p.threads > 0) recomb::parallel::set_threads(p.threads);

  json manifest;
  manifest["command"] = cmd->name;
  manifest["version"] = recomb::kVersion;
  manifest["rng"] = recomb::kRngAlgorithm;
  manifest["config"] = config_echo(*sub);
  if (!config_path.empty()) manifest["config_file"] = config_path;
  manifest["threads"] = recomb::parallel::max_threads();
  manifest["started_utc"] = utc_now();
  manifest["outputs"] = json::array();
  manifest["cap_events"] = json::array();

  int code = 0;
  const auto start = std::chrono::steady_clock::now();
  Outputs outputs;
  try {
    if (cmd->stochastic) require_seed(p, *sub);
    outputs = cmd->run(p, *sub);
    code = outputs.status;
    manifest["status"] = code == 0 ? "ok" : "check_failed";
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "recomb %s: %s\n", cmd->name.c_str(), e.what());
    return kExitConfig;
  } catch (const recomb::CapacityError& e) {
    code = kExitCapacity;
    manifest["status"] = "capacity";
    manifest["error"] = e.what();
    manifest["cap_events"].push_back({{"cap", "fatal"},
                                      {"detail", e.what()},
                                      {"partial_leaves", e.partial().leaves},
                                      {"partial_nodes", e.partial().nodes},
                                      {"partial_time", e.partial().time_reached}});
  } catch (const recomb::InvariantViolation& e) {
    code = kExitInvariant;
    manifest["status"] = "invariant";
    manifest["error"] = e.what();
  } catch (const recomb::InvalidTableError& e) {
    code = kExitInvariant;
    manifest["status"] = "invariant";
    manifest["error"] = e.what();
  } catch (const recomb::Error& e) {
    std::fprintf(stderr, "recomb %s: %s\n", cmd->name.c_str(), e.what());
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "recomb %s: %s\n", cmd->name.c_str(), e.what());
    return kExitConfig;
  }
  manifest["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  manifest["results"] = outputs.results;
  for (auto& ev : outputs.cap_events) manifest["cap_events"].push_back(ev);

  try {
    fs::create_directories(out_dir);
    for (const auto& [name, content] : outputs.files) {
      recomb::io::write_file_atomic(out_dir / name, content);
      manifest["outputs"].push_back({{"file", name},
                                     {"bytes", content.size()},
                                     {"fnv1a64", recomb::io::hex64(recomb::io::fnv1a64(content))}});
    }
    recomb::io::write_file_atomic(out_dir / (cmd->name + ".manifest.json"), manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "recomb %s: cannot write outputs: %s\n", cmd->name.c_str(), e.what());
    return kExitConfig;
  }
  if (code == kExitCapacity || code == kExitInvariant)
    std::fprintf(stderr, "recomb %s: %s\n", cmd->name.c_str(),
                 manifest["error"].get<std::string>().c_str());
  for (const auto& f : manifest["outputs"])
    std::printf("%s\n", (out_dir / f["file"].get<std::string>()).string().c_str());
  return code;
}
