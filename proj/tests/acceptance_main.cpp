// Runs the fourteen acceptance criteria and prints one line per criterion.
// Usage: acceptance [--seed N] [criterion ids...]

#include <cstdio>
#include <cstdlib>
#include <string>

#include "recomb/acceptance.hpp"

int main(int argc, char** argv) {
  recomb::AcceptanceOptions opts;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--seed" && i + 1 < argc) {
      opts.seed = std::strtoull(argv[++i], nullptr, 0);
    } else {
      opts.only.push_back(std::atoi(arg.c_str()));
    }
  }
  const auto results = recomb::run_acceptance(opts, [](const recomb::CriterionResult& r) {
    std::printf("%s\n", recomb::format_result(r).c_str());
    std::fflush(stdout);
  });
  int passed = 0;
  for (const auto& r : results) passed += r.pass ? 1 : 0;
  const bool ok = recomb::acceptance_ok(results);
  std::printf("%d/%zu criteria passed; %s\n", passed, results.size(),
              ok ? "every failure is a documented known issue" : "UNEXPLAINED FAILURES");
  return ok ? 0 : 1;
}
