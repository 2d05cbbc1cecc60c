#include "recomb/rng.hpp"

#include <cmath>

namespace recomb {

std::uint64_t splitmix64_mix(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double RandomStream::exponential() { return -std::log(uniform()); }

std::uint64_t RandomStream::below(std::uint64_t bound) {
  if (bound <= 1) return 0;
  // Rejection on the top of the range keeps the result exactly uniform.
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

std::uint64_t RandomStream::random_subset(int n) {
  if (n <= 0) return 0;
  const std::uint64_t word = engine_();
  return n >= 64 ? word : (word & ((std::uint64_t{1} << n) - 1));
}

RandomStream rng_substream(std::uint64_t master_seed, std::uint64_t task_id) {
  const std::uint64_t a = splitmix64_mix(master_seed);
  const std::uint64_t b = splitmix64_mix(a ^ splitmix64_mix(task_id + 0x632BE59BD9B4E019ull));
  return RandomStream(b);
}

RandomStream StreamFamily::stream(std::uint64_t task) const {
  return rng_substream(master_seed, splitmix64_mix(tag) ^ task);
}

StreamFamily StreamFamily::child(std::uint64_t sub_tag) const {
  return {master_seed, splitmix64_mix(tag + 0x1000193ull * (sub_tag + 1))};
}

}  // namespace recomb
