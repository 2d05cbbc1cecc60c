#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace recomb {

/// Identifier of the stream derivation scheme, recorded in run manifests.
inline constexpr std::string_view kRngAlgorithm =
    "mt19937_64/splitmix64-substream/v1";

std::uint64_t splitmix64_mix(std::uint64_t x) noexcept;

/// A pseudo-random stream. All variate conversions are written out here
/// rather than taken from <random> distributions so that a given
/// (seed, task) pair yields the same numbers with every standard library.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Exponential with mean one.
  double exponential();

  bool coin() {
    if (bits_left_ == 0) {
      bit_buffer_ = engine_();
      bits_left_ = 64;
    }
    const bool b = (bit_buffer_ & 1u) != 0;
    bit_buffer_ >>= 1;
    --bits_left_;
    return b;
  }

  int spin() { return coin() ? 1 : -1; }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  /// n independent fair bits packed into the low bits of a word (n <= 64).
  std::uint64_t random_subset(int n);

 private:
  std::mt19937_64 engine_;
  std::uint64_t bit_buffer_ = 0;
  int bits_left_ = 0;
};

/// Deterministic derivation of an independent stream from a master seed
/// and a task id.
RandomStream rng_substream(std::uint64_t master_seed, std::uint64_t task_id);

/// A family of substreams for one Monte Carlo driver. The tag separates
/// drivers that share a master seed.
struct StreamFamily {
  std::uint64_t master_seed = 0;
  std::uint64_t tag = 0;

  RandomStream stream(std::uint64_t task) const;
  StreamFamily child(std::uint64_t sub_tag) const;
};

}  // namespace recomb
