#pragma once

#include <cstddef>
#include <exception>
#include <optional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace recomb::parallel {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

/// Monte Carlo work is cut into fixed-size chunks; one chunk is one task
/// with its own random substream, so results never depend on the thread
/// count.
inline constexpr std::size_t kChunk = 1024;

inline std::size_t chunk_count(std::size_t samples) {
  return (samples + kChunk - 1) / kChunk;
}

/// Runs fn(task) for task in [0, tasks) on the worker pool and returns the
/// results indexed by task. Reduction is left to the caller, in task order.
/// The first exception thrown by any task is rethrown after the loop.
template <class Result, class Fn>
std::vector<Result> map_tasks(std::size_t tasks, Fn&& fn) {
  std::vector<std::optional<Result>> slots(tasks);
  std::exception_ptr failure;
  const long long count = static_cast<long long>(tasks);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      slots[static_cast<std::size_t>(i)].emplace(fn(static_cast<std::size_t>(i)));
    } catch (...) {
#pragma omp critical(recomb_map_tasks_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<Result> out;
  out.reserve(tasks);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace recomb::parallel
