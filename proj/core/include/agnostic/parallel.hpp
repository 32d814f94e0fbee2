#pragma once

#include <cstddef>
#include <functional>

namespace agnostic {

// Number of worker threads used by parallel_for. Defaults to the hardware
// concurrency. Results never depend on this value: work is split into
// fixed tasks and every reduction is done in task order.
void set_worker_threads(unsigned n);
unsigned worker_threads();

// Runs task(i) for i in [0, n_tasks). Rethrows the first exception.
void parallel_for(std::size_t n_tasks, const std::function<void(std::size_t)>& task);

// Fixed block size used to split sample ranges into tasks.
inline constexpr std::size_t kSampleBlock = 4096;

inline std::size_t block_count(std::size_t n, std::size_t block = kSampleBlock) {
  return (n + block - 1) / block;
}

}  // namespace agnostic
