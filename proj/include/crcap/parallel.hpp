#pragma once

#include <cstddef>
#include <functional>

namespace crcap {

/// Worker count from CRCAP_WORKERS, else the hardware concurrency (at least 1).
int default_worker_count();

/// Runs task(i) for i in [0, count) on up to `workers` threads (0 = default).
/// Tasks are claimed in index order; the first exception thrown is rethrown
/// after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task, int workers = 0);

}  // namespace crcap
