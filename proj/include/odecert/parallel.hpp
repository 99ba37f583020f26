#pragma once

#include <cstdint>
#include <functional>

namespace odecert {

/// Runs fn(index) for index in [0, n) on up to `jobs` threads. Work is split
/// into contiguous ranges; callers that need deterministic aggregation store
/// per-index results and reduce in index order afterwards.
void parallel_for(std::int64_t n, int jobs, const std::function<void(std::int64_t)>& fn);

/// Sums v pairwise in index order (deterministic regardless of thread count).
double pairwise_sum(const double* v, std::int64_t n);

}  // namespace odecert
