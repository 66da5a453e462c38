#pragma once

#include <cstddef>
#include <functional>

namespace egdeg {

/// Worker count: explicit override if set, otherwise EGDEG_WORKERS, otherwise 1.
int worker_count();
void set_worker_count(int n);  // 0 restores the environment default

/// Runs body(i) for i in [0, n). Each index is visited exactly once and
/// bodies must only write to per-index storage, so results never depend on
/// the pool size.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace egdeg
