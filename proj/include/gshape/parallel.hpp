#pragma once

#include <cstddef>
#include <functional>

namespace gshape {

/// Worker count used by the estimators and the optimiser (0 = hardware).
void set_thread_count(int threads);
int thread_count();

/// Runs body(b) for b in [0, blocks). Each block must write only its own
/// output slot; callers reduce the slots in index order, so results do not
/// depend on the number of workers.
void parallel_for(std::size_t blocks, const std::function<void(std::size_t)>& body);

}  // namespace gshape
