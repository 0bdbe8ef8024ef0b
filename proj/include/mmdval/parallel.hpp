#pragma once

#include <cstddef>
#include <functional>

namespace mmdval {

/// Worker count used by the blocked kernel routines. 0 means hardware concurrency.
void set_num_threads(unsigned threads);
unsigned num_threads();

/// Runs body(task) for task in [0, tasks). Tasks are independent and write to
/// disjoint outputs, so results do not depend on the worker count.
void parallel_for(std::size_t tasks, const std::function<void(std::size_t)>& body);

} // namespace mmdval
