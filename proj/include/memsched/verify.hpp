#pragma once

#include <string>
#include <vector>

#include "memsched/scheduler.hpp"

namespace memsched {

/// Checks a schedule against every structural rule: one entry per
/// operation, class latencies, instance limits and exclusivity, dependency
/// timing and, when `m` is given, read/write windows and port exclusivity.
/// Returns one human-readable line per violation; empty means safe.
std::vector<std::string> verify_schedule(const Schedule &s, const Dfg &g,
                                         const Library &library,
                                         const Allocation &alloc,
                                         const MemoryMapping *m);

} // namespace memsched
