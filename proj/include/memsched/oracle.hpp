#pragma once

#include "memsched/scheduler.hpp"

namespace memsched {

struct OracleResult {
  int makespan = 0;
  Schedule witness;
};

inline constexpr std::size_t kOracleMaxOperations = 10;

/// Exhaustive branch-and-bound over start cycles, instance bindings and port
/// choices. Returns the minimal makespan not exceeding `max_cycles` and one
/// schedule achieving it. Throws TooLarge above kOracleMaxOperations and
/// Infeasible when nothing fits.
OracleResult bruteforce_optimal_makespan(const Dfg &g, const Library &library,
                                         const Allocation &alloc,
                                         const MemoryMapping *m,
                                         int max_cycles);

} // namespace memsched
