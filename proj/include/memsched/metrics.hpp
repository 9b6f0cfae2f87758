#pragma once

#include <map>
#include <string>

#include "memsched/scheduler.hpp"

namespace memsched {

struct BankStats {
  int accesses = 0;
  int peak_simultaneous_requests = 0;
  int port_conflict_cycles = 0;

  bool operator==(const BankStats &) const = default;
};

struct ScheduleMetrics {
  int makespan_cycles = 0;
  int op_count = 0;
  int model2_count = 0;
  double model2_ratio = 0.0;
  double datapath_energy = 0.0;
  double memory_energy = 0.0;
  std::map<std::string, BankStats> per_bank;
  int total_conflicts = 0;

  bool operator==(const ScheduleMetrics &) const = default;
};

struct ComparisonReport {
  ScheduleMetrics left;
  ScheduleMetrics right;
  int makespan_delta = 0;
  double datapath_energy_delta = 0.0;
  double memory_energy_delta = 0.0;
  double energy_delta = 0.0; // datapath + memory
  int model2_delta = 0;
  int conflict_delta = 0;
  std::string verdict;
};

/// Memory statistics come from the port bookings of memory-aware schedules.
/// Baseline schedules are replayed against `m`: each operation requests its
/// reads over [start - read_latency, start) and its write over
/// [end, end + write_latency); a conflict cycle is one where a bank receives
/// more requests than it has ports.
ScheduleMetrics analyze(const Schedule &s, const Dfg &g, const Library &library,
                        const MemoryMapping &m, const SchedulerConfig &cfg);

/// Deltas are right - left. Throws MismatchedInputs when op counts differ.
ComparisonReport compare(const ScheduleMetrics &left,
                         const ScheduleMetrics &right);

} // namespace memsched
