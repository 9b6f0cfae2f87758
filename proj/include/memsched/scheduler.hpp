#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "memsched/dfg.hpp"
#include "memsched/memmap.hpp"
#include "memsched/port_ledger.hpp"

namespace memsched {

/// Operator instances per class.
struct Allocation {
  std::map<std::string, int> counts;

  int count(std::string_view class_name) const;
};

enum class Policy { Baseline, MemoryAware };

std::string_view to_string(Policy policy);
/// Accepts "baseline" and "mem-aware".
Policy parse_policy(std::string_view text);

struct SchedulerConfig {
  int time_constraint_cycles = 1;
  int step_cycles = 1;     // reserved, must be 1
  int pipeline_slices = 1; // reserved, must be 1
  Policy policy = Policy::Baseline;
  double model2_reduction = 0.25;

  /// Priority alap - t instead of the static mobility.
  bool dynamic_mobility = false;
  /// Count shared inputs by operand position rather than by value.
  bool positional_affinity = false;
  /// When false, ready operations are ordered by (mobility, id) only and
  /// bound to the lowest-indexed free instance.
  bool affinity_binding = true;
  /// Scale the model-2 reduction by the fraction of shared inputs.
  bool per_shared_input_energy = false;

  /// Throws InvalidConfig when a reserved field or the reduction is out of
  /// range.
  void validate() const;
};

struct OperatorInstanceState {
  std::string class_name;
  int instance_index = 0;
  int busy_until_cycle = 0;
  /// Operands of the last operation executed here; empty before the first.
  std::optional<std::vector<DataRef>> last_operand_sources;
};

struct PortBooking {
  std::string bank;
  int port = 0;
  Interval interval;

  bool operator==(const PortBooking &) const = default;
};

struct InstanceRef {
  std::string class_name;
  int index = 0;

  bool operator==(const InstanceRef &) const = default;
  bool operator<(const InstanceRef &o) const {
    return class_name != o.class_name ? class_name < o.class_name
                                      : index < o.index;
  }
};

struct ScheduleEntry {
  std::string op_id;
  int start_cycle = 0;
  int end_cycle = 0;
  InstanceRef instance;
  std::vector<PortBooking> read_bookings;
  std::optional<PortBooking> write_booking;
  bool is_model2 = false;

  /// Cycle at which the result can be consumed: end of the write when the
  /// result goes to memory, else end_cycle.
  int available_cycle() const {
    return write_booking ? write_booking->interval.end : end_cycle;
  }
  bool operator==(const ScheduleEntry &) const = default;
};

struct Schedule {
  std::map<std::string, ScheduleEntry> entries;
  int makespan_cycles = 0;
  Policy policy = Policy::Baseline;
  SchedulerConfig config;

  /// Entries sorted by (start, op id).
  std::vector<const ScheduleEntry *> ordered() const;
};

Allocation compute_min_allocation(const Dfg &g, const Library &library,
                                  int time_constraint_cycles);

/// Number of inputs `op` shares with the last operation run on `inst`:
/// multiset intersection of operand names, or position-wise equality when
/// `positional`. Throws ClassMismatch when the instance cannot run `op`.
int model2_affinity(const Operation &op, const OperatorInstanceState &inst,
                    const Library &library, bool positional = false);

/// Time-stepped list scheduling ignoring memory placement.
Schedule schedule_baseline(const Dfg &g, const Library &library,
                           const Allocation &alloc, const SchedulerConfig &cfg,
                           const TimingAnalysis &timing);

/// List scheduling where an operation additionally needs free fictive
/// access operators (bank ports) over its read and write windows.
Schedule schedule_memory_aware(const Dfg &g, const Library &library,
                               const Allocation &alloc, const MemoryMapping &m,
                               const SchedulerConfig &cfg,
                               const TimingAnalysis &timing);

/// Dispatches on cfg.policy after computing timing. `m` is required for
/// MemoryAware.
Schedule run_scheduler(const Dfg &g, const Library &library,
                       const Allocation &alloc, const MemoryMapping *m,
                       const SchedulerConfig &cfg);

} // namespace memsched
