#pragma once

#include <string>
#include <string_view>

#include "memsched/metrics.hpp"
#include "memsched/scheduler.hpp"

namespace memsched {

/// Gantt chart: one row per operator instance, then one per bank port.
/// Pass `alloc` to also draw idle instances.
std::string export_gantt(const Schedule &s, const MemoryMapping &m,
                         const Allocation *alloc = nullptr);

/// `op,start,end,class,instance,model2` rows sorted by (start, op id).
std::string export_csv(const Schedule &s);
/// Reads export_csv output back; bookings are not part of the CSV.
Schedule parse_csv(std::string_view text);

std::string schedule_to_json(const Schedule &s);
Schedule schedule_from_json(std::string_view text);

std::string metrics_to_json(const ScheduleMetrics &metrics);
std::string comparison_to_json(const ComparisonReport &report);

} // namespace memsched
