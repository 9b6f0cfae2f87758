#pragma once

#include <iterator>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "memsched/memmap.hpp"

namespace memsched {

/// Half-open cycle interval [start, end).
struct Interval {
  int start = 0;
  int end = 0;

  bool overlaps(const Interval &o) const { return start < o.end && o.start < end; }
  bool operator==(const Interval &) const = default;
  bool operator<(const Interval &o) const {
    return start != o.start ? start < o.start : end < o.end;
  }
};

/// Free/busy bookkeeping for the fictive memory-access operators: one
/// bookable resource per (bank, port). Intervals on a port never overlap.
class PortLedger {
public:
  using Key = std::pair<std::string, int>;

  PortLedger() = default;
  explicit PortLedger(const std::vector<MemoryBank> &banks);

  int ports(std::string_view bank) const;
  bool is_free(const std::string &bank, int port, Interval window) const;
  /// The `count` lowest-indexed ports free over `window`, or an empty
  /// vector when fewer are available.
  std::vector<int> find_free_ports(const std::string &bank, int count,
                                   Interval window) const;
  /// Throws InconsistentSchedule on overlap or an out-of-range port.
  void book(const std::string &bank, int port, Interval window);

  const std::map<Key, std::set<Interval>> &bookings() const { return bookings_; }

private:
  std::map<std::string, int, std::less<>> ports_;
  std::map<Key, std::set<Interval>> bookings_;
};

} // namespace memsched
