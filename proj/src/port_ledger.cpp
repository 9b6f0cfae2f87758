#include "memsched/port_ledger.hpp"

namespace memsched {

PortLedger::PortLedger(const std::vector<MemoryBank> &banks) {
  for (const auto &b : banks)
    ports_.emplace(b.id, b.ports);
}

int PortLedger::ports(std::string_view bank) const {
  auto it = ports_.find(bank);
  return it == ports_.end() ? 0 : it->second;
}

bool PortLedger::is_free(const std::string &bank, int port,
                         Interval window) const {
  if (port < 0 || port >= ports(bank))
    return false;
  auto it = bookings_.find({bank, port});
  if (it == bookings_.end())
    return true;
  const auto &booked = it->second;
  // Bookings are disjoint and sorted, so the last one starting before the
  // window ends is the only candidate for overlap.
  auto next = booked.lower_bound(Interval{window.end, window.end});
  if (next == booked.begin())
    return true;
  return std::prev(next)->end <= window.start;
}

std::vector<int> PortLedger::find_free_ports(const std::string &bank, int count,
                                             Interval window) const {
  std::vector<int> found;
  for (int p = 0; p < ports(bank) && static_cast<int>(found.size()) < count; ++p)
    if (is_free(bank, p, window))
      found.push_back(p);
  if (static_cast<int>(found.size()) < count)
    found.clear();
  return found;
}

void PortLedger::book(const std::string &bank, int port, Interval window) {
  if (window.end <= window.start)
    throw Error(ErrorCode::InconsistentSchedule,
                "empty booking on " + bank + " port " + std::to_string(port));
  if (!is_free(bank, port, window))
    throw Error(ErrorCode::InconsistentSchedule,
                "port " + bank + "/" + std::to_string(port) + " busy over [" +
                    std::to_string(window.start) + ", " +
                    std::to_string(window.end) + ")");
  bookings_[{bank, port}].insert(window);
}

} // namespace memsched
