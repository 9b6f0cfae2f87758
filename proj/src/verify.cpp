#include "memsched/verify.hpp"

#include <algorithm>
#include <set>

namespace memsched {

namespace {

std::string window(Interval w) {
  return "[" + std::to_string(w.start) + ", " + std::to_string(w.end) + ")";
}

} // namespace

std::vector<std::string> verify_schedule(const Schedule &s, const Dfg &g,
                                         const Library &library,
                                         const Allocation &alloc,
                                         const MemoryMapping *m) {
  std::vector<std::string> out;
  auto fail = [&](std::string msg) { out.push_back(std::move(msg)); };

  std::set<std::string> ids;
  for (const auto &op : g.operations) {
    ids.insert(op.id);
    if (s.entries.count(op.id) == 0)
      fail("missing entry for " + op.id);
  }
  for (const auto &[id, e] : s.entries)
    if (ids.count(id) == 0)
      fail("entry for unknown operation " + id);
  if (!out.empty())
    return out;

  std::map<InstanceRef, std::vector<const ScheduleEntry *>> per_instance;
  int makespan = 0;
  for (const auto &op : g.operations) {
    const auto &e = s.entries.at(op.id);
    const auto &cls = library.class_of(op.opcode);
    if (e.start_cycle < 0)
      fail(op.id + " starts at negative cycle");
    if (e.end_cycle - e.start_cycle != cls.latency_cycles)
      fail(op.id + " occupies " + std::to_string(e.end_cycle - e.start_cycle) +
           " cycles, class latency " + std::to_string(cls.latency_cycles));
    if (e.instance.class_name != cls.name)
      fail(op.id + " bound to class " + e.instance.class_name);
    if (e.instance.index < 0 || e.instance.index >= alloc.count(cls.name))
      fail(op.id + " bound to instance " + std::to_string(e.instance.index) +
           " of " + std::to_string(alloc.count(cls.name)));
    per_instance[e.instance].push_back(&e);
    makespan = std::max(makespan, e.available_cycle());
  }

  for (auto &[inst, list] : per_instance) {
    std::sort(list.begin(), list.end(), [](const auto *a, const auto *b) {
      return a->start_cycle < b->start_cycle;
    });
    for (std::size_t i = 1; i < list.size(); ++i)
      if (list[i]->start_cycle < list[i - 1]->end_cycle)
        fail(inst.class_name + "#" + std::to_string(inst.index) +
             " runs " + list[i - 1]->op_id + " and " + list[i]->op_id +
             " concurrently");
  }

  for (const auto &edge : dependency_edges(g)) {
    const auto &u = g.operations[edge.from];
    const auto &v = g.operations[edge.to];
    const auto &eu = s.entries.at(u.id);
    const auto &ev = s.entries.at(v.id);
    int ready = eu.available_cycle();
    if (ev.start_cycle < ready)
      fail(v.id + " starts at " + std::to_string(ev.start_cycle) +
           " before " + u.id + " is available at " + std::to_string(ready));
    if (m != nullptr && edge.data) {
      auto loc = m->locate(DataRef::parse(*edge.data));
      if (loc && !loc->in_register()) {
        for (const auto &b : ev.read_bookings)
          if (b.bank == loc->bank->id && b.interval.start < ready)
            fail(v.id + " reads " + *edge.data + " from " + b.bank +
                 " before it is written");
      }
    }
  }

  if (m == nullptr) {
    for (const auto &[id, e] : s.entries)
      if (!e.read_bookings.empty() || e.write_booking)
        fail(id + " books memory ports without a mapping");
  } else {
    std::map<std::pair<std::string, int>, std::vector<std::pair<Interval, std::string>>>
        port_use;
    for (const auto &op : g.operations) {
      const auto &e = s.entries.at(op.id);
      auto req = access_requirements(op, *m);
      std::map<std::string, std::set<int>> ports_by_bank;
      for (const auto &b : e.read_bookings) {
        const auto *bank = m->find_bank(b.bank);
        if (bank == nullptr) {
          fail(op.id + " books unknown bank " + b.bank);
          continue;
        }
        Interval expected{e.start_cycle - bank->read_latency_cycles, e.start_cycle};
        if (!(b.interval == expected))
          fail(op.id + " read window " + window(b.interval) + " on " + b.bank +
               ", expected " + window(expected));
        if (b.port < 0 || b.port >= bank->ports)
          fail(op.id + " uses port " + std::to_string(b.port) + " of " + b.bank);
        if (!ports_by_bank[b.bank].insert(b.port).second)
          fail(op.id + " books port " + std::to_string(b.port) + " of " +
               b.bank + " twice");
        port_use[{b.bank, b.port}].emplace_back(b.interval, op.id);
      }
      for (const auto &[bank, count] : req.reads)
        if (static_cast<int>(ports_by_bank[bank].size()) != count)
          fail(op.id + " needs " + std::to_string(count) + " reads on " + bank +
               ", booked " + std::to_string(ports_by_bank[bank].size()));
      for (const auto &[bank, ports] : ports_by_bank)
        if (req.reads.count(bank) == 0)
          fail(op.id + " books unneeded reads on " + bank);

      if (req.writes.empty()) {
        if (e.write_booking)
          fail(op.id + " books a write for a register result");
      } else if (!e.write_booking) {
        fail(op.id + " has no write booking");
      } else {
        const auto &w = *e.write_booking;
        const auto *bank = m->find_bank(w.bank);
        if (bank == nullptr || w.bank != req.writes.begin()->first) {
          fail(op.id + " writes to the wrong bank " + w.bank);
        } else {
          Interval expected{e.end_cycle, e.end_cycle + bank->write_latency_cycles};
          if (!(w.interval == expected))
            fail(op.id + " write window " + window(w.interval) + ", expected " +
                 window(expected));
          if (w.port < 0 || w.port >= bank->ports)
            fail(op.id + " uses port " + std::to_string(w.port) + " of " + w.bank);
          port_use[{w.bank, w.port}].emplace_back(w.interval, op.id);
        }
      }
    }
    for (auto &[key, uses] : port_use) {
      std::sort(uses.begin(), uses.end());
      for (std::size_t i = 1; i < uses.size(); ++i)
        if (uses[i].first.overlaps(uses[i - 1].first))
          fail("port " + key.first + "/" + std::to_string(key.second) +
               " double-booked by " + uses[i - 1].second + " and " +
               uses[i].second);
    }
  }

  if (s.makespan_cycles != makespan)
    fail("makespan " + std::to_string(s.makespan_cycles) + " but entries end at " +
         std::to_string(makespan));
  if (makespan > s.config.time_constraint_cycles)
    fail("makespan " + std::to_string(makespan) + " exceeds time constraint " +
         std::to_string(s.config.time_constraint_cycles));
  return out;
}

} // namespace memsched
