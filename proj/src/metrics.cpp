#include "memsched/metrics.hpp"

#include <algorithm>
#include <sstream>

namespace memsched {

namespace {

struct BankLoad {
  std::map<int, int> requests_per_cycle;
  int accesses = 0;

  void request(Interval w, int count) {
    accesses += count;
    for (int c = w.start; c < w.end; ++c)
      requests_per_cycle[c] += count;
  }
};

} // namespace

ScheduleMetrics analyze(const Schedule &s, const Dfg &g, const Library &library,
                        const MemoryMapping &m, const SchedulerConfig &cfg) {
  cfg.validate();
  if (s.entries.size() != g.operations.size())
    throw Error(ErrorCode::InconsistentSchedule,
                "schedule has " + std::to_string(s.entries.size()) +
                    " entries for " + std::to_string(g.operations.size()) +
                    " operations");
  for (const auto &op : g.operations)
    if (s.entries.count(op.id) == 0)
      throw Error(ErrorCode::InconsistentSchedule, "no entry for " + op.id,
                  {op.id});

  ScheduleMetrics out;
  out.makespan_cycles = s.makespan_cycles;
  out.op_count = static_cast<int>(g.operations.size());

  // Replay each instance in start order to recover how many inputs every
  // operation shares with its predecessor on that instance.
  std::map<InstanceRef, std::vector<const Operation *>> per_instance;
  for (const auto &op : g.operations)
    per_instance[s.entries.at(op.id).instance].push_back(&op);
  std::map<std::string, int> shared;
  for (auto &[inst, ops] : per_instance) {
    std::stable_sort(ops.begin(), ops.end(), [&](const auto *a, const auto *b) {
      return s.entries.at(a->id).start_cycle < s.entries.at(b->id).start_cycle;
    });
    OperatorInstanceState state{inst.class_name, inst.index, 0, std::nullopt};
    for (const auto *op : ops) {
      shared[op->id] =
          model2_affinity(*op, state, library, cfg.positional_affinity);
      state.last_operand_sources = op->operands;
    }
  }

  for (const auto &op : g.operations) {
    const auto &e = s.entries.at(op.id);
    double base = library.class_of(op.opcode).base_energy;
    if (!e.is_model2) {
      out.datapath_energy += base;
      continue;
    }
    ++out.model2_count;
    double reduction = cfg.model2_reduction;
    if (cfg.per_shared_input_energy) {
      std::size_t inputs = op.operands.size();
      reduction *= std::min(1.0, static_cast<double>(shared[op.id]) /
                                     static_cast<double>(inputs));
    }
    out.datapath_energy += base * (1.0 - reduction);
  }
  out.model2_ratio =
      out.op_count == 0 ? 0.0
                        : static_cast<double>(out.model2_count) / out.op_count;

  std::map<std::string, BankLoad> load;
  for (const auto &b : m.banks)
    load[b.id];
  if (s.policy == Policy::MemoryAware) {
    for (const auto &[id, e] : s.entries) {
      for (const auto &b : e.read_bookings)
        load[b.bank].request(b.interval, 1);
      if (e.write_booking)
        load[e.write_booking->bank].request(e.write_booking->interval, 1);
    }
  } else {
    for (const auto &op : g.operations) {
      const auto &e = s.entries.at(op.id);
      auto req = access_requirements(op, m);
      for (const auto &[bank_id, count] : req.reads) {
        const auto *bank = m.find_bank(bank_id);
        load[bank_id].request(
            Interval{e.start_cycle - bank->read_latency_cycles, e.start_cycle},
            count);
      }
      for (const auto &[bank_id, count] : req.writes) {
        const auto *bank = m.find_bank(bank_id);
        load[bank_id].request(
            Interval{e.end_cycle, e.end_cycle + bank->write_latency_cycles},
            count);
      }
    }
  }

  for (const auto &[bank_id, l] : load) {
    const auto *bank = m.find_bank(bank_id);
    if (bank == nullptr)
      throw Error(ErrorCode::InconsistentSchedule,
                  "booking on bank " + bank_id + " absent from the mapping",
                  {bank_id});
    BankStats stats;
    stats.accesses = l.accesses;
    for (const auto &[cycle, n] : l.requests_per_cycle) {
      stats.peak_simultaneous_requests =
          std::max(stats.peak_simultaneous_requests, n);
      if (n > bank->ports)
        ++stats.port_conflict_cycles;
    }
    out.total_conflicts += stats.port_conflict_cycles;
    out.memory_energy += stats.accesses * bank->energy_per_access;
    out.per_bank.emplace(bank_id, stats);
  }
  return out;
}

ComparisonReport compare(const ScheduleMetrics &left,
                         const ScheduleMetrics &right) {
  if (left.op_count != right.op_count)
    throw Error(ErrorCode::MismatchedInputs,
                "schedules cover " + std::to_string(left.op_count) + " and " +
                    std::to_string(right.op_count) + " operations");
  ComparisonReport r;
  r.left = left;
  r.right = right;
  r.makespan_delta = right.makespan_cycles - left.makespan_cycles;
  r.datapath_energy_delta = right.datapath_energy - left.datapath_energy;
  r.memory_energy_delta = right.memory_energy - left.memory_energy;
  r.energy_delta = (right.datapath_energy + right.memory_energy) -
                   (left.datapath_energy + left.memory_energy);
  r.model2_delta = right.model2_count - left.model2_count;
  r.conflict_delta = right.total_conflicts - left.total_conflicts;

  // Lower is better for every axis except the model-2 count.
  auto axis = [](const char *name, double delta, bool higher_wins) {
    std::string who = "tie";
    if (delta != 0.0)
      who = ((delta < 0.0) != higher_wins) ? "right" : "left";
    return std::string(name) + ": " + who + "\n";
  };
  std::ostringstream v;
  v << axis("makespan", r.makespan_delta, false)
    << axis("energy", r.energy_delta, false)
    << axis("model2", r.model2_delta, true)
    << axis("conflicts", r.conflict_delta, false);
  r.verdict = v.str();
  return r;
}

} // namespace memsched
