#include "memsched/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace memsched {

int Allocation::count(std::string_view class_name) const {
  auto it = counts.find(std::string(class_name));
  return it == counts.end() ? 0 : it->second;
}

std::string_view to_string(Policy policy) {
  return policy == Policy::Baseline ? "baseline" : "mem-aware";
}

Policy parse_policy(std::string_view text) {
  if (text == "baseline")
    return Policy::Baseline;
  if (text == "mem-aware")
    return Policy::MemoryAware;
  throw Error(ErrorCode::InvalidConfig,
              "unknown policy \"" + std::string(text) + "\"");
}

void SchedulerConfig::validate() const {
  if (time_constraint_cycles < 1)
    throw Error(ErrorCode::InvalidConfig, "time constraint must be positive");
  if (step_cycles != 1)
    throw Error(ErrorCode::InvalidConfig, "step_cycles is fixed to 1");
  if (pipeline_slices != 1)
    throw Error(ErrorCode::InvalidConfig, "pipeline_slices is fixed to 1");
  if (!(model2_reduction >= 0.25 && model2_reduction <= 0.50))
    throw Error(ErrorCode::InvalidConfig,
                "model-2 reduction must lie in [0.25, 0.50]");
}

std::vector<const ScheduleEntry *> Schedule::ordered() const {
  std::vector<const ScheduleEntry *> out;
  out.reserve(entries.size());
  for (const auto &[id, e] : entries)
    out.push_back(&e);
  std::stable_sort(out.begin(), out.end(), [](const auto *a, const auto *b) {
    return a->start_cycle < b->start_cycle;
  });
  return out;
}

Allocation compute_min_allocation(const Dfg &g, const Library &library,
                                  int time_constraint_cycles) {
  if (time_constraint_cycles < 1)
    throw Error(ErrorCode::InvalidConfig, "time constraint must be positive");
  int cp = critical_path_length(g, library);
  if (cp > time_constraint_cycles)
    throw Error(ErrorCode::InfeasibleConstraint,
                "critical path " + std::to_string(cp) +
                    " cycles exceeds time constraint " +
                    std::to_string(time_constraint_cycles));
  std::map<std::string, long long> work;
  for (const auto &op : g.operations) {
    const auto &cls = library.class_of(op.opcode);
    work[cls.name] += cls.latency_cycles;
  }
  Allocation alloc;
  for (const auto &[name, cycles] : work) {
    long long n = (cycles + time_constraint_cycles - 1) / time_constraint_cycles;
    alloc.counts[name] = static_cast<int>(std::max(1LL, n));
  }
  return alloc;
}

int model2_affinity(const Operation &op, const OperatorInstanceState &inst,
                    const Library &library, bool positional) {
  const auto &cls = library.class_of(op.opcode);
  if (cls.name != inst.class_name)
    throw Error(ErrorCode::ClassMismatch,
                "operation " + op.id + " (" + cls.name +
                    ") cannot run on a " + inst.class_name + " instance",
                {op.id, inst.class_name});
  if (!inst.last_operand_sources)
    return 0;
  const auto &last = *inst.last_operand_sources;
  int shared = 0;
  if (positional) {
    for (std::size_t i = 0; i < op.operands.size() && i < last.size(); ++i)
      if (op.operands[i] == last[i])
        ++shared;
    return shared;
  }
  std::map<std::string, int> pool;
  for (const auto &d : last)
    ++pool[d.name];
  for (const auto &d : op.operands) {
    auto it = pool.find(d.name);
    if (it != pool.end() && it->second > 0) {
      --it->second;
      ++shared;
    }
  }
  return shared;
}

namespace {

struct Pred {
  std::size_t op;
  std::optional<std::string> data;
};

struct OpInfo {
  const Operation *op = nullptr;
  const OperatorClass *cls = nullptr;
  std::vector<Pred> preds;
  // Memory-aware only.
  std::map<std::string, int> reads;
  std::optional<std::string> write_bank;
  std::map<std::string, const MemoryBank *> operand_bank;
};

struct Attempt {
  std::optional<Schedule> schedule;
  std::vector<std::string> late;
};

// Ports chosen for one operation at one cycle.
struct PortPlan {
  std::vector<PortBooking> reads;
  std::optional<PortBooking> write;
};

class ListScheduler {
public:
  ListScheduler(const Dfg &g, const Library &library, const Allocation &alloc,
                const MemoryMapping *m, const SchedulerConfig &cfg)
      : g_(g), library_(library), alloc_(alloc), mapping_(m), cfg_(cfg) {
    const std::size_t n = g.operations.size();
    info_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto &info = info_[i];
      info.op = &g.operations[i];
      info.cls = &library.class_of(info.op->opcode);
      if (alloc.count(info.cls->name) < 1)
        throw Error(ErrorCode::InvalidConfig,
                    "allocation has no " + info.cls->name + " instance",
                    {info.cls->name});
      if (m != nullptr) {
        auto req = access_requirements(*info.op, *m);
        info.reads = req.reads;
        if (!req.writes.empty())
          info.write_bank = req.writes.begin()->first;
        for (const auto &arg : info.op->operands) {
          auto loc = m->locate(arg);
          if (loc && !loc->in_register())
            info.operand_bank[arg.name] = loc->bank;
        }
      }
    }
    for (const auto &e : dependency_edges(g))
      info_[e.to].preds.push_back(Pred{e.from, e.data});
  }

  Attempt run(int time_constraint, const TimingAnalysis &timing) const {
    const std::size_t n = info_.size();
    std::map<std::string, std::vector<OperatorInstanceState>> instances;
    for (const auto &info : info_) {
      auto &pool = instances[info.cls->name];
      if (pool.empty())
        for (int k = 0; k < alloc_.count(info.cls->name); ++k)
          pool.push_back(OperatorInstanceState{info.cls->name, k, 0, std::nullopt});
    }
    PortLedger ledger(mapping_ != nullptr ? mapping_->banks
                                          : std::vector<MemoryBank>{});
    std::vector<std::optional<ScheduleEntry>> placed(n);
    std::size_t remaining = n;

    struct Candidate {
      std::size_t op;
      int priority;
      int affinity;
    };

    for (int t = 0; t < time_constraint && remaining > 0; t += cfg_.step_cycles) {
      while (true) {
        std::vector<Candidate> ready;
        for (std::size_t i = 0; i < n; ++i) {
          if (placed[i] || !dependencies_met(i, t, placed))
            continue;
          const auto &pool = instances.at(info_[i].cls->name);
          int best = -1;
          for (const auto &inst : pool) {
            if (inst.busy_until_cycle > t)
              continue;
            int a = cfg_.affinity_binding ? affinity(i, inst) : 0;
            best = std::max(best, a);
          }
          if (best < 0)
            continue; // no free instance of this class
          const auto &id = info_[i].op->id;
          int priority = cfg_.dynamic_mobility ? timing.alap.at(id) - t
                                               : timing.mobility.at(id);
          ready.push_back(Candidate{i, priority, best});
        }
        if (ready.empty())
          break;
        std::sort(ready.begin(), ready.end(),
                  [&](const Candidate &a, const Candidate &b) {
                    if (a.priority != b.priority)
                      return a.priority < b.priority;
                    if (a.affinity != b.affinity)
                      return a.affinity > b.affinity;
                    return info_[a.op].op->id < info_[b.op].op->id;
                  });

        // First operation in priority order whose access operators are free.
        std::optional<std::pair<std::size_t, PortPlan>> chosen;
        for (const auto &c : ready) {
          if (auto plan = plan_ports(c.op, t, ledger)) {
            chosen.emplace(c.op, std::move(*plan));
            break;
          }
        }
        if (!chosen)
          break;

        auto [i, plan] = std::move(*chosen);
        const auto &info = info_[i];
        auto &pool = instances.at(info.cls->name);
        OperatorInstanceState *target = nullptr;
        int target_affinity = -1;
        for (auto &inst : pool) {
          if (inst.busy_until_cycle > t)
            continue;
          int a = cfg_.affinity_binding ? affinity(i, inst) : 0;
          if (a > target_affinity) {
            target = &inst;
            target_affinity = a;
          }
        }

        ScheduleEntry entry;
        entry.op_id = info.op->id;
        entry.start_cycle = t;
        entry.end_cycle = t + info.cls->latency_cycles;
        entry.instance = InstanceRef{target->class_name, target->instance_index};
        entry.is_model2 = affinity(i, *target) > 0;
        for (const auto &b : plan.reads)
          ledger.book(b.bank, b.port, b.interval);
        if (plan.write)
          ledger.book(plan.write->bank, plan.write->port, plan.write->interval);
        entry.read_bookings = std::move(plan.reads);
        entry.write_booking = std::move(plan.write);

        target->busy_until_cycle = entry.end_cycle;
        target->last_operand_sources = info.op->operands;
        placed[i] = std::move(entry);
        --remaining;
      }
    }

    Attempt attempt;
    Schedule s;
    for (std::size_t i = 0; i < n; ++i) {
      if (!placed[i]) {
        attempt.late.push_back(info_[i].op->id);
        continue;
      }
      s.makespan_cycles =
          std::max(s.makespan_cycles, placed[i]->available_cycle());
      if (placed[i]->available_cycle() > time_constraint)
        attempt.late.push_back(info_[i].op->id);
      s.entries.emplace(info_[i].op->id, std::move(*placed[i]));
    }
    std::sort(attempt.late.begin(), attempt.late.end());
    if (attempt.late.empty()) {
      s.policy = cfg_.policy;
      s.config = cfg_;
      s.config.time_constraint_cycles = time_constraint;
      attempt.schedule = std::move(s);
    }
    return attempt;
  }

private:
  int affinity(std::size_t i, const OperatorInstanceState &inst) const {
    return model2_affinity(*info_[i].op, inst, library_, cfg_.positional_affinity);
  }

  bool memory_aware() const { return mapping_ != nullptr; }

  bool dependencies_met(std::size_t v, int t,
                        const std::vector<std::optional<ScheduleEntry>> &placed) const {
    for (const auto &p : info_[v].preds) {
      if (!placed[p.op])
        return false;
      int needed_by = t;
      if (memory_aware() && p.data) {
        auto it = info_[v].operand_bank.find(*p.data);
        if (it != info_[v].operand_bank.end())
          needed_by = t - it->second->read_latency_cycles;
      }
      if (placed[p.op]->available_cycle() > needed_by)
        return false;
    }
    return true;
  }

  std::optional<PortPlan> plan_ports(std::size_t i, int t,
                                     const PortLedger &ledger) const {
    PortPlan plan;
    if (!memory_aware())
      return plan;
    const auto &info = info_[i];
    for (const auto &[bank_id, count] : info.reads) {
      const auto *bank = mapping_->find_bank(bank_id);
      Interval window{t - bank->read_latency_cycles, t};
      if (window.start < 0)
        return std::nullopt;
      auto ports = ledger.find_free_ports(bank_id, count, window);
      if (ports.empty())
        return std::nullopt;
      for (int p : ports)
        plan.reads.push_back(PortBooking{bank_id, p, window});
    }
    if (info.write_bank) {
      const auto *bank = mapping_->find_bank(*info.write_bank);
      int end = t + info.cls->latency_cycles;
      Interval window{end, end + bank->write_latency_cycles};
      auto ports = ledger.find_free_ports(*info.write_bank, 1, window);
      if (ports.empty())
        return std::nullopt;
      plan.write = PortBooking{*info.write_bank, ports.front(), window};
    }
    return plan;
  }

  const Dfg &g_;
  const Library &library_;
  const Allocation &alloc_;
  const MemoryMapping *mapping_;
  const SchedulerConfig &cfg_;
  std::vector<OpInfo> info_;
};

std::string join(const std::vector<std::string> &ids) {
  std::string out;
  for (const auto &id : ids)
    out += (out.empty() ? "" : ", ") + id;
  return out;
}

Schedule run_list(const Dfg &g, const Library &library, const Allocation &alloc,
                  const MemoryMapping *m, const SchedulerConfig &cfg,
                  const TimingAnalysis &timing) {
  cfg.validate();
  if (timing.time_constraint_cycles != cfg.time_constraint_cycles)
    throw Error(ErrorCode::InvalidConfig,
                "timing analysis was computed for a different time constraint");
  if (timing.critical_path_cycles > cfg.time_constraint_cycles)
    throw Error(ErrorCode::InfeasibleConstraint,
                "critical path " + std::to_string(timing.critical_path_cycles) +
                    " cycles exceeds time constraint " +
                    std::to_string(cfg.time_constraint_cycles));

  ListScheduler scheduler(g, library, alloc, m, cfg);
  Attempt attempt = scheduler.run(cfg.time_constraint_cycles, timing);
  if (attempt.schedule)
    return std::move(*attempt.schedule);

  // Report the smallest of 2T, 4T, 8T that would have worked.
  std::optional<int> suggestion;
  for (int factor = 2; factor <= 8 && !suggestion; factor *= 2) {
    int relaxed = cfg.time_constraint_cycles * factor;
    if (scheduler.run(relaxed, compute_timing(g, library, relaxed)).schedule)
      suggestion = relaxed;
  }
  std::string msg = "operations not finished by cycle " +
                    std::to_string(cfg.time_constraint_cycles) + ": " +
                    join(attempt.late);
  msg += suggestion ? "; suggested time constraint " + std::to_string(*suggestion)
                    : "; no feasible time constraint up to 8x";
  throw TimeConstraintViolated(msg, attempt.late, suggestion);
}

} // namespace

Schedule schedule_baseline(const Dfg &g, const Library &library,
                           const Allocation &alloc, const SchedulerConfig &cfg,
                           const TimingAnalysis &timing) {
  if (cfg.policy != Policy::Baseline)
    throw Error(ErrorCode::InvalidConfig, "schedule_baseline needs policy baseline");
  return run_list(g, library, alloc, nullptr, cfg, timing);
}

Schedule schedule_memory_aware(const Dfg &g, const Library &library,
                               const Allocation &alloc, const MemoryMapping &m,
                               const SchedulerConfig &cfg,
                               const TimingAnalysis &timing) {
  if (cfg.policy != Policy::MemoryAware)
    throw Error(ErrorCode::InvalidConfig,
                "schedule_memory_aware needs policy mem-aware");
  auto diags = validate_mapping(m, g);
  if (!diags.empty())
    throw Error(ErrorCode::MappingInfeasible,
                "mapping cannot serve every operation: " + diags.front().format(),
                diags.front().ids);
  return run_list(g, library, alloc, &m, cfg, timing);
}

Schedule run_scheduler(const Dfg &g, const Library &library,
                       const Allocation &alloc, const MemoryMapping *m,
                       const SchedulerConfig &cfg) {
  cfg.validate();
  auto timing = compute_timing(g, library, cfg.time_constraint_cycles);
  if (cfg.policy == Policy::Baseline)
    return schedule_baseline(g, library, alloc, cfg, timing);
  if (m == nullptr)
    throw Error(ErrorCode::InvalidConfig, "mem-aware policy needs a mapping");
  return schedule_memory_aware(g, library, alloc, *m, cfg, timing);
}

} // namespace memsched
