#include "memsched/oracle.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>

namespace memsched {

namespace {

struct Node {
  const Operation *op = nullptr;
  const OperatorClass *cls = nullptr;
  int instances = 0;
  // (producer position, earliest-start offset): start >= avail(producer) + offset
  std::vector<std::pair<std::size_t, int>> preds;
  std::vector<std::pair<const MemoryBank *, int>> reads;
  const MemoryBank *write = nullptr;
  int tail = 0;      // longest latency path from this start to a sink end
  int min_start = 0; // read latency floor
};

struct Choice {
  int start = -1;
  int instance = -1;
  std::vector<PortBooking> reads;
  std::optional<PortBooking> write;
  int avail = 0;
};

using Busy = std::vector<Interval>;

bool free_over(const Busy &busy, Interval w) {
  return std::none_of(busy.begin(), busy.end(),
                      [&](const Interval &b) { return b.overlaps(w); });
}

// Every way to pick `count` distinct ports out of `ports`, lowest first.
void combinations(int ports, int count, std::vector<std::vector<int>> &out) {
  std::vector<int> pick;
  std::function<void(int)> rec = [&](int from) {
    if (static_cast<int>(pick.size()) == count) {
      out.push_back(pick);
      return;
    }
    for (int p = from; p < ports; ++p) {
      pick.push_back(p);
      rec(p + 1);
      pick.pop_back();
    }
  };
  rec(0);
}

class Search {
public:
  Search(const Dfg &g, const Library &library, const Allocation &alloc,
         const MemoryMapping *m, int max_cycles)
      : mapping_(m), best_(max_cycles + 1) {
    std::unordered_map<std::string, std::size_t> pos;
    for (const auto &id : topological_order(g)) {
      pos.emplace(id, nodes_.size());
      Node node;
      node.op = g.find(id);
      node.cls = &library.class_of(node.op->opcode);
      node.instances = alloc.count(node.cls->name);
      if (node.instances < 1)
        throw Error(ErrorCode::InvalidConfig,
                    "allocation has no " + node.cls->name + " instance");
      nodes_.push_back(node);
    }
    auto position = [&](std::size_t op_index) {
      return pos.at(g.operations[op_index].id);
    };

    for (auto &node : nodes_) {
      if (m == nullptr)
        continue;
      auto req = access_requirements(*node.op, *m);
      for (const auto &[bank, count] : req.reads) {
        node.reads.emplace_back(m->find_bank(bank), count);
        node.min_start = std::max(node.min_start,
                                  m->find_bank(bank)->read_latency_cycles);
      }
      if (!req.writes.empty())
        node.write = m->find_bank(req.writes.begin()->first);
    }
    for (const auto &e : dependency_edges(g)) {
      auto &node = nodes_[position(e.to)];
      int offset = 0;
      if (m != nullptr && e.data) {
        auto loc = m->locate(DataRef::parse(*e.data));
        if (loc && !loc->in_register())
          offset = loc->bank->read_latency_cycles;
      }
      node.preds.emplace_back(position(e.from), offset);
    }
    for (auto &node : nodes_)
      node.tail = node.cls->latency_cycles;
    for (std::size_t i = nodes_.size(); i-- > 0;)
      for (const auto &[p, offset] : nodes_[i].preds)
        nodes_[p].tail = std::max(nodes_[p].tail,
                                  nodes_[p].cls->latency_cycles + nodes_[i].tail);

    choice_.resize(nodes_.size());
    if (m != nullptr)
      for (const auto &b : m->banks)
        for (int p = 0; p < b.ports; ++p)
          ports_[{b.id, p}];
  }

  std::optional<OracleResult> solve(const Library &library) {
    dfs(0, 0);
    if (!best_choice_)
      return std::nullopt;
    return OracleResult{best_, witness(library)};
  }

private:
  void dfs(std::size_t k, int makespan) {
    if (k == nodes_.size()) {
      if (makespan < best_) {
        best_ = makespan;
        best_choice_ = choice_;
      }
      return;
    }
    const auto &node = nodes_[k];
    int earliest = node.min_start;
    for (const auto &[p, offset] : node.preds)
      earliest = std::max(earliest, choice_[p].avail + offset);

    const int lat = node.cls->latency_cycles;
    const int wl = node.write ? node.write->write_latency_cycles : 0;
    for (int t = earliest; t + node.tail < best_ && t + lat + wl < best_; ++t) {
      auto &busy = instances_[node.cls->name];
      busy.resize(node.instances);
      Interval run{t, t + lat};
      // Unused instances are interchangeable: try only the first of them.
      bool tried_unused = false;
      for (int i = 0; i < node.instances; ++i) {
        if (busy[i].empty()) {
          if (tried_unused)
            continue;
          tried_unused = true;
        }
        if (!free_over(busy[i], run))
          continue;
        busy[i].push_back(run);
        choice_[k].start = t;
        choice_[k].instance = i;
        choose_reads(k, 0, t, std::max(makespan, t + lat + wl));
        busy[i].pop_back();
      }
    }
  }

  void choose_reads(std::size_t k, std::size_t r, int t, int makespan) {
    const auto &node = nodes_[k];
    if (r == node.reads.size()) {
      choose_write(k, t, makespan);
      return;
    }
    const auto *bank = node.reads[r].first;
    int count = node.reads[r].second;
    Interval w{t - bank->read_latency_cycles, t};
    std::vector<std::vector<int>> picks;
    combinations(bank->ports, count, picks);
    for (const auto &pick : picks) {
      bool ok = std::all_of(pick.begin(), pick.end(), [&](int p) {
        return free_over(ports_[{bank->id, p}], w);
      });
      if (!ok)
        continue;
      for (int p : pick) {
        ports_[{bank->id, p}].push_back(w);
        choice_[k].reads.push_back(PortBooking{bank->id, p, w});
      }
      choose_reads(k, r + 1, t, makespan);
      for (int p : pick) {
        ports_[{bank->id, p}].pop_back();
        choice_[k].reads.pop_back();
      }
    }
  }

  void choose_write(std::size_t k, int t, int makespan) {
    const auto &node = nodes_[k];
    const int end = t + node.cls->latency_cycles;
    if (node.write == nullptr) {
      choice_[k].write.reset();
      choice_[k].avail = end;
      dfs(k + 1, makespan);
      return;
    }
    Interval w{end, end + node.write->write_latency_cycles};
    for (int p = 0; p < node.write->ports; ++p) {
      auto &busy = ports_[{node.write->id, p}];
      if (!free_over(busy, w))
        continue;
      busy.push_back(w);
      choice_[k].write = PortBooking{node.write->id, p, w};
      choice_[k].avail = w.end;
      dfs(k + 1, makespan);
      busy.pop_back();
    }
  }

  Schedule witness(const Library &library) const {
    Schedule s;
    s.policy = mapping_ != nullptr ? Policy::MemoryAware : Policy::Baseline;
    s.config.policy = s.policy;
    s.config.time_constraint_cycles = best_;
    s.makespan_cycles = best_;
    std::map<InstanceRef, std::vector<std::size_t>> per_instance;
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      const auto &c = (*best_choice_)[k];
      ScheduleEntry e;
      e.op_id = nodes_[k].op->id;
      e.start_cycle = c.start;
      e.end_cycle = c.start + nodes_[k].cls->latency_cycles;
      e.instance = InstanceRef{nodes_[k].cls->name, c.instance};
      e.read_bookings = c.reads;
      e.write_booking = c.write;
      per_instance[e.instance].push_back(k);
      s.entries.emplace(e.op_id, std::move(e));
    }
    for (auto &[inst, list] : per_instance) {
      std::sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) {
        return (*best_choice_)[a].start < (*best_choice_)[b].start;
      });
      OperatorInstanceState state{inst.class_name, inst.index, 0, std::nullopt};
      for (auto k : list) {
        s.entries.at(nodes_[k].op->id).is_model2 =
            model2_affinity(*nodes_[k].op, state, library) > 0;
        state.last_operand_sources = nodes_[k].op->operands;
      }
    }
    return s;
  }

  const MemoryMapping *mapping_;
  std::vector<Node> nodes_;
  std::vector<Choice> choice_;
  std::optional<std::vector<Choice>> best_choice_;
  std::map<std::string, std::vector<Busy>> instances_;
  std::map<std::pair<std::string, int>, Busy> ports_;
  int best_;
};

} // namespace

OracleResult bruteforce_optimal_makespan(const Dfg &g, const Library &library,
                                         const Allocation &alloc,
                                         const MemoryMapping *m,
                                         int max_cycles) {
  if (g.operations.size() > kOracleMaxOperations)
    throw Error(ErrorCode::TooLarge,
                std::to_string(g.operations.size()) +
                    " operations exceed the exhaustive search limit of " +
                    std::to_string(kOracleMaxOperations));
  if (m != nullptr) {
    auto diags = validate_mapping(*m, g);
    if (!diags.empty())
      throw Error(ErrorCode::Infeasible, diags.front().format(), diags.front().ids);
  }
  Search search(g, library, alloc, m, max_cycles);
  auto result = search.solve(library);
  if (!result)
    throw Error(ErrorCode::Infeasible,
                "no schedule finishes within " + std::to_string(max_cycles) +
                    " cycles");
  return std::move(*result);
}

} // namespace memsched
