#pragma once

// Test-only helpers: fixture loading, a seeded random DFG generator and a
// path-enumeration timing oracle that does not share code with
// compute_timing.

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "memsched/dfg.hpp"
#include "memsched/memmap.hpp"
#include "memsched/scheduler.hpp"

#ifndef MEMSCHED_FIXTURE_DIR
#error "MEMSCHED_FIXTURE_DIR must point at the fixtures directory"
#endif

namespace memsched::test {

inline std::string fixture_path(const std::string &name) {
  return std::string(MEMSCHED_FIXTURE_DIR) + "/" + name;
}

inline std::string read_fixture(const std::string &name) {
  std::ifstream in(fixture_path(name), std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Library fixture_library() {
  return parse_library(read_fixture("library.json"));
}

struct Fixture {
  std::string name;
  Dfg dfg;
  MemoryMapping mapping;
};

inline Fixture load_fixture(const std::string &stem) {
  Fixture f;
  f.name = stem;
  f.dfg = parse_dfg(read_fixture(stem + ".json"), fixture_library());
  f.mapping = parse_mapping(read_fixture(stem + "_mapping.json"), &f.dfg);
  return f;
}

inline std::vector<std::string> corpus_names() {
  return {"fir4", "fir16", "fft8", "iir_biquad", "two_adds"};
}

//===----------------------------------------------------------------------===//
// Path-enumeration timing oracle
//===----------------------------------------------------------------------===//

struct PathTiming {
  std::map<std::string, int> asap;
  std::map<std::string, int> alap;
  int critical_path = 0;
};

/// Walks every source-to-sink path explicitly. Exponential; fine for the
/// small graphs it is used on.
inline PathTiming enumerate_paths(const Dfg &g, const Library &lib, int T) {
  std::map<std::string, std::vector<std::string>> succ;
  std::map<std::string, int> indeg;
  std::map<std::string, int> lat;
  std::map<std::string, std::string> producer;
  for (const auto &op : g.operations) {
    producer[op.result.name] = op.id;
    lat[op.id] = lib.class_of(op.opcode).latency_cycles;
    indeg[op.id];
  }
  for (const auto &op : g.operations) {
    std::set<std::string> preds(op.extra_deps.begin(), op.extra_deps.end());
    for (const auto &a : op.operands)
      if (producer.count(a.name) != 0)
        preds.insert(producer[a.name]);
    for (const auto &p : preds) {
      succ[p].push_back(op.id);
      ++indeg[op.id];
    }
  }
  PathTiming out;
  for (const auto &op : g.operations) {
    out.asap[op.id] = 0;
    out.alap[op.id] = T;
  }
  std::vector<std::string> path;
  std::function<void(const std::string &, int)> walk = [&](const std::string &id,
                                                           int start) {
    path.push_back(id);
    out.asap[id] = std::max(out.asap[id], start);
    int end = start + lat[id];
    if (succ[id].empty()) {
      // Latest starts along this path, anchored at T.
      int latest = T;
      for (auto it = path.rbegin(); it != path.rend(); ++it) {
        latest -= lat[*it];
        out.alap[*it] = std::min(out.alap[*it], latest);
      }
      out.critical_path = std::max(out.critical_path, end);
    }
    for (const auto &s : succ[id])
      walk(s, end);
    path.pop_back();
  };
  for (const auto &[id, d] : indeg)
    if (d == 0)
      walk(id, 0);
  return out;
}

//===----------------------------------------------------------------------===//
// Random instances
//===----------------------------------------------------------------------===//

struct RandomInstance {
  Library library;
  Dfg dfg;
  MemoryMapping mapping;
  Allocation alloc;
};

struct RandomSpec {
  int min_ops = 5;
  int max_ops = 50;
  int max_classes = 3;
  int max_banks = 3;
  int max_instances = 3;
  int max_latency = 3;
};

inline RandomInstance random_instance(std::uint32_t seed, const RandomSpec &spec = {}) {
  std::mt19937 rng(seed);
  auto uniform = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };

  RandomInstance inst;
  const int classes = uniform(1, spec.max_classes);
  std::vector<OperatorClass> lib;
  for (int c = 0; c < classes; ++c)
    lib.push_back(OperatorClass{"c" + std::to_string(c), {"op" + std::to_string(c)},
                                uniform(1, spec.max_latency),
                                static_cast<double>(uniform(1, 4))});
  inst.library = Library(lib);

  const int n = uniform(spec.min_ops, spec.max_ops);
  const int inputs = uniform(2, 8);
  for (int i = 0; i < inputs; ++i)
    inst.dfg.inputs.push_back(InputDecl{"in" + std::to_string(i), {}, 16});
  inst.dfg.inputs.push_back(InputDecl{"arr", {4}, 16});

  // Shuffled ids so id order and creation order disagree.
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i)
    ids.push_back("n" + std::to_string(i));
  std::shuffle(ids.begin(), ids.end(), rng);

  std::vector<DataRef> pool = inst.dfg.primary_inputs();
  for (int i = 0; i < n; ++i) {
    Operation op;
    op.id = ids[i];
    op.opcode = "op" + std::to_string(uniform(0, classes - 1));
    int arity = uniform(1, 3);
    for (int a = 0; a < arity; ++a) {
      // Favor recent values to get some depth.
      int lo = std::max(0, static_cast<int>(pool.size()) - 10);
      int pick = uniform(0, 3) == 0 ? uniform(0, static_cast<int>(pool.size()) - 1)
                                    : uniform(lo, static_cast<int>(pool.size()) - 1);
      op.operands.push_back(pool[pick]);
    }
    op.result = DataRef::scalar("v" + std::to_string(i));
    if (i > 0 && uniform(0, 9) == 0)
      op.extra_deps.push_back(ids[uniform(0, i - 1)]);
    pool.push_back(op.result);
    inst.dfg.operations.push_back(std::move(op));
  }
  inst.dfg.primary_outputs.push_back(inst.dfg.operations.back().result);

  const int banks = uniform(0, spec.max_banks);
  for (int b = 0; b < banks; ++b)
    inst.mapping.banks.push_back(MemoryBank{"B" + std::to_string(b), uniform(1, 3),
                                            uniform(1, 2), uniform(1, 2), 0,
                                            std::nullopt, 1.0});
  inst.mapping.default_register = true;
  for (const auto &item : inst.dfg.data_items()) {
    if (banks == 0 || uniform(0, 2) == 0)
      continue;
    inst.mapping.placement[item.name] = "B" + std::to_string(uniform(0, banks - 1));
  }
  // Send oversubscribed operands back to registers until the mapping is
  // servable.
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto &d : validate_mapping(inst.mapping, inst.dfg)) {
      if (d.code != ErrorCode::PortOverSubscribed)
        continue;
      const auto *op = inst.dfg.find(d.ids[0]);
      for (const auto &arg : op->operands) {
        auto it = inst.mapping.placement.find(arg.name);
        if (it != inst.mapping.placement.end() && it->second == d.ids[1]) {
          inst.mapping.placement.erase(it);
          changed = true;
          break;
        }
      }
    }
  }

  for (const auto &c : inst.library.classes())
    inst.alloc.counts[c.name] = uniform(1, spec.max_instances);
  return inst;
}

/// A time constraint the list scheduler can always meet: every operation
/// run back to back with its full memory traffic.
inline int serial_bound(const RandomInstance &inst) {
  int worst_mem = 0;
  for (const auto &b : inst.mapping.banks)
    worst_mem = std::max(worst_mem, b.read_latency_cycles + b.write_latency_cycles);
  int total = 0;
  for (const auto &op : inst.dfg.operations)
    total += inst.library.class_of(op.opcode).latency_cycles + worst_mem;
  return total + 1;
}

} // namespace memsched::test
