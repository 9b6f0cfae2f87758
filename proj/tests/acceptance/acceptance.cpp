// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "memsched/cli.hpp"
#include "memsched/metrics.hpp"
#include "memsched/oracle.hpp"
#include "memsched/verify.hpp"
#include "test_support.hpp"

using namespace memsched;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string &why) {
    if (pass)
      detail = why;
    pass = false;
  }
};

int failures = 0;

void report(const std::string &name, const Outcome &o) {
  std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << '\n';
  if (!o.pass)
    ++failures;
}

template <typename F> Outcome guarded(F &&body) {
  try {
    return body();
  } catch (const std::exception &e) {
    Outcome o;
    o.fail(std::string("exception: ") + e.what());
    return o;
  }
}

// Corpus runs share one recipe: operators sized for twice the critical path,
// a generous time constraint so both policies finish.
struct CorpusRun {
  test::Fixture fixture;
  Library library;
  Allocation alloc;
  SchedulerConfig cfg;
};

CorpusRun corpus_run(const std::string &name) {
  CorpusRun r{test::load_fixture(name), test::fixture_library(), {}, {}};
  int cp = critical_path_length(r.fixture.dfg, r.library);
  r.alloc = compute_min_allocation(r.fixture.dfg, r.library, 2 * cp);
  r.cfg.time_constraint_cycles = 8 * cp;
  return r;
}

Schedule run(const CorpusRun &r, Policy policy, SchedulerConfig cfg) {
  cfg.policy = policy;
  return run_scheduler(r.fixture.dfg, r.library, r.alloc,
                       policy == Policy::MemoryAware ? &r.fixture.mapping : nullptr,
                       cfg);
}

//===----------------------------------------------------------------------===//

Outcome safety_suite() {
  Outcome o;
  auto begin = std::chrono::steady_clock::now();
  int schedules = 0;
  int bookings = 0;
  for (std::uint32_t seed = 1; seed <= 200; ++seed) {
    auto inst = test::random_instance(seed);
    SchedulerConfig cfg;
    cfg.time_constraint_cycles = test::serial_bound(inst);
    for (auto policy : {Policy::Baseline, Policy::MemoryAware}) {
      cfg.policy = policy;
      const MemoryMapping *m = policy == Policy::MemoryAware ? &inst.mapping : nullptr;
      auto s = run_scheduler(inst.dfg, inst.library, inst.alloc, m, cfg);
      auto v = verify_schedule(s, inst.dfg, inst.library, inst.alloc, m);
      if (!v.empty())
        o.fail("seed " + std::to_string(seed) + " " +
               std::string(to_string(policy)) + ": " + v.front());
      for (const auto &[id, e] : s.entries)
        bookings += static_cast<int>(e.read_bookings.size()) + (e.write_booking ? 1 : 0);
      ++schedules;
    }
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - begin)
                    .count();
  if (secs >= 60.0)
    o.fail("took " + std::to_string(secs) + " s");
  if (o.pass) {
    std::ostringstream d;
    d << schedules << " schedules on 200 random graphs, " << bookings
      << " port bookings, 0 violations, " << secs << " s";
    o.detail = d.str();
  }
  return o;
}

Dfg chain(int n, const std::string &opcode) {
  Dfg g;
  g.inputs = {{"x", {}, 16}};
  std::string prev = "x";
  for (int i = 0; i < n; ++i) {
    Operation op;
    op.id = "c" + std::to_string(i);
    op.opcode = opcode;
    op.operands = {DataRef::scalar(prev)};
    op.result = DataRef::scalar("v" + std::to_string(i));
    prev = op.result.name;
    g.operations.push_back(op);
  }
  return g;
}

Outcome oracle_sandwich() {
  Outcome o;
  int instances = 0;
  int exact_family = 0;
  int contention = 0;
  auto check = [&](const std::string &label, const Dfg &g, const Library &lib,
                   const Allocation &alloc, const MemoryMapping &m, bool must_match) {
    SchedulerConfig cfg;
    cfg.policy = Policy::MemoryAware;
    cfg.time_constraint_cycles = 0;
    int worst = 0;
    for (const auto &b : m.banks)
      worst = std::max(worst, b.read_latency_cycles + b.write_latency_cycles);
    for (const auto &op : g.operations)
      cfg.time_constraint_cycles += lib.class_of(op.opcode).latency_cycles + worst;
    cfg.time_constraint_cycles += 1;
    auto list = run_scheduler(g, lib, alloc, &m, cfg);
    auto best = bruteforce_optimal_makespan(g, lib, alloc, &m, cfg.time_constraint_cycles);
    ++instances;
    if (!verify_schedule(list, g, lib, alloc, &m).empty())
      o.fail(label + ": list schedule unsafe");
    if (!verify_schedule(best.witness, g, lib, alloc, &m).empty())
      o.fail(label + ": oracle witness unsafe");
    if (best.makespan > list.makespan_cycles)
      o.fail(label + ": oracle " + std::to_string(best.makespan) + " > list " +
             std::to_string(list.makespan_cycles));
    if (must_match) {
      ++exact_family;
      if (best.makespan != list.makespan_cycles)
        o.fail(label + ": list " + std::to_string(list.makespan_cycles) +
               " misses optimum " + std::to_string(best.makespan));
    }
  };

  auto lib = default_library();
  MemoryMapping regs;
  regs.default_register = true;

  // Serial chains, in registers and with the source operand in a bank.
  for (int n = 1; n <= 7; ++n)
    for (const char *opcode : {"add", "mul"}) {
      auto g = chain(n, opcode);
      Allocation alloc{{{"alu", 1}, {"mult", 1}}};
      check("chain " + std::to_string(n) + " " + opcode, g, lib, alloc, regs, true);
      MemoryMapping banked;
      banked.banks = {MemoryBank{"M0", 1, 2, 1, 0, std::nullopt, 1.0}};
      banked.placement = {{"x", "M0"}};
      banked.default_register = true;
      check("banked chain " + std::to_string(n) + " " + opcode, g, lib, alloc, banked,
            true);
    }

  // Ample resources: one instance per operation is capped at two by the
  // family definition, so graphs stay at two operations per class.
  test::RandomSpec ample;
  ample.min_ops = 2;
  ample.max_ops = 4;
  ample.max_banks = 0;
  ample.max_latency = 2;
  for (std::uint32_t seed = 1; seed <= 15; ++seed) {
    auto inst = test::random_instance(seed * 7919, ample);
    std::map<std::string, int> per_class;
    for (const auto &op : inst.dfg.operations)
      ++per_class[inst.library.class_of(op.opcode).name];
    bool fits = true;
    for (const auto &[cls, n] : per_class) {
      inst.alloc.counts[cls] = std::max(1, n);
      fits &= n <= 2;
    }
    if (!fits)
      continue;
    check("ample seed " + std::to_string(seed), inst.dfg, inst.library, inst.alloc,
          regs, true);
  }

  // Bank contention: one-port banks, at most two instances per class.
  test::RandomSpec tight;
  tight.min_ops = 2;
  tight.max_ops = 7;
  tight.max_instances = 2;
  tight.max_banks = 2;
  tight.max_latency = 2;
  for (std::uint32_t seed = 1; contention < 30 && seed < 400; ++seed) {
    auto inst = test::random_instance(seed * 104729, tight);
    if (inst.mapping.banks.empty())
      continue;
    bool contended = false;
    for (const auto &op : inst.dfg.operations)
      contended |= access_requirements(op, inst.mapping).total_reads() > 0;
    if (!contended)
      continue;
    ++contention;
    check("contention seed " + std::to_string(seed), inst.dfg, inst.library,
          inst.alloc, inst.mapping, false);
  }

  if (instances < 50)
    o.fail("only " + std::to_string(instances) + " instances");
  if (o.pass)
    o.detail = std::to_string(instances) + " instances (" +
               std::to_string(exact_family) + " serial/ample exact, " +
               std::to_string(contention) + " bank contention), oracle <= list";
  return o;
}

Outcome gating_correctness() {
  Outcome o;
  auto f = test::load_fixture("two_adds");
  auto lib = test::fixture_library();
  Allocation alloc{{{"alu", 2}}};
  SchedulerConfig cfg;
  cfg.time_constraint_cycles = 4;
  cfg.policy = Policy::MemoryAware;
  auto aware = run_scheduler(f.dfg, lib, alloc, &f.mapping, cfg);
  auto am = analyze(aware, f.dfg, lib, f.mapping, cfg);
  cfg.policy = Policy::Baseline;
  auto base = run_scheduler(f.dfg, lib, alloc, nullptr, cfg);
  auto bm = analyze(base, f.dfg, lib, f.mapping, cfg);

  int s1 = aware.entries.at("r1").start_cycle;
  int s2 = aware.entries.at("r2").start_cycle;
  if (s1 != 1 || s2 != 2)
    o.fail("memory-aware starts {" + std::to_string(s1) + "," + std::to_string(s2) + "}");
  if (am.total_conflicts != 0)
    o.fail("memory-aware conflicts " + std::to_string(am.total_conflicts));
  if (bm.total_conflicts < 1)
    o.fail("baseline replay reports no conflict");
  if (o.pass)
    o.detail = "memory-aware starts {1,2}, 0 conflicts; baseline replay " +
               std::to_string(bm.total_conflicts) + " conflict cycle(s)";
  return o;
}

Outcome degeneracy() {
  Outcome o;
  int checked = 0;
  for (const auto &name : test::corpus_names()) {
    auto r = corpus_run(name);
    r.fixture.mapping = generate_default_mapping(r.fixture.dfg, r.fixture.mapping.banks,
                                                 MappingPolicy::AllRegisters);
    auto base = run(r, Policy::Baseline, r.cfg);
    auto aware = run(r, Policy::MemoryAware, r.cfg);
    if (base.entries != aware.entries || base.makespan_cycles != aware.makespan_cycles)
      o.fail(name + ": memory-aware differs from baseline with registers only");

    for (auto &[cls, n] : r.alloc.counts)
      n = static_cast<int>(r.fixture.dfg.operations.size());
    auto timing = compute_timing(r.fixture.dfg, r.library, r.cfg.time_constraint_cycles);
    for (auto policy : {Policy::Baseline, Policy::MemoryAware}) {
      auto s = run(r, policy, r.cfg);
      for (const auto &[id, e] : s.entries)
        if (e.start_cycle != timing.asap.at(id))
          o.fail(name + ": " + id + " starts at " + std::to_string(e.start_cycle) +
                 ", asap " + std::to_string(timing.asap.at(id)));
    }
    ++checked;
  }
  if (o.pass)
    o.detail = std::to_string(checked) +
               " fixtures: register-only schedules identical, ample allocation hits ASAP";
  return o;
}

// Datapath energy in sixteenths, from the schedule's model-2 flags, for a
// reduction of one quarter.
long long sixteenth_energy(const Schedule &s, const Dfg &g, const Library &lib) {
  long long total = 0;
  for (const auto &op : g.operations) {
    long long base4 = std::llround(lib.class_of(op.opcode).base_energy * 4);
    total += s.entries.at(op.id).is_model2 ? base4 * 3 : base4 * 4;
  }
  return total;
}

Outcome model2_economics() {
  Outcome o;
  std::ostringstream d;
  int energy_checks = 0;
  for (const auto &name : {"fir4", "fft8", "iir_biquad"}) {
    auto r = corpus_run(name);
    for (auto policy : {Policy::Baseline, Policy::MemoryAware}) {
      auto s = run(r, policy, r.cfg);
      auto m = analyze(s, r.fixture.dfg, r.library, r.fixture.mapping, r.cfg);
      double expected =
          static_cast<double>(sixteenth_energy(s, r.fixture.dfg, r.library)) / 16.0;
      if (m.datapath_energy != expected)
        o.fail(std::string(name) + ": datapath energy " + std::to_string(m.datapath_energy) +
               " vs hand sum " + std::to_string(expected));
      ++energy_checks;
    }
  }
  d << energy_checks << " energy sums exact; model2 affinity vs id order:";
  for (const auto &name : test::corpus_names()) {
    auto r = corpus_run(name);
    for (auto policy : {Policy::Baseline, Policy::MemoryAware}) {
      auto with = run(r, policy, r.cfg);
      auto plain_cfg = r.cfg;
      plain_cfg.affinity_binding = false;
      auto without = run(r, policy, plain_cfg);
      auto count = [](const Schedule &s) {
        int n = 0;
        for (const auto &[id, e] : s.entries)
          n += e.is_model2;
        return n;
      };
      int a = count(with);
      int b = count(without);
      d << ' ' << name << '/' << to_string(policy) << '=' << a << ">=" << b;
      if (a < b)
        o.fail(std::string(name) + " " + std::string(to_string(policy)) +
               ": affinity binding " + std::to_string(a) + " < id order " +
               std::to_string(b));
    }
  }
  if (o.pass)
    o.detail = d.str();
  return o;
}

Outcome reduction_sweep() {
  Outcome o;
  int checks = 0;
  for (const auto &name : test::corpus_names()) {
    auto r = corpus_run(name);
    for (auto policy : {Policy::Baseline, Policy::MemoryAware}) {
      auto s = run(r, policy, r.cfg);
      auto low = r.cfg;
      low.model2_reduction = 0.25;
      auto high = r.cfg;
      high.model2_reduction = 0.50;
      double e_low = analyze(s, r.fixture.dfg, r.library, r.fixture.mapping, low).datapath_energy;
      double e_high = analyze(s, r.fixture.dfg, r.library, r.fixture.mapping, high).datapath_energy;
      double model2_base = 0.0;
      for (const auto &op : r.fixture.dfg.operations)
        if (s.entries.at(op.id).is_model2)
          model2_base += r.library.class_of(op.opcode).base_energy;
      if (e_low - e_high != 0.25 * model2_base)
        o.fail(name + ": change " + std::to_string(e_low - e_high) + " vs " +
               std::to_string(0.25 * model2_base));
      ++checks;
    }
  }
  if (o.pass)
    o.detail = std::to_string(checks) + " schedules, drop equals 0.25 x model-2 base energy";
  return o;
}

Outcome determinism() {
  Outcome o;
  auto root = fs::current_path() / "acceptance_determinism";
  std::string outputs[2];
  for (int i = 0; i < 2; ++i) {
    auto dir = root / ("run" + std::to_string(i));
    fs::remove_all(dir);
    std::ostringstream out, err;
    int code = run_cli({"compare", "--dfg", test::fixture_path("fir16.json"), "--mapping",
                        test::fixture_path("fir16_mapping.json"), "--library",
                        test::fixture_path("library.json"), "--T", "80", "--out",
                        dir.string()},
                       out, err);
    if (code != kExitOk)
      o.fail("compare exited " + std::to_string(code) + ": " + err.str());
    std::ifstream json(dir / "compare.json", std::ios::binary);
    std::ostringstream body;
    body << json.rdbuf();
    outputs[i] = out.str() + "\n--\n" + err.str() + "\n--\n" + body.str();
  }
  if (outputs[0] != outputs[1])
    o.fail("outputs differ between runs");
  if (o.pass)
    o.detail = "stdout, stderr and compare.json byte-identical (" +
               std::to_string(outputs[0].size()) + " bytes)";
  return o;
}

} // namespace

int main() {
  report("safety suite", guarded(safety_suite));
  report("oracle sandwich", guarded(oracle_sandwich));
  report("memory gating correctness", guarded(gating_correctness));
  report("degeneracy equivalences", guarded(degeneracy));
  report("model-2 economics", guarded(model2_economics));
  report("energy parameter sweep", guarded(reduction_sweep));
  report("determinism", guarded(determinism));
  return failures == 0 ? 0 : 1;
}
