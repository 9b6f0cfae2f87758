#include "memsched/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "memsched/export.hpp"
#include "memsched/metrics.hpp"
#include "memsched/oracle.hpp"
#include "memsched/scheduler.hpp"

namespace memsched {

namespace fs = std::filesystem;

namespace {

// Input or output trouble outside the documents' semantics.
struct EnvironmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string dfg_path;
  std::string mapping_path;
  std::string library_path;
  int time_constraint_cycles = 0;
  std::string policy = "baseline";
  double model2_reduction = 0.25;
  std::vector<std::string> alloc_overrides;
  std::string default_mapping;
  std::string out_dir = ".";
  bool dynamic_mobility = false;
  bool positional_affinity = false;
  bool oracle = false;
};

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw EnvironmentError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << content))
    throw EnvironmentError("cannot write " + path.string());
}

fs::path output_dir(const RunConfig &cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec)
    throw EnvironmentError("cannot create " + cfg.out_dir + ": " + ec.message());
  return fs::path(cfg.out_dir);
}

// Banks used by --default-mapping round-robin when no mapping file is given.
std::vector<MemoryBank> fallback_banks() {
  return {MemoryBank{"M0", 2, 1, 1, 0, std::nullopt, 1.0},
          MemoryBank{"M1", 2, 1, 1, 0, std::nullopt, 1.0}};
}

struct Inputs {
  Library library;
  Dfg dfg;
  std::optional<MemoryMapping> mapping;
  std::vector<Diagnostic> diagnostics;
};

// Loads every document. Syntax and I/O problems throw; semantic findings are
// collected so `validate` can print all of them.
Inputs load(const RunConfig &cfg) {
  Inputs in;
  in.library = cfg.library_path.empty() ? default_library()
                                        : parse_library(read_file(cfg.library_path));
  in.dfg = read_dfg(read_file(cfg.dfg_path));
  in.diagnostics = check_opcodes(in.dfg, in.library);
  for (auto &d : validate_dfg(in.dfg))
    in.diagnostics.push_back(std::move(d));
  const bool dfg_ok = in.diagnostics.empty();

  std::optional<std::string> mapping_text;
  if (!cfg.mapping_path.empty())
    mapping_text = read_file(cfg.mapping_path);

  try {
    if (!cfg.default_mapping.empty()) {
      MappingPolicy policy;
      if (cfg.default_mapping == "registers")
        policy = MappingPolicy::AllRegisters;
      else if (cfg.default_mapping == "round-robin")
        policy = MappingPolicy::RoundRobin;
      else
        throw Error(ErrorCode::InvalidConfig,
                    "unknown default mapping " + cfg.default_mapping);
      auto banks = mapping_text ? parse_mapping(*mapping_text).banks
                                : fallback_banks();
      in.mapping = generate_default_mapping(in.dfg, std::move(banks), policy);
    } else if (mapping_text) {
      in.mapping = parse_mapping(*mapping_text, &in.dfg);
    }
  } catch (const SyntaxError &) {
    throw;
  } catch (const Error &e) {
    in.diagnostics.push_back({e.code(), e.what(), e.ids()});
    in.mapping.reset();
  }

  if (dfg_ok && in.mapping)
    for (auto &d : validate_mapping(*in.mapping, in.dfg))
      in.diagnostics.push_back(std::move(d));
  return in;
}

SchedulerConfig scheduler_config(const RunConfig &cfg, Policy policy) {
  SchedulerConfig sc;
  sc.time_constraint_cycles = cfg.time_constraint_cycles;
  sc.policy = policy;
  sc.model2_reduction = cfg.model2_reduction;
  sc.dynamic_mobility = cfg.dynamic_mobility;
  sc.positional_affinity = cfg.positional_affinity;
  sc.validate();
  return sc;
}

Allocation allocation(const RunConfig &cfg, const Inputs &in) {
  Allocation alloc = compute_min_allocation(in.dfg, in.library,
                                            cfg.time_constraint_cycles);
  for (const auto &spec : cfg.alloc_overrides) {
    auto eq = spec.find('=');
    int count = 0;
    try {
      if (eq == std::string::npos)
        throw std::invalid_argument(spec);
      std::size_t used = 0;
      count = std::stoi(spec.substr(eq + 1), &used);
      if (used != spec.size() - eq - 1)
        throw std::invalid_argument(spec);
    } catch (const std::logic_error &) {
      throw Error(ErrorCode::InvalidConfig,
                  "--alloc expects class=count, got \"" + spec + "\"");
    }
    std::string cls = spec.substr(0, eq);
    if (in.library.find_by_name(cls) == nullptr)
      throw Error(ErrorCode::InvalidConfig, "--alloc names unknown class " + cls);
    if (count < 1)
      throw Error(ErrorCode::InvalidConfig, "--alloc count must be >= 1");
    alloc.counts[cls] = count;
  }
  return alloc;
}

bool report_diagnostics(const Inputs &in, std::ostream &err) {
  for (const auto &d : in.diagnostics)
    err << d.format() << '\n';
  return in.diagnostics.empty();
}

int cmd_validate(const RunConfig &cfg, std::ostream &, std::ostream &err) {
  auto in = load(cfg);
  return report_diagnostics(in, err) ? kExitOk : kExitSemantic;
}

int cmd_schedule(const RunConfig &cfg, std::ostream &out, std::ostream &err) {
  auto in = load(cfg);
  if (!report_diagnostics(in, err))
    return kExitSemantic;
  Policy policy = parse_policy(cfg.policy);
  auto sc = scheduler_config(cfg, policy);
  if (policy == Policy::MemoryAware && !in.mapping)
    throw Error(ErrorCode::InvalidConfig,
                "mem-aware policy needs --mapping or --default-mapping");
  MemoryMapping mapping =
      in.mapping ? *in.mapping
                 : generate_default_mapping(in.dfg, {}, MappingPolicy::AllRegisters);

  auto timing = compute_timing(in.dfg, in.library, cfg.time_constraint_cycles);
  auto alloc = allocation(cfg, in);
  Schedule s = policy == Policy::Baseline
                   ? schedule_baseline(in.dfg, in.library, alloc, sc, timing)
                   : schedule_memory_aware(in.dfg, in.library, alloc, mapping,
                                           sc, timing);
  auto metrics = analyze(s, in.dfg, in.library, mapping, sc);

  auto dir = output_dir(cfg);
  write_file(dir / "schedule.json", schedule_to_json(s));
  write_file(dir / "metrics.json", metrics_to_json(metrics));
  write_file(dir / "gantt.svg", export_gantt(s, mapping, &alloc));
  write_file(dir / "schedule.csv", export_csv(s));
  out << to_string(policy) << ": makespan " << s.makespan_cycles << " / "
      << cfg.time_constraint_cycles << ", model2 " << metrics.model2_count << "/"
      << metrics.op_count << ", conflicts " << metrics.total_conflicts << '\n';
  return kExitOk;
}

std::string oracle_cell(const Inputs &in, const Allocation &alloc,
                        const MemoryMapping *m, int time_constraint) {
  if (in.dfg.operations.size() > 8)
    return "n/a";
  try {
    auto r = bruteforce_optimal_makespan(in.dfg, in.library, alloc, m,
                                         time_constraint);
    return std::to_string(r.makespan);
  } catch (const Error &e) {
    if (e.code() == ErrorCode::Infeasible)
      return "infeasible";
    throw;
  }
}

int cmd_compare(const RunConfig &cfg, std::ostream &out, std::ostream &err) {
  auto in = load(cfg);
  if (!report_diagnostics(in, err))
    return kExitSemantic;
  if (!in.mapping)
    throw Error(ErrorCode::InvalidConfig,
                "compare needs --mapping or --default-mapping");
  const auto &mapping = *in.mapping;
  auto timing = compute_timing(in.dfg, in.library, cfg.time_constraint_cycles);
  auto alloc = allocation(cfg, in);

  auto base_cfg = scheduler_config(cfg, Policy::Baseline);
  auto aware_cfg = scheduler_config(cfg, Policy::MemoryAware);
  auto base = schedule_baseline(in.dfg, in.library, alloc, base_cfg, timing);
  auto aware = schedule_memory_aware(in.dfg, in.library, alloc, mapping,
                                     aware_cfg, timing);
  auto report = compare(analyze(base, in.dfg, in.library, mapping, base_cfg),
                        analyze(aware, in.dfg, in.library, mapping, aware_cfg));

  std::string json = comparison_to_json(report);
  std::optional<std::pair<std::string, std::string>> optimum;
  if (cfg.oracle) {
    optimum.emplace(oracle_cell(in, alloc, nullptr, cfg.time_constraint_cycles),
                    oracle_cell(in, alloc, &mapping, cfg.time_constraint_cycles));
    auto doc = nlohmann::ordered_json::parse(json);
    doc["oracle"] = {{"baseline", optimum->first}, {"mem-aware", optimum->second}};
    json = doc.dump(2) + "\n";
  }
  write_file(output_dir(cfg) / "compare.json", json);

  auto row = [&](const std::string &name, const ScheduleMetrics &m,
                 const std::string *opt) {
    out << std::left << std::setw(10) << name << std::right << std::setw(9)
        << m.makespan_cycles << std::setw(8) << m.model2_count << std::setw(12)
        << std::fixed << std::setprecision(3) << m.datapath_energy
        << std::setw(12) << m.memory_energy << std::setw(10) << m.total_conflicts;
    if (opt != nullptr)
      out << std::setw(9) << *opt;
    out << '\n';
  };
  out << std::left << std::setw(10) << "policy" << std::right << std::setw(9)
      << "makespan" << std::setw(8) << "model2" << std::setw(12) << "dp_energy"
      << std::setw(12) << "mem_energy" << std::setw(10) << "conflicts";
  if (optimum)
    out << std::setw(9) << "optimal";
  out << '\n';
  row("baseline", report.left, optimum ? &optimum->first : nullptr);
  row("mem-aware", report.right, optimum ? &optimum->second : nullptr);
  out << "delta: makespan " << std::showpos << report.makespan_delta
      << ", energy " << std::fixed << std::setprecision(3) << report.energy_delta
      << ", conflicts " << report.conflict_delta << std::noshowpos << '\n'
      << report.verdict;
  return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err) {
  CLI::App app{"Memory-aware list scheduling for data-flow graphs", "memsched"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_inputs = [&](CLI::App *cmd) {
    cmd->add_option("--dfg", cfg.dfg_path, "DFG document")->required();
    cmd->add_option("--mapping", cfg.mapping_path, "memory mapping document");
    cmd->add_option("--library", cfg.library_path,
                    "operator library document (built-in alu/mult if omitted)");
    cmd->add_option("--default-mapping", cfg.default_mapping,
                    "generate the placement instead: registers|round-robin")
        ->check(CLI::IsMember({"registers", "round-robin"}));
  };
  auto add_run = [&](CLI::App *cmd) {
    cmd->add_option("--T", cfg.time_constraint_cycles, "time constraint in cycles")
        ->required()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--reduction", cfg.model2_reduction,
                    "model-2 energy reduction")
        ->check(CLI::Range(0.25, 0.50));
    cmd->add_option("--alloc", cfg.alloc_overrides,
                    "operator instances, class=count (repeatable)");
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_flag("--dynamic-mobility", cfg.dynamic_mobility,
                  "prioritize by alap - t instead of mobility");
    cmd->add_flag("--positional-affinity", cfg.positional_affinity,
                  "count shared inputs by operand position");
  };

  auto *validate = app.add_subcommand("validate", "check DFG and mapping");
  add_inputs(validate);
  auto *schedule = app.add_subcommand("schedule", "schedule one policy");
  add_inputs(schedule);
  add_run(schedule);
  schedule->add_option("--policy", cfg.policy, "baseline|mem-aware")
      ->check(CLI::IsMember({"baseline", "mem-aware"}));
  auto *cmp = app.add_subcommand("compare", "run both policies and compare");
  add_inputs(cmp);
  add_run(cmp);
  cmp->add_flag("--oracle", cfg.oracle,
                "add the exhaustive optimum (graphs of at most 8 operations)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitEnvironment;
  }

  try {
    if (*validate)
      return cmd_validate(cfg, out, err);
    if (*schedule)
      return cmd_schedule(cfg, out, err);
    return cmd_compare(cfg, out, err);
  } catch (const EnvironmentError &e) {
    err << "ERROR IO: " << e.what() << '\n';
    return kExitEnvironment;
  } catch (const SyntaxError &e) {
    err << "ERROR SyntaxError: " << e.what() << '\n';
    return kExitEnvironment;
  } catch (const Error &e) {
    err << "ERROR " << to_string(e.code()) << ": " << e.what() << '\n';
    return kExitSemantic;
  }
}

} // namespace memsched
