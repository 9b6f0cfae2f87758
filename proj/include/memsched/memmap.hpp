#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "memsched/dfg.hpp"
#include "memsched/error.hpp"

namespace memsched {

inline constexpr std::string_view kRegister = "REGISTER";

struct MemoryBank {
  std::string id;
  int ports = 1;
  int read_latency_cycles = 1;
  int write_latency_cycles = 1;
  int level = 0; // reported only; arbitration ignores it
  std::optional<std::size_t> capacity_words;
  double energy_per_access = 0.0;
};

/// Where a data item lives. A null bank means a datapath register.
struct Location {
  const MemoryBank *bank = nullptr;

  bool in_register() const { return bank == nullptr; }
};

/// Placement of data items onto banks or registers. Keys of `placement` are
/// item names (`acc`, `x[3]`) or whole-array names (`x`), each mapped to a
/// bank id or "REGISTER". Lookups try the item name, then its array name,
/// then the document default.
struct MemoryMapping {
  std::vector<MemoryBank> banks;
  std::map<std::string, std::string> placement;
  bool default_register = false;

  const MemoryBank *find_bank(std::string_view id) const;
  /// nullopt when the item is unmapped.
  std::optional<Location> locate(const DataRef &item) const;
};

/// Bank ports each operation needs: reads per bank (duplicate operands fetch
/// once) and the bank receiving the result, if any.
struct AccessRequirement {
  std::string op_id;
  std::map<std::string, int> reads;
  std::map<std::string, int> writes;

  int total_reads() const;
};

/// Parses a mapping document. When `g` is given, whole-array placement keys
/// expand to every element of that array known to the graph before the
/// capacity check.
MemoryMapping parse_mapping(std::string_view text, const Dfg *g = nullptr);
std::string serialize_mapping(const MemoryMapping &m);

std::vector<Diagnostic> validate_mapping(const MemoryMapping &m, const Dfg &g);

AccessRequirement access_requirements(const Operation &op,
                                      const MemoryMapping &m);

enum class MappingPolicy { AllRegisters, RoundRobin };

MemoryMapping generate_default_mapping(const Dfg &g,
                                       std::vector<MemoryBank> banks,
                                       MappingPolicy policy);

} // namespace memsched
