#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "memsched/error.hpp"

namespace memsched {

struct ArrayElement {
  std::string array;
  std::size_t index = 0;

  bool operator==(const ArrayElement &) const = default;
};

/// A named data item. Array elements are flattened: `x[3]` is its own item
/// with `element = {"x", 3}`. Identity is the canonical name.
struct DataRef {
  std::string name;
  std::optional<ArrayElement> element;
  int width_bits = 16;

  static DataRef scalar(std::string name, int width_bits = 16);
  static DataRef array_element(const std::string &array, std::size_t index,
                               int width_bits = 16);
  /// Parses `name` or `name[i]`; throws SyntaxError on malformed input.
  static DataRef parse(std::string_view text, int width_bits = 16);

  /// Array name for elements, the plain name for scalars.
  const std::string &base_name() const {
    return element ? element->array : name;
  }

  bool operator==(const DataRef &other) const { return name == other.name; }
  /// Orders by (base name, element index) so `x[2]` precedes `x[10]`.
  bool operator<(const DataRef &other) const;
};

struct OperatorClass {
  std::string name;
  std::vector<std::string> opcodes;
  int latency_cycles = 1;
  double base_energy = 0.0;
};

/// The set of operator classes available to synthesis. Every opcode resolves
/// to exactly one class.
class Library {
public:
  Library() = default;
  explicit Library(std::vector<OperatorClass> classes);

  const std::vector<OperatorClass> &classes() const { return classes_; }
  const OperatorClass *find_by_opcode(std::string_view opcode) const;
  const OperatorClass *find_by_name(std::string_view name) const;
  const OperatorClass &class_of(std::string_view opcode) const;
  bool empty() const { return classes_.empty(); }

private:
  std::vector<OperatorClass> classes_;
  std::map<std::string, std::size_t, std::less<>> by_opcode_;
};

/// Library document: {"classes": [{name, opcodes, latency, energy}]}.
Library parse_library(std::string_view text);
/// alu {add, sub}: latency 1, energy 1.0; mult {mul}: latency 2, energy 4.0.
Library default_library();

struct Operation {
  std::string id;
  std::string opcode;
  std::vector<DataRef> operands;
  DataRef result;
  std::vector<std::string> extra_deps;
};

struct InputDecl {
  std::string name;
  std::vector<std::size_t> shape; // empty for scalars
  int width_bits = 16;
};

struct Dfg {
  std::vector<InputDecl> inputs;
  std::vector<Operation> operations;
  std::vector<DataRef> primary_outputs;

  /// Every declared input item, arrays expanded element-wise.
  std::vector<DataRef> primary_inputs() const;
  /// Primary inputs plus operation results, sorted and deduplicated.
  std::vector<DataRef> data_items() const;
  const Operation *find(std::string_view id) const;
};

/// A dependency u -> v. `data` names the value v reads from u, if any.
struct Edge {
  std::size_t from;
  std::size_t to;
  std::optional<std::string> data;
};

/// Edges indexed by operation position; requires a Dfg with unique writers
/// and resolvable dependency ids (validate_dfg clean).
std::vector<Edge> dependency_edges(const Dfg &g);

/// Reads a DFG document, checking syntax and schema only.
Dfg read_dfg(std::string_view text);
/// read_dfg + opcode resolution + validate_dfg; throws the first finding.
Dfg parse_dfg(std::string_view text, const Library &library);
std::string serialize_dfg(const Dfg &g);

std::vector<Diagnostic> validate_dfg(const Dfg &g);
std::vector<Diagnostic> check_opcodes(const Dfg &g, const Library &library);

/// Kahn order with ascending-id tie-breaking. Throws CycleDetected.
std::vector<std::string> topological_order(const Dfg &g);

struct TimingAnalysis {
  std::map<std::string, int> asap;
  std::map<std::string, int> alap;
  std::map<std::string, int> mobility;
  int critical_path_cycles = 0;
  int time_constraint_cycles = 0;
};

int critical_path_length(const Dfg &g, const Library &library);
TimingAnalysis compute_timing(const Dfg &g, const Library &library,
                              int time_constraint_cycles);

} // namespace memsched
