#include "memsched/dfg.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <unordered_map>

#include "json_util.hpp"

namespace memsched {

using detail::json;

//===----------------------------------------------------------------------===//
// DataRef
//===----------------------------------------------------------------------===//

DataRef DataRef::scalar(std::string name, int width_bits) {
  return DataRef{std::move(name), std::nullopt, width_bits};
}

DataRef DataRef::array_element(const std::string &array, std::size_t index,
                               int width_bits) {
  return DataRef{array + "[" + std::to_string(index) + "]",
                 ArrayElement{array, index}, width_bits};
}

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
    return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

} // namespace

DataRef DataRef::parse(std::string_view text, int width_bits) {
  auto bracket = text.find('[');
  if (bracket == std::string_view::npos) {
    if (!is_identifier(text))
      throw SyntaxError("invalid data name \"" + std::string(text) + "\"", 0, 0);
    return scalar(std::string(text), width_bits);
  }
  std::string_view base = text.substr(0, bracket);
  std::string_view rest = text.substr(bracket + 1);
  if (!is_identifier(base) || rest.size() < 2 || rest.back() != ']')
    throw SyntaxError("invalid array reference \"" + std::string(text) + "\"",
                      0, 0);
  std::string_view digits = rest.substr(0, rest.size() - 1);
  if (digits.empty() || digits.size() > 18 ||
      !std::all_of(digits.begin(), digits.end(),
                   [](char c) { return c >= '0' && c <= '9'; }))
    throw SyntaxError("array index must be a non-negative integer literal in \"" +
                          std::string(text) + "\"",
                      0, 0);
  return array_element(std::string(base), std::stoull(std::string(digits)),
                       width_bits);
}

bool DataRef::operator<(const DataRef &other) const {
  if (base_name() != other.base_name())
    return base_name() < other.base_name();
  // Scalars sort before elements sharing their name.
  long long lhs = element ? static_cast<long long>(element->index) : -1;
  long long rhs =
      other.element ? static_cast<long long>(other.element->index) : -1;
  if (lhs != rhs)
    return lhs < rhs;
  return name < other.name;
}

//===----------------------------------------------------------------------===//
// Library
//===----------------------------------------------------------------------===//

Library::Library(std::vector<OperatorClass> classes)
    : classes_(std::move(classes)) {
  std::set<std::string> names;
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    const auto &c = classes_[i];
    if (c.name.empty() || !names.insert(c.name).second)
      throw Error(ErrorCode::InvalidConfig,
                  "operator class name \"" + c.name + "\" empty or repeated");
    if (c.opcodes.empty())
      throw Error(ErrorCode::InvalidConfig,
                  "operator class " + c.name + " has no opcodes");
    if (c.latency_cycles < 1)
      throw Error(ErrorCode::InvalidConfig,
                  "operator class " + c.name + " latency must be >= 1");
    if (!(c.base_energy >= 0.0))
      throw Error(ErrorCode::InvalidConfig,
                  "operator class " + c.name + " energy must be >= 0");
    for (const auto &op : c.opcodes) {
      if (!by_opcode_.emplace(op, i).second)
        throw Error(ErrorCode::InvalidConfig,
                    "opcode \"" + op + "\" appears in more than one class");
    }
  }
}

const OperatorClass *Library::find_by_opcode(std::string_view opcode) const {
  auto it = by_opcode_.find(opcode);
  return it == by_opcode_.end() ? nullptr : &classes_[it->second];
}

const OperatorClass *Library::find_by_name(std::string_view name) const {
  for (const auto &c : classes_)
    if (c.name == name)
      return &c;
  return nullptr;
}

const OperatorClass &Library::class_of(std::string_view opcode) const {
  const auto *c = find_by_opcode(opcode);
  if (c == nullptr)
    throw Error(ErrorCode::UnknownOpcode,
                "opcode \"" + std::string(opcode) + "\" not in library",
                {std::string(opcode)});
  return *c;
}

Library parse_library(std::string_view text) {
  json doc = detail::parse_json(text);
  detail::expect_keys(doc, "$", {"classes"});
  const auto &classes = detail::get_array(detail::require(doc, "$", "classes"),
                                          "$.classes");
  std::vector<OperatorClass> out;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    std::string path = "$.classes[" + std::to_string(i) + "]";
    const auto &c = classes[i];
    detail::expect_keys(c, path, {"name", "opcodes", "latency", "energy"});
    OperatorClass oc;
    oc.name = detail::get_string(detail::require(c, path, "name"), path + ".name");
    const auto &ops = detail::get_array(detail::require(c, path, "opcodes"),
                                        path + ".opcodes");
    for (const auto &op : ops)
      oc.opcodes.push_back(detail::get_string(op, path + ".opcodes"));
    oc.latency_cycles = static_cast<int>(
        detail::get_int(detail::require(c, path, "latency"), path + ".latency"));
    if (c.contains("energy"))
      oc.base_energy = detail::get_number(c["energy"], path + ".energy");
    out.push_back(std::move(oc));
  }
  return Library(std::move(out));
}

Library default_library() {
  return Library({
      OperatorClass{"alu", {"add", "sub"}, 1, 1.0},
      OperatorClass{"mult", {"mul"}, 2, 4.0},
  });
}

//===----------------------------------------------------------------------===//
// Dfg
//===----------------------------------------------------------------------===//

std::vector<DataRef> Dfg::primary_inputs() const {
  std::vector<DataRef> items;
  for (const auto &decl : inputs) {
    if (decl.shape.empty()) {
      items.push_back(DataRef::scalar(decl.name, decl.width_bits));
      continue;
    }
    std::size_t count = 1;
    for (auto d : decl.shape)
      count *= d;
    for (std::size_t i = 0; i < count; ++i)
      items.push_back(DataRef::array_element(decl.name, i, decl.width_bits));
  }
  std::sort(items.begin(), items.end());
  return items;
}

std::vector<DataRef> Dfg::data_items() const {
  std::vector<DataRef> items = primary_inputs();
  for (const auto &op : operations)
    items.push_back(op.result);
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  return items;
}

const Operation *Dfg::find(std::string_view id) const {
  for (const auto &op : operations)
    if (op.id == id)
      return &op;
  return nullptr;
}

std::vector<Edge> dependency_edges(const Dfg &g) {
  std::unordered_map<std::string, std::size_t> producer;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < g.operations.size(); ++i) {
    producer.emplace(g.operations[i].result.name, i);
    index.emplace(g.operations[i].id, i);
  }
  std::vector<Edge> edges;
  for (std::size_t v = 0; v < g.operations.size(); ++v) {
    const auto &op = g.operations[v];
    std::set<std::string> seen;
    for (const auto &arg : op.operands) {
      if (!seen.insert(arg.name).second)
        continue;
      auto it = producer.find(arg.name);
      if (it != producer.end() && it->second != v)
        edges.push_back(Edge{it->second, v, arg.name});
    }
    for (const auto &dep : op.extra_deps) {
      auto it = index.find(dep);
      if (it != index.end() && it->second != v)
        edges.push_back(Edge{it->second, v, std::nullopt});
    }
  }
  return edges;
}

namespace {

// Returns the ids along one cycle, rotated so the smallest id leads.
std::vector<std::string> find_cycle(const Dfg &g) {
  const std::size_t n = g.operations.size();
  std::vector<std::vector<std::size_t>> succ(n);
  for (const auto &e : dependency_edges(g))
    succ[e.from].push_back(e.to);

  enum class Mark { White, Grey, Black };
  std::vector<Mark> mark(n, Mark::White);
  std::vector<std::size_t> stack;
  std::vector<std::size_t> cycle;

  std::function<bool(std::size_t)> visit = [&](std::size_t u) {
    mark[u] = Mark::Grey;
    stack.push_back(u);
    for (auto v : succ[u]) {
      if (mark[v] == Mark::Grey) {
        auto it = std::find(stack.begin(), stack.end(), v);
        cycle.assign(it, stack.end());
        return true;
      }
      if (mark[v] == Mark::White && visit(v))
        return true;
    }
    stack.pop_back();
    mark[u] = Mark::Black;
    return false;
  };
  for (std::size_t i = 0; i < n && cycle.empty(); ++i)
    if (mark[i] == Mark::White)
      visit(i);

  std::vector<std::string> ids;
  for (auto i : cycle)
    ids.push_back(g.operations[i].id);
  if (!ids.empty())
    std::rotate(ids.begin(), std::min_element(ids.begin(), ids.end()),
                ids.end());
  return ids;
}

std::string join(const std::vector<std::string> &ids) {
  std::string out;
  for (const auto &id : ids) {
    if (!out.empty())
      out += ", ";
    out += id;
  }
  return out;
}

} // namespace

std::vector<Diagnostic> validate_dfg(const Dfg &g) {
  std::vector<Diagnostic> diags;

  std::set<std::string> op_ids;
  for (const auto &op : g.operations) {
    if (!op_ids.insert(op.id).second)
      diags.push_back({ErrorCode::DuplicateOperation, op.id, {op.id}});
  }

  std::set<std::string> inputs;
  for (const auto &d : g.primary_inputs())
    inputs.insert(d.name);

  std::map<std::string, std::string> writer;
  for (const auto &op : g.operations) {
    const auto &name = op.result.name;
    if (inputs.count(name) != 0)
      diags.push_back({ErrorCode::InputOverwritten, name + " (by " + op.id + ")",
                       {name, op.id}});
    auto [it, fresh] = writer.emplace(name, op.id);
    if (!fresh)
      diags.push_back({ErrorCode::DuplicateWriter,
                       name + " (" + it->second + ", " + op.id + ")",
                       {name, it->second, op.id}});
  }

  for (const auto &op : g.operations) {
    for (const auto &arg : op.operands) {
      if (inputs.count(arg.name) == 0 && writer.count(arg.name) == 0)
        diags.push_back({ErrorCode::UndefinedData, arg.name, {arg.name, op.id}});
    }
    for (const auto &dep : op.extra_deps) {
      if (dep == op.id)
        diags.push_back({ErrorCode::SelfDependency, op.id, {op.id}});
      else if (op_ids.count(dep) == 0)
        diags.push_back({ErrorCode::UnknownOperation, dep + " (dep of " + op.id + ")",
                         {dep, op.id}});
    }
  }

  for (const auto &out : g.primary_outputs) {
    if (writer.count(out.name) == 0)
      diags.push_back({ErrorCode::UndefinedOutput, out.name, {out.name}});
  }

  auto cycle = find_cycle(g);
  if (!cycle.empty())
    diags.push_back({ErrorCode::CycleDetected, join(cycle), cycle});
  return diags;
}

std::vector<Diagnostic> check_opcodes(const Dfg &g, const Library &library) {
  std::vector<Diagnostic> diags;
  for (const auto &op : g.operations) {
    if (library.find_by_opcode(op.opcode) == nullptr)
      diags.push_back({ErrorCode::UnknownOpcode, op.opcode + " (op " + op.id + ")",
                       {op.opcode, op.id}});
  }
  return diags;
}

std::vector<std::string> topological_order(const Dfg &g) {
  const std::size_t n = g.operations.size();
  std::vector<std::vector<std::size_t>> succ(n);
  std::vector<std::size_t> indegree(n, 0);
  for (const auto &e : dependency_edges(g)) {
    succ[e.from].push_back(e.to);
    ++indegree[e.to];
  }
  std::set<std::pair<std::string, std::size_t>> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0)
      ready.emplace(g.operations[i].id, i);

  std::vector<std::string> order;
  order.reserve(n);
  while (!ready.empty()) {
    auto [id, u] = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(id);
    for (auto v : succ[u])
      if (--indegree[v] == 0)
        ready.emplace(g.operations[v].id, v);
  }
  if (order.size() != n) {
    auto cycle = find_cycle(g);
    throw Error(ErrorCode::CycleDetected, "cycle through " + join(cycle), cycle);
  }
  return order;
}

//===----------------------------------------------------------------------===//
// Timing
//===----------------------------------------------------------------------===//

namespace {

struct Frames {
  std::vector<int> asap;
  std::vector<std::size_t> order;
  std::vector<std::vector<std::size_t>> succ;
  std::vector<int> latency;
  int critical_path = 0;
};

Frames forward_frames(const Dfg &g, const Library &library) {
  Frames f;
  const std::size_t n = g.operations.size();
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) {
    index.emplace(g.operations[i].id, i);
    f.latency.push_back(library.class_of(g.operations[i].opcode).latency_cycles);
  }
  std::vector<std::vector<std::size_t>> pred(n);
  f.succ.resize(n);
  for (const auto &e : dependency_edges(g)) {
    pred[e.to].push_back(e.from);
    f.succ[e.from].push_back(e.to);
  }
  for (const auto &id : topological_order(g))
    f.order.push_back(index.at(id));

  f.asap.assign(n, 0);
  for (auto v : f.order) {
    for (auto u : pred[v])
      f.asap[v] = std::max(f.asap[v], f.asap[u] + f.latency[u]);
    f.critical_path = std::max(f.critical_path, f.asap[v] + f.latency[v]);
  }
  return f;
}

} // namespace

int critical_path_length(const Dfg &g, const Library &library) {
  return forward_frames(g, library).critical_path;
}

TimingAnalysis compute_timing(const Dfg &g, const Library &library,
                              int time_constraint_cycles) {
  if (time_constraint_cycles < 1)
    throw Error(ErrorCode::InvalidConfig, "time constraint must be positive");
  Frames f = forward_frames(g, library);
  if (f.critical_path > time_constraint_cycles)
    throw Error(ErrorCode::InfeasibleConstraint,
                "critical path " + std::to_string(f.critical_path) +
                    " cycles exceeds time constraint " +
                    std::to_string(time_constraint_cycles));

  const std::size_t n = g.operations.size();
  std::vector<int> alap(n, 0);
  for (auto it = f.order.rbegin(); it != f.order.rend(); ++it) {
    auto v = *it;
    int latest_end = time_constraint_cycles;
    for (auto s : f.succ[v])
      latest_end = std::min(latest_end, alap[s]);
    alap[v] = latest_end - f.latency[v];
  }

  TimingAnalysis t;
  t.critical_path_cycles = f.critical_path;
  t.time_constraint_cycles = time_constraint_cycles;
  for (std::size_t i = 0; i < n; ++i) {
    const auto &id = g.operations[i].id;
    t.asap[id] = f.asap[i];
    t.alap[id] = alap[i];
    t.mobility[id] = alap[i] - f.asap[i];
  }
  return t;
}

//===----------------------------------------------------------------------===//
// Document I/O
//===----------------------------------------------------------------------===//

Dfg read_dfg(std::string_view text) {
  json doc = detail::parse_json(text);
  detail::expect_keys(doc, "$", {"inputs", "outputs", "ops"});

  Dfg g;
  std::map<std::string, int> widths;
  if (doc.contains("inputs")) {
    const auto &inputs = detail::get_array(doc["inputs"], "$.inputs");
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      std::string path = "$.inputs[" + std::to_string(i) + "]";
      const auto &in = inputs[i];
      detail::expect_keys(in, path, {"name", "shape", "width_bits"});
      InputDecl decl;
      decl.name = detail::get_string(detail::require(in, path, "name"),
                                     path + ".name");
      if (!is_identifier(decl.name))
        detail::schema_error(path + ".name", "invalid identifier");
      if (in.contains("shape")) {
        for (const auto &d : detail::get_array(in["shape"], path + ".shape")) {
          auto extent = detail::get_int(d, path + ".shape");
          if (extent < 1)
            detail::schema_error(path + ".shape", "extents must be positive");
          decl.shape.push_back(static_cast<std::size_t>(extent));
        }
      }
      if (in.contains("width_bits")) {
        auto w = detail::get_int(in["width_bits"], path + ".width_bits");
        if (w < 1)
          detail::schema_error(path + ".width_bits", "must be positive");
        decl.width_bits = static_cast<int>(w);
      }
      if (!widths.emplace(decl.name, decl.width_bits).second)
        detail::schema_error(path, "input \"" + decl.name + "\" declared twice");
      g.inputs.push_back(std::move(decl));
    }
  }

  auto data = [&](const json &v, const std::string &path) {
    auto text_ref = detail::get_string(v, path);
    try {
      DataRef ref = DataRef::parse(text_ref);
      auto it = widths.find(ref.base_name());
      if (it != widths.end())
        ref.width_bits = it->second;
      return ref;
    } catch (const SyntaxError &e) {
      detail::schema_error(path, e.what());
    }
  };

  if (doc.contains("ops")) {
    const auto &ops = detail::get_array(doc["ops"], "$.ops");
    for (std::size_t i = 0; i < ops.size(); ++i) {
      std::string path = "$.ops[" + std::to_string(i) + "]";
      const auto &o = ops[i];
      detail::expect_keys(o, path, {"id", "opcode", "args", "result", "deps"});
      Operation op;
      op.id = detail::get_string(detail::require(o, path, "id"), path + ".id");
      if (op.id.empty())
        detail::schema_error(path + ".id", "empty operation id");
      op.opcode = detail::get_string(detail::require(o, path, "opcode"),
                                     path + ".opcode");
      const auto &args =
          detail::get_array(detail::require(o, path, "args"), path + ".args");
      if (args.empty())
        detail::schema_error(path + ".args", "an operation needs at least one operand");
      for (const auto &a : args)
        op.operands.push_back(data(a, path + ".args"));
      op.result = data(detail::require(o, path, "result"), path + ".result");
      if (o.contains("deps")) {
        std::set<std::string> deps;
        for (const auto &d : detail::get_array(o["deps"], path + ".deps"))
          deps.insert(detail::get_string(d, path + ".deps"));
        op.extra_deps.assign(deps.begin(), deps.end());
      }
      g.operations.push_back(std::move(op));
    }
  }

  if (doc.contains("outputs")) {
    for (const auto &o : detail::get_array(doc["outputs"], "$.outputs"))
      g.primary_outputs.push_back(data(o, "$.outputs"));
  }
  return g;
}

Dfg parse_dfg(std::string_view text, const Library &library) {
  if (library.empty())
    throw Error(ErrorCode::InvalidConfig, "operator library is empty");
  Dfg g = read_dfg(text);
  auto diags = check_opcodes(g, library);
  if (diags.empty())
    diags = validate_dfg(g);
  if (!diags.empty())
    throw Error(diags.front().code, diags.front().format(), diags.front().ids);
  return g;
}

std::string serialize_dfg(const Dfg &g) {
  using ojson = nlohmann::ordered_json;
  ojson doc;
  ojson inputs = ojson::array();
  for (const auto &decl : g.inputs) {
    ojson in;
    in["name"] = decl.name;
    if (!decl.shape.empty())
      in["shape"] = decl.shape;
    in["width_bits"] = decl.width_bits;
    inputs.push_back(std::move(in));
  }
  doc["inputs"] = std::move(inputs);
  ojson outputs = ojson::array();
  for (const auto &o : g.primary_outputs)
    outputs.push_back(o.name);
  doc["outputs"] = std::move(outputs);
  ojson ops = ojson::array();
  for (const auto &op : g.operations) {
    ojson o;
    o["id"] = op.id;
    o["opcode"] = op.opcode;
    ojson args = ojson::array();
    for (const auto &a : op.operands)
      args.push_back(a.name);
    o["args"] = std::move(args);
    o["result"] = op.result.name;
    if (!op.extra_deps.empty())
      o["deps"] = op.extra_deps;
    ops.push_back(std::move(o));
  }
  doc["ops"] = std::move(ops);
  return doc.dump(2) + "\n";
}

} // namespace memsched
