#include "memsched/memmap.hpp"

#include <algorithm>
#include <set>

#include "json_util.hpp"

namespace memsched {

using detail::json;

const MemoryBank *MemoryMapping::find_bank(std::string_view id) const {
  for (const auto &b : banks)
    if (b.id == id)
      return &b;
  return nullptr;
}

std::optional<Location> MemoryMapping::locate(const DataRef &item) const {
  auto resolve = [&](const std::string &target) -> std::optional<Location> {
    if (target == kRegister)
      return Location{};
    const auto *bank = find_bank(target);
    if (bank == nullptr)
      return std::nullopt;
    return Location{bank};
  };
  if (auto it = placement.find(item.name); it != placement.end())
    return resolve(it->second);
  if (item.element) {
    if (auto it = placement.find(item.element->array); it != placement.end())
      return resolve(it->second);
  }
  if (default_register)
    return Location{};
  return std::nullopt;
}

int AccessRequirement::total_reads() const {
  int total = 0;
  for (const auto &[bank, count] : reads)
    total += count;
  return total;
}

namespace {

void check_capacity(const MemoryMapping &m,
                    const std::map<std::string, std::size_t> &placed) {
  for (const auto &bank : m.banks) {
    auto it = placed.find(bank.id);
    if (bank.capacity_words && it != placed.end() &&
        it->second > *bank.capacity_words)
      throw Error(ErrorCode::CapacityExceeded,
                  "bank " + bank.id + " holds " + std::to_string(it->second) +
                      " items, capacity " +
                      std::to_string(*bank.capacity_words),
                  {bank.id});
  }
}

} // namespace

MemoryMapping parse_mapping(std::string_view text, const Dfg *g) {
  json doc = detail::parse_json(text);
  detail::expect_keys(doc, "$", {"banks", "place", "default"});

  MemoryMapping m;
  const auto &banks =
      detail::get_array(detail::require(doc, "$", "banks"), "$.banks");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < banks.size(); ++i) {
    std::string path = "$.banks[" + std::to_string(i) + "]";
    const auto &b = banks[i];
    detail::expect_keys(b, path,
                        {"id", "ports", "read_latency", "write_latency",
                         "level", "capacity_words", "energy_per_access"});
    MemoryBank bank;
    bank.id = detail::get_string(detail::require(b, path, "id"), path + ".id");
    if (bank.id.empty() || bank.id == kRegister || !ids.insert(bank.id).second)
      detail::schema_error(path + ".id", "bank id empty, reserved or repeated");
    auto positive = [&](std::string_view key) {
      auto v = detail::get_int(detail::require(b, path, key),
                               path + "." + std::string(key));
      if (v < 1)
        detail::schema_error(path + "." + std::string(key), "must be >= 1");
      return static_cast<int>(v);
    };
    bank.ports = positive("ports");
    bank.read_latency_cycles = positive("read_latency");
    bank.write_latency_cycles = positive("write_latency");
    if (b.contains("level")) {
      auto level = detail::get_int(b["level"], path + ".level");
      if (level < 0)
        detail::schema_error(path + ".level", "must be >= 0");
      bank.level = static_cast<int>(level);
    }
    if (b.contains("capacity_words") && !b["capacity_words"].is_null()) {
      auto cap = detail::get_int(b["capacity_words"], path + ".capacity_words");
      if (cap < 1)
        detail::schema_error(path + ".capacity_words", "must be >= 1");
      bank.capacity_words = static_cast<std::size_t>(cap);
    }
    if (b.contains("energy_per_access")) {
      bank.energy_per_access =
          detail::get_number(b["energy_per_access"], path + ".energy_per_access");
      if (bank.energy_per_access < 0.0)
        detail::schema_error(path + ".energy_per_access", "must be >= 0");
    }
    m.banks.push_back(std::move(bank));
  }

  if (doc.contains("default")) {
    if (detail::get_string(doc["default"], "$.default") != kRegister)
      detail::schema_error("$.default", "only \"REGISTER\" is accepted");
    m.default_register = true;
  }

  std::map<std::string, std::string> raw;
  if (doc.contains("place")) {
    if (!doc["place"].is_object())
      detail::schema_error("$.place", "expected an object");
    for (const auto &[key, value] : doc["place"].items()) {
      auto target = detail::get_string(value, "$.place." + key);
      if (target != kRegister && m.find_bank(target) == nullptr)
        throw Error(ErrorCode::UnknownBank,
                    "placement of " + key + " names undeclared bank " + target,
                    {target});
      raw.emplace(key, std::move(target));
    }
  }

  m.placement = std::move(raw);
  if (g != nullptr) {
    // Expand whole-array keys to the elements the graph knows about. The
    // array key itself stays for lookups of elements added later.
    std::map<std::string, std::string> expanded;
    for (const auto &item : g->data_items()) {
      if (!item.element || m.placement.count(item.name) != 0)
        continue;
      if (auto it = m.placement.find(item.element->array);
          it != m.placement.end())
        expanded.emplace(item.name, it->second);
    }
    m.placement.merge(expanded);
  }

  std::map<std::string, std::size_t> placed;
  if (g == nullptr) {
    for (const auto &[key, target] : m.placement)
      if (target != kRegister)
        ++placed[target];
  } else {
    for (const auto &item : g->data_items()) {
      auto loc = m.locate(item);
      if (loc && !loc->in_register())
        ++placed[loc->bank->id];
    }
  }
  check_capacity(m, placed);
  return m;
}

std::string serialize_mapping(const MemoryMapping &m) {
  using ojson = nlohmann::ordered_json;
  ojson doc;
  ojson banks = ojson::array();
  for (const auto &b : m.banks) {
    ojson o;
    o["id"] = b.id;
    o["ports"] = b.ports;
    o["read_latency"] = b.read_latency_cycles;
    o["write_latency"] = b.write_latency_cycles;
    o["level"] = b.level;
    if (b.capacity_words)
      o["capacity_words"] = *b.capacity_words;
    o["energy_per_access"] = b.energy_per_access;
    banks.push_back(std::move(o));
  }
  doc["banks"] = std::move(banks);
  ojson place = ojson::object();
  for (const auto &[key, target] : m.placement)
    place[key] = target;
  doc["place"] = std::move(place);
  if (m.default_register)
    doc["default"] = kRegister;
  return doc.dump(2) + "\n";
}

AccessRequirement access_requirements(const Operation &op,
                                      const MemoryMapping &m) {
  AccessRequirement req;
  req.op_id = op.id;
  auto where = [&](const DataRef &d) {
    auto loc = m.locate(d);
    if (!loc)
      throw Error(ErrorCode::UnmappedData, d.name + " (op " + op.id + ")",
                  {d.name, op.id});
    return *loc;
  };
  std::set<std::string> fetched;
  for (const auto &arg : op.operands) {
    auto loc = where(arg);
    if (!fetched.insert(arg.name).second || loc.in_register())
      continue;
    ++req.reads[loc.bank->id];
  }
  auto out = where(op.result);
  if (!out.in_register())
    req.writes[out.bank->id] = 1;
  return req;
}

std::vector<Diagnostic> validate_mapping(const MemoryMapping &m,
                                         const Dfg &g) {
  std::vector<Diagnostic> diags;

  for (const auto &[key, target] : m.placement) {
    if (target != kRegister && m.find_bank(target) == nullptr)
      diags.push_back({ErrorCode::UnknownBank, target + " (for " + key + ")",
                       {target, key}});
  }

  std::set<std::string> used;
  for (const auto &op : g.operations) {
    for (const auto &arg : op.operands)
      used.insert(arg.name);
    used.insert(op.result.name);
  }
  std::map<std::string, std::size_t> placed;
  std::set<std::string> unmapped;
  for (const auto &item : g.data_items()) {
    auto loc = m.locate(item);
    if (!loc) {
      if (used.count(item.name) != 0) {
        unmapped.insert(item.name);
        diags.push_back({ErrorCode::UnmappedData, item.name, {item.name}});
      }
    } else if (!loc->in_register()) {
      ++placed[loc->bank->id];
    }
  }
  for (const auto &bank : m.banks) {
    auto it = placed.find(bank.id);
    if (bank.capacity_words && it != placed.end() &&
        it->second > *bank.capacity_words)
      diags.push_back({ErrorCode::CapacityExceeded,
                       bank.id + " (" + std::to_string(it->second) + " > " +
                           std::to_string(*bank.capacity_words) + ")",
                       {bank.id}});
  }

  for (const auto &op : g.operations) {
    bool skip = std::any_of(op.operands.begin(), op.operands.end(),
                            [&](const DataRef &d) {
                              return unmapped.count(d.name) != 0;
                            }) ||
                unmapped.count(op.result.name) != 0;
    if (skip)
      continue;
    // Reads share one window, the write has its own, so only reads can
    // exceed a bank's ports within a single operation.
    auto req = access_requirements(op, m);
    for (const auto &[bank_id, need] : req.reads) {
      const auto *bank = m.find_bank(bank_id);
      if (need > bank->ports)
        diags.push_back({ErrorCode::PortOverSubscribed,
                         op.id + " on " + bank_id + " (need " +
                             std::to_string(need) + ", have " +
                             std::to_string(bank->ports) + ")",
                         {op.id, bank_id, std::to_string(need),
                          std::to_string(bank->ports)}});
    }
  }
  return diags;
}

MemoryMapping generate_default_mapping(const Dfg &g,
                                       std::vector<MemoryBank> banks,
                                       MappingPolicy policy) {
  MemoryMapping m;
  m.banks = std::move(banks);
  if (policy == MappingPolicy::AllRegisters) {
    m.default_register = true;
    return m;
  }
  if (m.banks.empty())
    throw Error(ErrorCode::InvalidConfig,
                "round-robin mapping needs at least one bank");

  std::vector<std::size_t> fill(m.banks.size(), 0);
  std::size_t cursor = 0;
  for (const auto &item : g.data_items()) {
    bool placed = false;
    for (std::size_t k = 0; k < m.banks.size(); ++k) {
      std::size_t b = (cursor + k) % m.banks.size();
      const auto &cap = m.banks[b].capacity_words;
      if (cap && fill[b] >= *cap)
        continue;
      m.placement[item.name] = m.banks[b].id;
      ++fill[b];
      cursor = b + 1;
      placed = true;
      break;
    }
    if (!placed)
      throw Error(ErrorCode::CapacityExceeded,
                  "all banks full while placing " + item.name, {item.name});
  }
  return m;
}

} // namespace memsched
