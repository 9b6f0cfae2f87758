#include "memsched/export.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "json_util.hpp"

namespace memsched {

using ojson = nlohmann::ordered_json;

//===----------------------------------------------------------------------===//
// CSV
//===----------------------------------------------------------------------===//

namespace {

std::string csv_field(const std::string &s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

constexpr std::string_view kCsvHeader = "op,start,end,class,instance,model2";

} // namespace

std::string export_csv(const Schedule &s) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto *e : s.ordered())
    out << csv_field(e->op_id) << ',' << e->start_cycle << ',' << e->end_cycle
        << ',' << csv_field(e->instance.class_name) << ',' << e->instance.index
        << ',' << (e->is_model2 ? 1 : 0) << '\n';
  return out.str();
}

Schedule parse_csv(std::string_view text) {
  Schedule s;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos
                                                 ? std::string_view::npos
                                                 : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line_no == 1) {
      if (line != kCsvHeader)
        throw SyntaxError("unexpected CSV header", 1, 1);
      continue;
    }
    if (line.empty())
      continue;
    auto f = split_csv_line(line);
    if (f.size() != 6)
      throw SyntaxError("expected 6 fields", line_no, 1);
    try {
      ScheduleEntry e;
      e.op_id = f[0];
      e.start_cycle = std::stoi(f[1]);
      e.end_cycle = std::stoi(f[2]);
      e.instance = InstanceRef{f[3], std::stoi(f[4])};
      if (f[5] != "0" && f[5] != "1")
        throw std::invalid_argument("model2");
      e.is_model2 = f[5] == "1";
      s.makespan_cycles = std::max(s.makespan_cycles, e.end_cycle);
      if (!s.entries.emplace(e.op_id, std::move(e)).second)
        throw SyntaxError("duplicate operation " + f[0], line_no, 1);
    } catch (const std::logic_error &) {
      throw SyntaxError("malformed number in CSV row", line_no, 1);
    }
  }
  if (line_no == 0)
    throw SyntaxError("empty CSV document", 1, 1);
  return s;
}

//===----------------------------------------------------------------------===//
// JSON
//===----------------------------------------------------------------------===//

namespace {

ojson booking_json(const PortBooking &b) {
  ojson o;
  o["bank"] = b.bank;
  o["port"] = b.port;
  o["from"] = b.interval.start;
  o["to"] = b.interval.end;
  return o;
}

PortBooking booking_from(const detail::json &v, const std::string &path) {
  detail::expect_keys(v, path, {"bank", "port", "from", "to"});
  PortBooking b;
  b.bank = detail::get_string(detail::require(v, path, "bank"), path + ".bank");
  b.port = static_cast<int>(
      detail::get_int(detail::require(v, path, "port"), path + ".port"));
  b.interval.start = static_cast<int>(
      detail::get_int(detail::require(v, path, "from"), path + ".from"));
  b.interval.end = static_cast<int>(
      detail::get_int(detail::require(v, path, "to"), path + ".to"));
  return b;
}

} // namespace

std::string schedule_to_json(const Schedule &s) {
  ojson doc;
  doc["policy"] = to_string(s.policy);
  doc["time_constraint"] = s.config.time_constraint_cycles;
  doc["makespan"] = s.makespan_cycles;
  ojson entries = ojson::array();
  for (const auto *e : s.ordered()) {
    ojson o;
    o["op"] = e->op_id;
    o["start"] = e->start_cycle;
    o["end"] = e->end_cycle;
    o["class"] = e->instance.class_name;
    o["instance"] = e->instance.index;
    ojson reads = ojson::array();
    for (const auto &b : e->read_bookings)
      reads.push_back(booking_json(b));
    o["reads"] = std::move(reads);
    if (e->write_booking)
      o["write"] = booking_json(*e->write_booking);
    o["model2"] = e->is_model2;
    entries.push_back(std::move(o));
  }
  doc["entries"] = std::move(entries);
  return doc.dump(2) + "\n";
}

Schedule schedule_from_json(std::string_view text) {
  auto doc = detail::parse_json(text);
  detail::expect_keys(doc, "$",
                      {"policy", "time_constraint", "makespan", "entries"});
  Schedule s;
  try {
    s.policy = parse_policy(
        detail::get_string(detail::require(doc, "$", "policy"), "$.policy"));
  } catch (const Error &e) {
    detail::schema_error("$.policy", e.what());
  }
  s.config.policy = s.policy;
  s.config.time_constraint_cycles = static_cast<int>(detail::get_int(
      detail::require(doc, "$", "time_constraint"), "$.time_constraint"));
  s.makespan_cycles = static_cast<int>(
      detail::get_int(detail::require(doc, "$", "makespan"), "$.makespan"));
  const auto &entries =
      detail::get_array(detail::require(doc, "$", "entries"), "$.entries");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    std::string path = "$.entries[" + std::to_string(i) + "]";
    const auto &o = entries[i];
    detail::expect_keys(o, path, {"op", "start", "end", "class", "instance",
                                  "reads", "write", "model2"});
    ScheduleEntry e;
    e.op_id = detail::get_string(detail::require(o, path, "op"), path + ".op");
    e.start_cycle = static_cast<int>(
        detail::get_int(detail::require(o, path, "start"), path + ".start"));
    e.end_cycle = static_cast<int>(
        detail::get_int(detail::require(o, path, "end"), path + ".end"));
    e.instance.class_name =
        detail::get_string(detail::require(o, path, "class"), path + ".class");
    e.instance.index = static_cast<int>(detail::get_int(
        detail::require(o, path, "instance"), path + ".instance"));
    const auto &reads =
        detail::get_array(detail::require(o, path, "reads"), path + ".reads");
    for (const auto &r : reads)
      e.read_bookings.push_back(booking_from(r, path + ".reads"));
    if (o.contains("write"))
      e.write_booking = booking_from(o["write"], path + ".write");
    const auto &m2 = detail::require(o, path, "model2");
    if (!m2.is_boolean())
      detail::schema_error(path + ".model2", "expected a boolean");
    e.is_model2 = m2.get<bool>();
    if (!s.entries.emplace(e.op_id, e).second)
      detail::schema_error(path, "duplicate operation " + e.op_id);
  }
  return s;
}

namespace {

ojson metrics_object(const ScheduleMetrics &m) {
  ojson o;
  o["makespan"] = m.makespan_cycles;
  o["op_count"] = m.op_count;
  o["model2_count"] = m.model2_count;
  o["model2_ratio"] = m.model2_ratio;
  o["datapath_energy"] = m.datapath_energy;
  o["memory_energy"] = m.memory_energy;
  o["total_conflicts"] = m.total_conflicts;
  ojson banks = ojson::object();
  for (const auto &[id, b] : m.per_bank) {
    ojson bo;
    bo["accesses"] = b.accesses;
    bo["peak_simultaneous_requests"] = b.peak_simultaneous_requests;
    bo["port_conflict_cycles"] = b.port_conflict_cycles;
    banks[id] = std::move(bo);
  }
  o["per_bank"] = std::move(banks);
  return o;
}

} // namespace

std::string metrics_to_json(const ScheduleMetrics &metrics) {
  return metrics_object(metrics).dump(2) + "\n";
}

std::string comparison_to_json(const ComparisonReport &report) {
  ojson o;
  o["left"] = metrics_object(report.left);
  o["right"] = metrics_object(report.right);
  o["makespan_delta"] = report.makespan_delta;
  o["datapath_energy_delta"] = report.datapath_energy_delta;
  o["memory_energy_delta"] = report.memory_energy_delta;
  o["energy_delta"] = report.energy_delta;
  o["model2_delta"] = report.model2_delta;
  o["conflict_delta"] = report.conflict_delta;
  o["verdict"] = report.verdict;
  return o.dump(2) + "\n";
}

//===----------------------------------------------------------------------===//
// SVG Gantt chart
//===----------------------------------------------------------------------===//

namespace {

constexpr int kCell = 24;
constexpr int kRow = 22;
constexpr int kLabel = 110;
constexpr int kTop = 28;

std::string escape_xml(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
  return out;
}

} // namespace

std::string export_gantt(const Schedule &s, const MemoryMapping &m,
                         const Allocation *alloc) {
  std::set<InstanceRef> instances;
  if (alloc != nullptr)
    for (const auto &[cls, n] : alloc->counts)
      for (int k = 0; k < n; ++k)
        instances.insert(InstanceRef{cls, k});
  int first = 0;
  int last = std::max(1, s.makespan_cycles);
  for (const auto &[id, e] : s.entries) {
    instances.insert(e.instance);
    for (const auto &b : e.read_bookings)
      first = std::min(first, b.interval.start);
    last = std::max(last, e.available_cycle());
  }

  std::vector<std::string> rows;
  std::map<InstanceRef, int> instance_row;
  for (const auto &inst : instances) {
    instance_row[inst] = static_cast<int>(rows.size());
    rows.push_back(inst.class_name + "#" + std::to_string(inst.index));
  }
  std::map<std::pair<std::string, int>, int> port_row;
  for (const auto &b : m.banks)
    for (int p = 0; p < b.ports; ++p) {
      port_row[{b.id, p}] = static_cast<int>(rows.size());
      rows.push_back(b.id + ".p" + std::to_string(p));
    }

  const int span = last - first;
  const int width = kLabel + span * kCell + 20;
  const int height = kTop + static_cast<int>(rows.size()) * kRow + 20;
  auto x_of = [&](int cycle) { return kLabel + (cycle - first) * kCell; };
  auto y_of = [&](int row) { return kTop + row * kRow; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << width << "\" height=\"" << height << "\" font-family=\"monospace\" "
      << "font-size=\"11\">\n";

  // Axes and cycle ticks.
  const int axis_y = y_of(0) - 6;
  svg << "<line x1=\"" << x_of(first) << "\" y1=\"" << axis_y << "\" x2=\""
      << x_of(last) << "\" y2=\"" << axis_y << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << x_of(first) << "\" y1=\"" << axis_y << "\" x2=\""
      << x_of(first) << "\" y2=\"" << y_of(static_cast<int>(rows.size()))
      << "\" stroke=\"black\"/>\n";
  for (int c = first; c <= last; ++c)
    svg << "<text x=\"" << x_of(c) << "\" y=\"" << axis_y - 4
        << "\" text-anchor=\"middle\">" << c << "</text>\n";
  for (std::size_t r = 0; r < rows.size(); ++r)
    svg << "<text x=\"4\" y=\"" << y_of(static_cast<int>(r)) + 15 << "\">"
        << escape_xml(rows[r]) << "</text>\n";

  auto box = [&](const char *kind, const char *fill, int row, Interval w,
                 const std::string &label) {
    svg << "<rect class=\"" << kind << "\" x=\"" << x_of(w.start) << "\" y=\""
        << y_of(row) + 2 << "\" width=\"" << (w.end - w.start) * kCell
        << "\" height=\"" << kRow - 4 << "\" fill=\"" << fill
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << x_of(w.start) + 3 << "\" y=\"" << y_of(row) + 15
        << "\">" << escape_xml(label) << "</text>\n";
  };
  for (const auto *e : s.ordered()) {
    box("op", e->is_model2 ? "#9fd89f" : "#9fc5e8", instance_row.at(e->instance),
        Interval{e->start_cycle, e->end_cycle}, e->op_id);
    for (const auto &b : e->read_bookings)
      if (auto it = port_row.find({b.bank, b.port}); it != port_row.end())
        box("read", "#f6d58e", it->second, b.interval, e->op_id);
    if (e->write_booking)
      if (auto it = port_row.find({e->write_booking->bank, e->write_booking->port});
          it != port_row.end())
        box("write", "#ea9999", it->second, e->write_booking->interval, e->op_id);
  }
  svg << "</svg>\n";
  return svg.str();
}

} // namespace memsched
