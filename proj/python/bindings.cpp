#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "memsched/export.hpp"
#include "memsched/metrics.hpp"
#include "memsched/oracle.hpp"
#include "memsched/scheduler.hpp"
#include "memsched/verify.hpp"

namespace py = pybind11;
using namespace memsched;

namespace {

SchedulerConfig make_config(int T, const std::string &policy, double reduction,
                            bool dynamic_mobility, bool positional_affinity) {
  SchedulerConfig cfg;
  cfg.time_constraint_cycles = T;
  cfg.policy = parse_policy(policy);
  cfg.model2_reduction = reduction;
  cfg.dynamic_mobility = dynamic_mobility;
  cfg.positional_affinity = positional_affinity;
  cfg.validate();
  return cfg;
}

Allocation make_allocation(const std::optional<std::map<std::string, int>> &counts,
                           const Dfg &g, const Library &lib, int T) {
  Allocation alloc = compute_min_allocation(g, lib, T);
  if (counts)
    for (const auto &[cls, n] : *counts)
      alloc.counts[cls] = n;
  return alloc;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Memory-aware list scheduling for data-flow graphs";

  static PyObject *error =
      PyErr_NewException("memsched._core.Error", PyExc_RuntimeError, nullptr);
  m.attr("Error") = py::handle(error);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p)
        std::rethrow_exception(p);
    } catch (const Error &e) {
      PyErr_SetString(error, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  py::class_<Library>(m, "Library")
      .def_static("default", &default_library)
      .def_static("parse", [](const std::string &text) { return parse_library(text); })
      .def("class_names", [](const Library &lib) {
        std::vector<std::string> names;
        for (const auto &c : lib.classes())
          names.push_back(c.name);
        return names;
      });

  py::class_<Dfg>(m, "Dfg")
      .def_static("parse",
                  [](const std::string &text, const Library &lib) {
                    return parse_dfg(text, lib);
                  },
                  py::arg("text"), py::arg("library") = default_library())
      .def("to_json", &serialize_dfg)
      .def("operation_ids",
           [](const Dfg &g) {
             std::vector<std::string> ids;
             for (const auto &op : g.operations)
               ids.push_back(op.id);
             return ids;
           })
      .def("topological_order", &topological_order)
      .def("__len__", [](const Dfg &g) { return g.operations.size(); });

  py::class_<MemoryMapping>(m, "MemoryMapping")
      .def_static("parse",
                  [](const std::string &text, const Dfg *g) { return parse_mapping(text, g); },
                  py::arg("text"), py::arg("dfg") = nullptr)
      .def_static("all_registers",
                  [](const Dfg &g) {
                    return generate_default_mapping(g, {}, MappingPolicy::AllRegisters);
                  })
      .def("to_json", &serialize_mapping)
      .def("validate", [](const MemoryMapping &mm, const Dfg &g) {
        std::vector<std::string> lines;
        for (const auto &d : validate_mapping(mm, g))
          lines.push_back(d.format());
        return lines;
      });

  py::class_<TimingAnalysis>(m, "TimingAnalysis")
      .def_readonly("asap", &TimingAnalysis::asap)
      .def_readonly("alap", &TimingAnalysis::alap)
      .def_readonly("mobility", &TimingAnalysis::mobility)
      .def_readonly("critical_path", &TimingAnalysis::critical_path_cycles);

  m.def("compute_timing", &compute_timing, py::arg("dfg"), py::arg("library"),
        py::arg("time_constraint"));

  py::class_<Schedule>(m, "Schedule")
      .def_readonly("makespan", &Schedule::makespan_cycles)
      .def("starts",
           [](const Schedule &s) {
             std::map<std::string, int> out;
             for (const auto &[id, e] : s.entries)
               out[id] = e.start_cycle;
             return out;
           })
      .def("to_json", &schedule_to_json)
      .def("to_csv", &export_csv)
      .def("to_svg", [](const Schedule &s, const MemoryMapping &mm) {
        return export_gantt(s, mm);
      });

  m.def(
      "schedule",
      [](const Dfg &g, const Library &lib, int T, const std::string &policy,
         const MemoryMapping *mm, const std::optional<std::map<std::string, int>> &alloc,
         double reduction, bool dynamic_mobility, bool positional_affinity) {
        auto cfg = make_config(T, policy, reduction, dynamic_mobility, positional_affinity);
        return run_scheduler(g, lib, make_allocation(alloc, g, lib, T), mm, cfg);
      },
      py::arg("dfg"), py::arg("library"), py::arg("time_constraint"),
      py::arg("policy") = "baseline", py::arg("mapping") = nullptr,
      py::arg("alloc") = py::none(), py::arg("reduction") = 0.25,
      py::arg("dynamic_mobility") = false, py::arg("positional_affinity") = false);

  m.def(
      "verify",
      [](const Schedule &s, const Dfg &g, const Library &lib,
         const std::map<std::string, int> &alloc, const MemoryMapping *mm) {
        return verify_schedule(s, g, lib, Allocation{alloc}, mm);
      },
      py::arg("schedule"), py::arg("dfg"), py::arg("library"), py::arg("alloc"),
      py::arg("mapping") = nullptr);

  m.def(
      "analyze",
      [](const Schedule &s, const Dfg &g, const Library &lib, const MemoryMapping &mm,
         double reduction) {
        auto cfg = s.config;
        cfg.model2_reduction = reduction;
        return metrics_to_json(analyze(s, g, lib, mm, cfg));
      },
      py::arg("schedule"), py::arg("dfg"), py::arg("library"), py::arg("mapping"),
      py::arg("reduction") = 0.25);

  m.def(
      "optimal_makespan",
      [](const Dfg &g, const Library &lib, const std::map<std::string, int> &alloc,
         const MemoryMapping *mm, int max_cycles) {
        return bruteforce_optimal_makespan(g, lib, Allocation{alloc}, mm, max_cycles)
            .makespan;
      },
      py::arg("dfg"), py::arg("library"), py::arg("alloc"), py::arg("mapping") = nullptr,
      py::arg("max_cycles") = 64);
}
