#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "evgrid/scenario.hpp"

namespace py = pybind11;
using namespace evgrid;

namespace {

using Demand = std::map<std::pair<int, std::string>, Complex>;

Phase phase_arg(const std::string& s) {
  try {
    return parse_phase(s);
  } catch (const std::invalid_argument& e) {
    throw py::value_error(e.what());
  }
}

BusInjection to_injection(const NetworkTopology& t, const Demand& demand) {
  BusInjection inj(t.bus_count());
  for (const auto& [key, s] : demand) {
    if (!t.contains(BusId{key.first})) throw py::value_error("unknown bus " + std::to_string(key.first));
    inj.at(BusId{key.first}, phase_arg(key.second)) = s;
  }
  return inj;
}

SolverOptions options_for(const NetworkTopology& t, std::optional<double> tolerance, int max_iterations) {
  auto o = SolverOptions::for_topology(t);
  if (tolerance) o.tolerance = *tolerance;
  o.max_iterations = max_iterations;
  return o;
}

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::not_converged: return "not_converged";
    case SolveStatus::voltage_collapse: return "voltage_collapse";
  }
  return "?";
}

ScenarioConfig make_config(const py::kwargs& kw) {
  ScenarioConfig c;
  bool sampled = false;
  for (const auto& [k, v] : kw) {
    const auto key = py::cast<std::string>(k);
    if (key == "feeder") c.feeder = py::cast<std::filesystem::path>(v);
    else if (key == "impedance_scale") c.impedance_scale = py::cast<double>(v);
    else if (key == "curve") c.base_curve = py::cast<std::filesystem::path>(v);
    else if (key == "peak_w") c.peak_w = py::cast<double>(v);
    else if (key == "sigma") c.sigma_fraction = py::cast<double>(v);
    else if (key == "power_factor") c.power_factor.value = py::cast<double>(v);
    else if (key == "leading_pf") c.power_factor.leading = py::cast<bool>(v);
    else if (key == "fleet") c.fleet_file = py::cast<std::filesystem::path>(v);
    else if (key == "penetration") { c.penetration = py::cast<double>(v); sampled = true; }
    else if (key == "charge_power_w") c.charge_power_w = py::cast<double>(v);
    else if (key == "strategy") c.strategy = parse_strategy(py::cast<std::string>(v));
    else if (key == "timer_start") c.timer_start = TimeSlot::parse(py::cast<std::string>(v));
    else if (key == "zones") c.zones = py::cast<std::filesystem::path>(v);
    else if (key == "seed") c.seed = py::cast<std::uint64_t>(v);
    else if (key == "trials") c.trials = py::cast<int>(v);
    else if (key == "tolerance") c.tolerance = py::cast<double>(v);
    else if (key == "max_iterations") c.max_iterations = py::cast<int>(v);
    else if (key == "out_dir") c.out_dir = py::cast<std::filesystem::path>(v);
    else throw py::type_error("unknown option '" + key + "'");
  }
  if (c.feeder.empty()) throw py::value_error("feeder is required");
  if (sampled && c.fleet_file) throw py::value_error("give either fleet or penetration, not both");
  return c;
}

py::dict extreme(const VoltageExtreme& e) {
  py::dict d;
  d["pu"] = e.pu;
  d["bus"] = e.bus.value;
  d["time"] = e.slot.to_string();
  return d;
}

py::dict summarize(const ScenarioResult& r) {
  py::dict d;
  d["name"] = r.name;
  d["loss_kwh"] = r.loss_kwh.mean;
  d["loss_kwh_stddev"] = r.loss_kwh.stddev;
  d["min_voltage_pu"] = r.min_voltage_pu.mean;
  d["max_neutral_pu"] = r.max_neutral_pu.mean;
  py::list trials;
  for (const auto& tr : r.trials) {
    py::dict t;
    t["seed"] = tr.seed;
    t["loss_kwh"] = tr.report.total_loss_kwh;
    t["min_voltage"] = extreme(tr.report.voltages.overall);
    py::list per_phase;
    for (const auto& e : tr.report.voltages.per_phase) per_phase.append(extreme(e));
    t["min_voltage_per_phase"] = per_phase;
    t["max_neutral"] = extreme(tr.report.max_neutral);
    t["loss_kw"] = std::vector<double>(tr.report.loss_kw.begin(), tr.report.loss_kw.end());
    t["vehicles"] = tr.fleet.vehicles.size();
    std::vector<std::string> warnings = tr.fleet.warnings;
    warnings.insert(warnings.end(), tr.schedule.warnings.begin(), tr.schedule.warnings.end());
    t["warnings"] = warnings;
    trials.append(t);
  }
  d["trials"] = trials;
  return d;
}

py::list fleet_rows(const FleetSpec& f) {
  py::list out;
  for (const auto& ev : f.vehicles) {
    py::dict d;
    d["bus"] = ev.bus.value;
    d["phase"] = std::string(1, phase_char(ev.phase));
    d["capacity_kwh"] = ev.capacity_kwh;
    d["arrival"] = ev.arrival.to_string();
    d["departure"] = ev.departure.to_string();
    d["initial_soc"] = ev.initial_soc;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_evgrid, m) {
  m.doc() = "Unbalanced four-wire feeder power flow and EV charging scenarios";
  m.attr("__version__") = kVersion;
  m.attr("DEFAULT_IMPEDANCE_SCALE") = kDefaultImpedanceScale;

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<TopologyError>(m, "TopologyError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_RuntimeError);
  py::register_exception<InfeasibleSchedule>(m, "InfeasibleSchedule", PyExc_ValueError);

  py::class_<NetworkTopology>(m, "Topology")
      .def_property_readonly("bus_count", &NetworkTopology::bus_count)
      .def_property_readonly("slack_voltage", &NetworkTopology::slack_voltage)
      .def_property_readonly("v_base", &NetworkTopology::v_base)
      .def_property_readonly("transformer_reactance", &NetworkTopology::transformer_reactance)
      .def_property_readonly("lines",
                             [](const NetworkTopology& t) {
                               py::list out;
                               for (const auto& l : t.lines()) {
                                 out.append(py::make_tuple(l.from.value, l.to.value, l.z_phase, l.z_neutral));
                               }
                               return out;
                             })
      .def("children",
           [](const NetworkTopology& t, int bus) {
             std::vector<int> out;
             for (auto b : t.children(BusId{bus})) out.push_back(b.value);
             return out;
           })
      .def("serialize", &serialize_topology)
      .def("__eq__", [](const NetworkTopology& a, const NetworkTopology& b) { return a == b; });

  m.def("load_topology", &load_topology, py::arg("path"));
  m.def("parse_topology", [](const std::string& text) { return parse_topology(text); }, py::arg("text"));
  m.def("scale_impedances", &scale_impedances, py::arg("topology"), py::arg("factor"));

  py::class_<NetworkState>(m, "State")
      .def_property_readonly("converged", &NetworkState::converged)
      .def_property_readonly("status", [](const NetworkState& s) { return status_name(s.status); })
      .def_readonly("iterations", &NetworkState::iterations)
      .def_readonly("residual", &NetworkState::residual)
      .def_property_readonly("voltages",
                             [](const NetworkState& s) {
                               std::vector<std::vector<Complex>> out;
                               for (const auto& v : s.v) out.emplace_back(v.begin(), v.end());
                               return out;
                             })
      .def_property_readonly("line_currents",
                             [](const NetworkState& s) {
                               std::vector<std::vector<Complex>> out;
                               for (const auto& i : s.i_line) out.emplace_back(i.begin(), i.end());
                               return out;
                             })
      .def("phase_to_neutral",
           [](const NetworkState& s, int bus, const std::string& p) {
             return s.phase_to_neutral(BusId{bus}, phase_arg(p));
           });

  const char* demand_doc = "demand maps (bus, 'a'|'b'|'c') to complex power P + jQ in W/var";
  m.def(
      "solve_sweep",
      [](const NetworkTopology& t, const Demand& d, std::optional<double> tol, int it) {
        return solve_sweep(t, to_injection(t, d), options_for(t, tol, it));
      },
      py::arg("topology"), py::arg("demand"), py::arg("tolerance") = py::none(), py::arg("max_iterations") = 100,
      demand_doc);
  m.def(
      "solve_direct",
      [](const NetworkTopology& t, const Demand& d, std::optional<double> tol, int it) {
        return solve_direct(t, to_injection(t, d), options_for(t, tol, it));
      },
      py::arg("topology"), py::arg("demand"), py::arg("tolerance") = py::none(), py::arg("max_iterations") = 100,
      demand_doc);
  m.def(
      "kcl_residual",
      [](const NetworkState& s, const NetworkTopology& t, const Demand& d) {
        return kcl_residual(s, t, to_injection(t, d));
      },
      py::arg("state"), py::arg("topology"), py::arg("demand"));
  m.def("max_voltage_difference_pu", &max_voltage_difference_pu, py::arg("a"), py::arg("b"), py::arg("topology"));

  m.def(
      "charge_duration_slots",
      [](double capacity_kwh, double initial_soc, double charge_power_w) {
        EvSpec ev;
        ev.capacity_kwh = capacity_kwh;
        ev.initial_soc = initial_soc;
        return charge_duration_slots(ev, charge_power_w);
      },
      py::arg("capacity_kwh"), py::arg("initial_soc"), py::arg("charge_power_w") = 3500.0);

  m.def(
      "load_fleet", [](const std::filesystem::path& p) { return fleet_rows(load_fleet(p)); }, py::arg("path"));
  m.def(
      "schedule",
      [](const std::filesystem::path& fleet_file, const std::string& strategy, const std::string& timer_start,
         std::optional<std::filesystem::path> zones) {
        ScenarioConfig c;
        c.strategy = parse_strategy(strategy);
        c.timer_start = TimeSlot::parse(timer_start);
        c.zones = zones;
        const auto fleet = load_fleet(fleet_file);
        const auto s = make_schedule(c, fleet);
        py::list out;
        for (const auto& w : s.windows) {
          const auto& ev = fleet.vehicles[w.vehicle];
          out.append(py::make_tuple(std::to_string(ev.bus.value) + "." + phase_char(ev.phase), w.start.to_string(),
                                    w.end().to_string(), w.duration));
        }
        return out;
      },
      py::arg("fleet"), py::arg("strategy"), py::arg("timer_start") = "24:00", py::arg("zones") = py::none(),
      "Charging windows as (vehicle, start, end, slots); end is exclusive.");

  m.def(
      "run_scenario", [](const py::kwargs& kw) { return summarize(run_scenario(make_config(kw))); },
      "Simulate one strategy over the day. Options mirror the command line.");
  m.def(
      "run_sweep",
      [](const std::string& baseline, const py::kwargs& kw) {
        const auto sweep = run_sweep(make_config(kw), parse_strategy(baseline));
        py::dict out;
        for (const auto& [name, r] : sweep.scenarios) out[py::str(name)] = summarize(r);
        py::list rows;
        for (const auto& row : sweep.comparison.front()) {
          py::dict d;
          d["scenario"] = row.scenario;
          d["loss_kwh"] = row.loss_kwh;
          d["loss_change_pct"] = row.loss_change_pct;
          d["min_voltage_pu"] = row.min_voltage_pu;
          d["min_voltage_change_pp"] = row.min_voltage_change_pp;
          rows.append(d);
        }
        out["comparison"] = rows;
        return out;
      },
      py::arg("baseline") = "uncontrolled");
  m.def("validate", [](const py::kwargs& kw) {
    py::list out;
    for (const auto& r : validate(make_config(kw))) {
      py::dict d;
      d["label"] = r.label;
      d["time"] = r.slot.to_string();
      d["max_difference_pu"] = r.max_difference_pu;
      d["kcl_residual_a"] = r.kcl_residual_a;
      d["power_balance_rel"] = r.power_balance_rel;
      d["pass"] = r.pass;
      out.append(d);
    }
    return out;
  });
}
