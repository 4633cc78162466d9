#include "evgrid/metrics.hpp"

#include <cmath>

#include <fmt/format.h>

namespace evgrid {

namespace {

void require_converged(const DayStates& states) {
  for (std::size_t t = 0; t < states.size(); ++t) {
    if (!states[t].converged()) {
      throw UnconvergedSlot(static_cast<int>(t),
                            fmt::format("slot {} ({}) did not converge", t, TimeSlot(static_cast<int>(t)).to_string()));
    }
  }
}

}  // namespace

double slot_loss_w(const NetworkState& s, const NetworkTopology& t) {
  double w = 0.0;
  for (std::size_t li = 0; li < t.lines().size(); ++li) {
    const auto& l = t.line(li);
    for (Phase p : kPhases) w += std::norm(s.i_line[li][idx(p)]) * l.z_phase.real();
    w += std::norm(s.i_line[li][idx(Wire::n)]) * l.z_neutral.real();
  }
  return w;
}

double slot_loss_from_drops_w(const NetworkState& s, const NetworkTopology& t) {
  double w = 0.0;
  for (std::size_t li = 0; li < t.lines().size(); ++li) {
    const auto& l = t.line(li);
    for (int k = 0; k < 4; ++k) {
      const Complex drop = s.v[l.from.index()][k] - s.v[l.to.index()][k];
      w += (drop * std::conj(s.i_line[li][k])).real();
    }
  }
  return w;
}

double energy_losses_kwh(const DayStates& states, const NetworkTopology& t) {
  require_converged(states);
  double kwh = 0.0;
  for (const auto& s : states) kwh += slot_loss_w(s, t) * TimeSlot::kHours / 1000.0;
  return kwh;
}

double wire_voltage_pu(const NetworkState& s, const NetworkTopology& t, BusId bus, Wire w) {
  const auto& v = s.v.at(bus.index());
  const Complex x = w == Wire::n ? v[idx(Wire::n)] : v[idx(w)] - v[idx(Wire::n)];
  return std::abs(x) / t.v_base();
}

WorstVoltages worst_bus_voltages(const DayStates& states, const NetworkTopology& t) {
  require_converged(states);
  WorstVoltages out;
  for (auto& e : out.per_phase) e.pu = HUGE_VAL;
  out.overall.pu = HUGE_VAL;
  for (std::size_t slot = 0; slot < states.size(); ++slot) {
    for (std::size_t b = 0; b < t.bus_count(); ++b) {
      const BusId bus = BusId::from_index(b);
      for (Phase p : kPhases) {
        const double pu = wire_voltage_pu(states[slot], t, bus, wire_of(p));
        auto& e = out.per_phase[idx(p)];
        if (pu < e.pu) e = {pu, bus, TimeSlot(static_cast<int>(slot))};
      }
    }
  }
  for (const auto& e : out.per_phase) {
    if (e.pu < out.overall.pu) out.overall = e;
  }
  for (Phase p : kPhases) {
    auto& e = out.at_worst_bus[idx(p)];
    e = {HUGE_VAL, out.overall.bus, TimeSlot{}};
    for (std::size_t slot = 0; slot < states.size(); ++slot) {
      const double pu = wire_voltage_pu(states[slot], t, out.overall.bus, wire_of(p));
      if (pu < e.pu) e = {pu, out.overall.bus, TimeSlot(static_cast<int>(slot))};
    }
  }
  return out;
}

VoltageExtreme max_neutral_voltage(const DayStates& states, const NetworkTopology& t) {
  require_converged(states);
  VoltageExtreme e{0.0, BusId{1}, TimeSlot{}};
  for (std::size_t slot = 0; slot < states.size(); ++slot) {
    for (std::size_t b = 0; b < t.bus_count(); ++b) {
      const double pu = wire_voltage_pu(states[slot], t, BusId::from_index(b), Wire::n);
      if (pu > e.pu) e = {pu, BusId::from_index(b), TimeSlot(static_cast<int>(slot))};
    }
  }
  return e;
}

ScenarioReport make_report(const DayStates& states, const NetworkTopology& t) {
  ScenarioReport r;
  r.total_loss_kwh = energy_losses_kwh(states, t);
  r.voltages = worst_bus_voltages(states, t);
  r.max_neutral = max_neutral_voltage(states, t);
  r.profiles.resize(states.size());
  for (std::size_t slot = 0; slot < states.size(); ++slot) {
    if (slot < r.loss_kw.size()) r.loss_kw[slot] = slot_loss_w(states[slot], t) / 1000.0;
    auto& prof = r.profiles[slot];
    prof.resize(t.bus_count());
    for (std::size_t b = 0; b < t.bus_count(); ++b) {
      for (Wire w : kWires) prof[b][idx(w)] = wire_voltage_pu(states[slot], t, BusId::from_index(b), w);
    }
  }
  return r;
}

std::vector<ComparisonRow> compare_scenarios(const std::map<std::string, ScenarioReport>& reports,
                                             const std::string& baseline) {
  if (reports.size() < 2) throw std::invalid_argument("comparison needs at least two scenarios");
  auto base = reports.find(baseline);
  if (base == reports.end()) throw std::invalid_argument(fmt::format("baseline scenario '{}' missing", baseline));
  const double base_loss = base->second.total_loss_kwh;
  const double base_v = base->second.voltages.overall.pu;
  std::vector<ComparisonRow> rows;
  for (const auto& [name, r] : reports) {
    ComparisonRow row;
    row.scenario = name;
    row.loss_kwh = r.total_loss_kwh;
    row.loss_change_pct = base_loss > 0.0 ? 100.0 * (r.total_loss_kwh - base_loss) / base_loss : 0.0;
    row.min_voltage_pu = r.voltages.overall.pu;
    row.min_voltage_change_pp = 100.0 * (r.voltages.overall.pu - base_v);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace evgrid
