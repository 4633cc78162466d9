#pragma once

#include <map>
#include <string>
#include <vector>

#include "evgrid/power_flow.hpp"

namespace evgrid {

/// A horizon of solved slots, index = TimeSlot index.
using DayStates = std::vector<NetworkState>;

/// Thrown when a reduction is asked to use an unconverged slot.
class UnconvergedSlot : public std::runtime_error {
 public:
  UnconvergedSlot(int slot, const std::string& what) : std::runtime_error(what), slot_(slot) {}
  int slot() const { return slot_; }

 private:
  int slot_;
};

/// Resistive loss of one slot, watts: phase and neutral conductors.
double slot_loss_w(const NetworkState& state, const NetworkTopology& topology);
/// Same quantity from Re(sum_w dV_w conj(I_w)) per line.
double slot_loss_from_drops_w(const NetworkState& state, const NetworkTopology& topology);

double energy_losses_kwh(const DayStates& states, const NetworkTopology& topology);

struct VoltageExtreme {
  double pu = 1.0;
  BusId bus;
  TimeSlot slot;
};

/// Minimum phase-to-neutral voltages.
///
/// `per_phase` takes each phase's minimum independently over all buses and
/// slots. `at_worst_bus` fixes the bus of the overall minimum and reports each
/// phase's minimum over the day at that bus.
struct WorstVoltages {
  std::array<VoltageExtreme, 3> per_phase;
  VoltageExtreme overall;
  std::array<VoltageExtreme, 3> at_worst_bus;
};

WorstVoltages worst_bus_voltages(const DayStates& states, const NetworkTopology& topology);
VoltageExtreme max_neutral_voltage(const DayStates& states, const NetworkTopology& topology);

/// |V_ph - V_n| / V_base for phases, |V_n| / V_base for the neutral wire.
double wire_voltage_pu(const NetworkState& state, const NetworkTopology& topology, BusId bus, Wire w);

struct ScenarioReport {
  double total_loss_kwh = 0.0;
  WorstVoltages voltages;
  VoltageExtreme max_neutral;
  std::array<double, TimeSlot::kPerDay> loss_kw{};
  /// profiles[slot][bus][wire], per unit
  std::vector<std::vector<std::array<double, 4>>> profiles;
};

ScenarioReport make_report(const DayStates& states, const NetworkTopology& topology);

struct ComparisonRow {
  std::string scenario;
  double loss_kwh;
  double loss_change_pct;      // relative to the baseline's losses
  double min_voltage_pu;
  double min_voltage_change_pp;  // percentage points versus the baseline
};

/// Rows in map order; changes are (value - baseline) relative to `baseline`.
std::vector<ComparisonRow> compare_scenarios(const std::map<std::string, ScenarioReport>& reports,
                                             const std::string& baseline);

}  // namespace evgrid
