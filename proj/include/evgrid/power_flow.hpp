#pragma once

#include <vector>

#include "evgrid/grid.hpp"

namespace evgrid {

/// Per-phase complex demand S = P + jQ (W, var) at one bus. Constant-PQ.
using PhaseDemand = std::array<Complex, 3>;

/// Demand for every bus of a topology, indexed by BusId::index().
/// Demand at the slack bus is served directly by the source.
struct BusInjection {
  std::vector<PhaseDemand> demand;

  explicit BusInjection(std::size_t bus_count = 0) : demand(bus_count, PhaseDemand{}) {}
  Complex& at(BusId bus, Phase p) { return demand.at(bus.index())[idx(p)]; }
  Complex at(BusId bus, Phase p) const { return demand.at(bus.index())[idx(p)]; }
};

struct SolverOptions {
  double tolerance = 1e-6 * 220.0;  // volts, max |dV| between sweeps
  int max_iterations = 100;
  double collapse_floor_pu = 0.5;

  /// Default tolerance scaled to a topology's voltage base.
  static SolverOptions for_topology(const NetworkTopology& t) {
    SolverOptions o;
    o.tolerance = 1e-6 * t.v_base();
    return o;
  }
};

enum class SolveStatus { converged, not_converged, voltage_collapse };

using WireValues = std::array<Complex, 4>;

/// Solution of one time slot.
///
/// Line currents are positive from parent to child on every wire. Load
/// currents flow from the phase conductor to the neutral at their bus.
struct NetworkState {
  std::vector<WireValues> v;        // per bus
  std::vector<WireValues> i_line;   // per line, same order as topology.lines()
  std::vector<PhaseDemand> i_load;  // per bus
  SolveStatus status = SolveStatus::not_converged;
  int iterations = 0;
  double residual = 0.0;  // last max |dV|, volts

  bool converged() const { return status == SolveStatus::converged; }
  Complex phase_to_neutral(BusId bus, Phase p) const {
    const auto& w = v.at(bus.index());
    return w[idx(p)] - w[idx(Wire::n)];
  }
};

/// Backward-forward sweep over the radial tree, flat start.
NetworkState solve_sweep(const NetworkTopology& topology, const BusInjection& injections,
                         const SolverOptions& options = {});

/// Dense nodal-admittance solve of the same equations; used as an
/// independent cross-check of solve_sweep.
NetworkState solve_direct(const NetworkTopology& topology, const BusInjection& injections,
                          const SolverOptions& options = {});

/// Largest Kirchhoff current-law mismatch (amps) over non-slack buses and all
/// four wires, using the state's own load currents as local injections.
double kcl_residual(const NetworkState& state, const NetworkTopology& topology, const BusInjection& injections);

/// Largest |I_load - conj(S / (V_ph - V_n))| over loaded bus phases, amps.
double load_current_mismatch(const NetworkState& state, const NetworkTopology& topology,
                             const BusInjection& injections);

/// Complex power delivered by the source at bus 1, all phases.
Complex slack_power(const NetworkState& state, const NetworkTopology& topology);
/// Series losses sum_w Z_w |I_w|^2 over all lines and wires.
Complex line_losses(const NetworkState& state, const NetworkTopology& topology);
Complex total_demand(const BusInjection& injections);

/// Per-phase apparent-power base used to express currents in per unit.
inline constexpr double kBasePowerPerPhase = 10'000.0;
inline double base_current(const NetworkTopology& t) { return kBasePowerPerPhase / t.v_base(); }

/// Largest componentwise voltage difference between two states, per unit.
double max_voltage_difference_pu(const NetworkState& a, const NetworkState& b, const NetworkTopology& topology);

}  // namespace evgrid
