#pragma once

// Shared fixtures: random radial networks and an equation-level check of a
// solved state that does not reuse any solver code.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "evgrid/power_flow.hpp"

namespace evgrid::test {

inline std::filesystem::path source_dir() { return EVGRID_SOURCE_DIR; }
inline std::filesystem::path shipped_feeder() { return source_dir() / "feeders" / "paper19.txt"; }
inline std::filesystem::path shipped_fleet() { return source_dir() / "data" / "fleet34.txt"; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Impedance bounds spanned by the shipped 19-bus table, ohms.
inline constexpr double kRMin = 0.0415, kRMax = 1.7340;
inline constexpr double kXMin = 0.0145, kXMax = 0.1729;

struct RandomCase {
  NetworkTopology topology;
  BusInjection injection;
};

/// Radial tree on `buses` nodes with shuffled labels (bus 1 stays the root),
/// independent phase and neutral impedances, and per-phase demand up to
/// `max_w` watts at lagging or leading power factors down to 0.8.
template <typename Rng>
RandomCase random_case(Rng& rng, int buses, double max_w = 5000.0) {
  std::uniform_real_distribution<double> r(kRMin, kRMax), x(kXMin, kXMax), u(0.0, 1.0);
  std::vector<int> label(static_cast<std::size_t>(buses));
  std::iota(label.begin(), label.end(), 1);
  std::shuffle(label.begin() + 1, label.end(), rng);

  std::vector<LineSegment> lines;
  for (int k = 1; k < buses; ++k) {
    const int parent = std::uniform_int_distribution<int>(0, k - 1)(rng);
    LineSegment l;
    l.from = BusId{label[static_cast<std::size_t>(parent)]};
    l.to = BusId{label[static_cast<std::size_t>(k)]};
    l.z_phase = {r(rng), x(rng)};
    l.z_neutral = {r(rng), x(rng)};
    lines.push_back(l);
  }
  std::shuffle(lines.begin(), lines.end(), rng);
  NetworkTopology topo(lines, 220.0, 220.0);

  BusInjection inj(topo.bus_count());
  for (std::size_t b = 1; b < topo.bus_count(); ++b) {
    for (Phase p : kPhases) {
      if (u(rng) < 0.2) continue;  // some phases unloaded
      const double pw = max_w * u(rng);
      const double pf = 0.8 + 0.2 * u(rng);
      const double q = pw * std::tan(std::acos(pf)) * (u(rng) < 0.8 ? 1.0 : -1.0);
      inj.at(BusId::from_index(b), p) = {pw, q};
    }
  }
  return {std::move(topo), std::move(inj)};
}

/// Worst violation, relative to base quantities, of the four-wire circuit
/// equations: slack phasors, Ohm's law on every wire of every line, current
/// balance at every bus and wire, and the constant-power load law.
struct EquationResidual {
  double slack_v = 0.0;   // volts
  double ohm_v = 0.0;     // volts
  double kcl_a = 0.0;     // amps
  double load_a = 0.0;    // amps
};

inline EquationResidual equation_residual(const NetworkState& s, const NetworkTopology& t, const BusInjection& inj) {
  EquationResidual r;
  const auto slack = t.slack();
  for (Wire w : kWires) r.slack_v = std::max(r.slack_v, std::abs(s.v[0][idx(w)] - slack.v[idx(w)]));

  std::vector<WireValues> out(t.bus_count(), WireValues{}), in(t.bus_count(), WireValues{});
  for (std::size_t li = 0; li < t.lines().size(); ++li) {
    const auto& l = t.line(li);
    for (Wire w : kWires) {
      const Complex z = w == Wire::n ? l.z_neutral : l.z_phase;
      const Complex i = s.i_line[li][idx(w)];
      const Complex drop = s.v[l.from.index()][idx(w)] - s.v[l.to.index()][idx(w)];
      r.ohm_v = std::max(r.ohm_v, std::abs(drop - z * i));
      out[l.from.index()][idx(w)] += i;
      in[l.to.index()][idx(w)] += i;
    }
  }
  for (std::size_t b = 1; b < t.bus_count(); ++b) {
    const BusId bus = BusId::from_index(b);
    Complex neutral_return{};
    for (Phase p : kPhases) {
      const Complex s_load = inj.at(bus, p);
      const Complex i_load = s_load == Complex{} ? Complex{} : std::conj(s_load / s.phase_to_neutral(bus, p));
      neutral_return += i_load;
      r.kcl_a = std::max(r.kcl_a, std::abs(in[b][idx(p)] - out[b][idx(p)] - i_load));
      r.load_a = std::max(r.load_a, std::abs(s.i_load[b][idx(p)] - i_load));
    }
    r.kcl_a = std::max(r.kcl_a, std::abs(in[b][idx(Wire::n)] - out[b][idx(Wire::n)] + neutral_return));
  }
  return r;
}

}  // namespace evgrid::test
