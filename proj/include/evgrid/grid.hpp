#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "evgrid/types.hpp"

namespace evgrid {

/// One four-wire feeder section. The phase impedance applies to each of a, b, c.
struct LineSegment {
  BusId from;
  BusId to;
  Complex z_phase;
  Complex z_neutral;

  friend bool operator==(const LineSegment&, const LineSegment&) = default;
};

struct SlackCondition {
  std::array<Complex, 4> v;  // indexed by Wire

  Complex phase(Phase p) const { return v[idx(p)]; }
  Complex neutral() const { return v[idx(Wire::n)]; }
};

/// Immutable radial feeder rooted at bus 1.
///
/// Construction validates radiality: every bus except 1 has exactly one
/// parent line and is reachable from bus 1. Lines are stored in file order;
/// `sweep_order()` lists buses so that each parent precedes its children.
class NetworkTopology {
 public:
  NetworkTopology(std::vector<LineSegment> lines, double slack_voltage, double v_base,
                  double transformer_reactance = 0.0);

  std::size_t bus_count() const { return parent_line_.size(); }
  std::span<const LineSegment> lines() const { return lines_; }
  const LineSegment& line(std::size_t i) const { return lines_.at(i); }

  double slack_voltage() const { return slack_voltage_; }
  double v_base() const { return v_base_; }
  /// Recorded from the feeder file; not part of the solve (bus 1 voltage is fixed).
  double transformer_reactance() const { return transformer_reactance_; }

  SlackCondition slack() const;

  bool contains(BusId bus) const { return bus.value >= 1 && bus.index() < bus_count(); }
  /// Index into lines() of the line feeding `bus`, or -1 for the slack bus.
  int parent_line(BusId bus) const;
  std::vector<BusId> children(BusId bus) const;
  std::span<const std::size_t> child_lines(BusId bus) const;
  std::span<const BusId> sweep_order() const { return order_; }

  friend bool operator==(const NetworkTopology& a, const NetworkTopology& b) {
    return a.lines_ == b.lines_ && a.slack_voltage_ == b.slack_voltage_ && a.v_base_ == b.v_base_ &&
           a.transformer_reactance_ == b.transformer_reactance_;
  }

 private:
  void check_bus(BusId bus) const;

  std::vector<LineSegment> lines_;
  double slack_voltage_;
  double v_base_;
  double transformer_reactance_;
  std::vector<int> parent_line_;
  std::vector<std::vector<std::size_t>> child_lines_;
  std::vector<BusId> order_;
};

/// Parses the feeder description format (see docs/file-formats.md).
NetworkTopology parse_topology(std::string_view text, const std::string& source = "<feeder>");
NetworkTopology load_topology(const std::filesystem::path& feeder_file);
std::string serialize_topology(const NetworkTopology& topology);

std::vector<BusId> children(const NetworkTopology& topology, BusId bus);

/// Copy with every phase and neutral impedance multiplied by `factor`.
NetworkTopology scale_impedances(const NetworkTopology& topology, double factor);

}  // namespace evgrid
