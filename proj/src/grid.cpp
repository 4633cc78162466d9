#include "evgrid/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "text_io.hpp"

namespace evgrid {

namespace {

std::string describe(const LineSegment& l) { return fmt::format("line {}->{}", l.from.value, l.to.value); }

}  // namespace

NetworkTopology::NetworkTopology(std::vector<LineSegment> lines, double slack_voltage, double v_base,
                                 double transformer_reactance)
    : lines_(std::move(lines)),
      slack_voltage_(slack_voltage),
      v_base_(v_base),
      transformer_reactance_(transformer_reactance) {
  if (!(slack_voltage_ > 0.0) || !std::isfinite(slack_voltage_)) {
    throw TopologyError(fmt::format("slack voltage must be positive, got {}", slack_voltage_));
  }
  if (!(v_base_ > 0.0) || !std::isfinite(v_base_)) {
    throw TopologyError(fmt::format("base voltage must be positive, got {}", v_base_));
  }

  int n = 1;
  for (const auto& l : lines_) {
    if (l.from.value < 1 || l.to.value < 1) {
      throw TopologyError(fmt::format("{}: bus numbers start at 1", describe(l)));
    }
    if (l.from == l.to) throw TopologyError(fmt::format("{}: self loop", describe(l)));
    for (Complex z : {l.z_phase, l.z_neutral}) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || z.real() < 0.0) {
        throw TopologyError(fmt::format("{}: impedance must be finite with non-negative resistance", describe(l)));
      }
      if (z == Complex{}) throw TopologyError(fmt::format("{}: zero impedance", describe(l)));
    }
    n = std::max({n, l.from.value, l.to.value});
  }

  std::set<std::pair<int, int>> seen;
  for (const auto& l : lines_) {
    if (!seen.emplace(l.from.value, l.to.value).second) {
      throw TopologyError(fmt::format("duplicate {}", describe(l)));
    }
  }

  parent_line_.assign(static_cast<std::size_t>(n), -1);
  child_lines_.assign(static_cast<std::size_t>(n), {});
  for (std::size_t i = 0; i < lines_.size(); ++i) {
    const auto& l = lines_[i];
    if (l.to.value == 1) {
      throw TopologyError(fmt::format("cycle: {} feeds the slack bus 1", describe(l)));
    }
    auto& parent = parent_line_[l.to.index()];
    if (parent >= 0) {
      throw TopologyError(fmt::format("cycle: bus {} is fed by both {} and {}", l.to.value,
                                      describe(lines_[static_cast<std::size_t>(parent)]), describe(l)));
    }
    parent = static_cast<int>(i);
    child_lines_[l.from.index()].push_back(i);
  }

  order_.reserve(parent_line_.size());
  order_.push_back(BusId{1});
  for (std::size_t head = 0; head < order_.size(); ++head) {
    for (auto li : child_lines_[order_[head].index()]) order_.push_back(lines_[li].to);
  }
  if (order_.size() != parent_line_.size()) {
    std::vector<bool> reached(parent_line_.size(), false);
    for (auto b : order_) reached[b.index()] = true;
    for (std::size_t i = 0; i < reached.size(); ++i) {
      if (reached[i]) continue;
      if (parent_line_[i] < 0) throw TopologyError(fmt::format("bus {} is disconnected", i + 1));
      throw TopologyError(fmt::format("cycle: bus {} is not reachable from bus 1", i + 1));
    }
  }
}

void NetworkTopology::check_bus(BusId bus) const {
  if (!contains(bus)) throw TopologyError(fmt::format("unknown bus {}", bus.value));
}

SlackCondition NetworkTopology::slack() const {
  using std::numbers::pi;
  SlackCondition s;
  s.v[idx(Wire::a)] = std::polar(slack_voltage_, 0.0);
  s.v[idx(Wire::b)] = std::polar(slack_voltage_, -2.0 * pi / 3.0);
  s.v[idx(Wire::c)] = std::polar(slack_voltage_, 2.0 * pi / 3.0);
  s.v[idx(Wire::n)] = Complex{};
  return s;
}

int NetworkTopology::parent_line(BusId bus) const {
  check_bus(bus);
  return parent_line_[bus.index()];
}

std::span<const std::size_t> NetworkTopology::child_lines(BusId bus) const {
  check_bus(bus);
  return child_lines_[bus.index()];
}

std::vector<BusId> NetworkTopology::children(BusId bus) const {
  std::vector<BusId> out;
  for (auto li : child_lines(bus)) out.push_back(lines_[li].to);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<BusId> children(const NetworkTopology& topology, BusId bus) { return topology.children(bus); }

NetworkTopology scale_impedances(const NetworkTopology& t, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw std::invalid_argument(fmt::format("impedance scale must be positive, got {}", factor));
  }
  std::vector<LineSegment> lines(t.lines().begin(), t.lines().end());
  for (auto& l : lines) {
    l.z_phase *= factor;
    l.z_neutral *= factor;
  }
  return NetworkTopology(std::move(lines), t.slack_voltage(), t.v_base(), t.transformer_reactance() * factor);
}

NetworkTopology parse_topology(std::string_view text, const std::string& source) {
  double slack = 220.0;
  double v_base = 220.0;
  double xfmr = 0.0;
  std::vector<LineSegment> lines;
  std::vector<int> line_rows;

  for (const auto& row : detail::tokenize(text)) {
    const auto& f = row.fields;
    auto num = [&](std::size_t i, std::string_view what) { return detail::parse_double(f[i], source, row.number, what); };
    if (f[0] == "slack_voltage" || f[0] == "v_base" || f[0] == "transformer_reactance") {
      if (f.size() != 2) throw ParseError(source, row.number, fmt::format("'{}' takes one value", f[0]));
      const double v = num(1, f[0]);
      (f[0] == "slack_voltage" ? slack : f[0] == "v_base" ? v_base : xfmr) = v;
    } else if (f[0] == "line") {
      if (f.size() != 5 && f.size() != 7) {
        throw ParseError(source, row.number, "expected 'line FROM TO R X [RN XN]'");
      }
      LineSegment l;
      l.from = BusId{detail::parse_int(f[1], source, row.number, "from bus")};
      l.to = BusId{detail::parse_int(f[2], source, row.number, "to bus")};
      l.z_phase = {num(3, "resistance"), num(4, "reactance")};
      l.z_neutral = f.size() == 7 ? Complex{num(5, "neutral resistance"), num(6, "neutral reactance")} : l.z_phase;
      lines.push_back(l);
      line_rows.push_back(row.number);
    } else {
      throw ParseError(source, row.number, fmt::format("unknown keyword '{}'", f[0]));
    }
  }
  if (lines.empty()) throw ParseError(source, 0, "no lines");
  try {
    return NetworkTopology(std::move(lines), slack, v_base, xfmr);
  } catch (const TopologyError& e) {
    throw TopologyError(fmt::format("{}: {}", source, e.what()));
  }
}

NetworkTopology load_topology(const std::filesystem::path& feeder_file) {
  return parse_topology(detail::read_file(feeder_file), feeder_file.string());
}

std::string serialize_topology(const NetworkTopology& t) {
  std::string out;
  out += fmt::format("slack_voltage {}\nv_base {}\ntransformer_reactance {}\n", t.slack_voltage(), t.v_base(),
                     t.transformer_reactance());
  for (const auto& l : t.lines()) {
    out += fmt::format("line {} {} {} {}", l.from.value, l.to.value, l.z_phase.real(), l.z_phase.imag());
    if (l.z_neutral != l.z_phase) out += fmt::format(" {} {}", l.z_neutral.real(), l.z_neutral.imag());
    out += '\n';
  }
  return out;
}

}  // namespace evgrid
