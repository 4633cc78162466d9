#include "evgrid/charging.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "text_io.hpp"

namespace evgrid {

namespace {

std::string label(const EvSpec& ev) { return fmt::format("{}.{}", ev.bus.value, phase_char(ev.phase)); }

template <typename StartFn>
ChargeSchedule build(const FleetSpec& fleet, StartFn&& start_of) {
  ChargeSchedule s;
  s.power_w = fleet.charge_power_w;
  std::vector<std::string> too_long;
  for (std::size_t i = 0; i < fleet.vehicles.size(); ++i) {
    const auto& ev = fleet.vehicles[i];
    const int duration = charge_duration_slots(ev, fleet.charge_power_w);
    if (duration > TimeSlot::kPerDay) {
      too_long.push_back(fmt::format("{} needs {} slots", label(ev), duration));
      continue;
    }
    s.windows.push_back({i, start_of(ev, duration), duration});
  }
  if (!too_long.empty()) {
    std::string msg = "charging does not fit in one day:";
    for (const auto& m : too_long) msg += " " + m + ";";
    throw InfeasibleSchedule(msg);
  }
  return s;
}

}  // namespace

TimeSlot ZonePlan::start_for(BusId bus) const {
  auto z = zone_of_bus.find(bus.value);
  if (z == zone_of_bus.end()) throw ConfigError(fmt::format("bus {} has no charging zone", bus.value));
  auto s = start_of_zone.find(z->second);
  if (s == start_of_zone.end()) throw ConfigError(fmt::format("zone {} has no start time", z->second));
  return s->second;
}

ZonePlan parse_zone_plan(std::string_view text, const std::string& source) {
  ZonePlan plan;
  for (const auto& row : detail::tokenize(text, true)) {
    const auto& f = row.fields;
    if (f.size() < 3) throw ParseError(source, row.number, "expected 'ZONE START BUS[,BUS...]'");
    const int zone = detail::parse_int(f[0], source, row.number, "zone");
    if (plan.start_of_zone.count(zone)) throw ParseError(source, row.number, fmt::format("zone {} listed twice", zone));
    try {
      plan.start_of_zone[zone] = TimeSlot::parse(f[1]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, row.number, e.what());
    }
    for (std::size_t i = 2; i < f.size(); ++i) {
      const int bus = detail::parse_int(f[i], source, row.number, "bus");
      if (!plan.zone_of_bus.emplace(bus, zone).second) {
        throw ParseError(source, row.number, fmt::format("bus {} assigned to two zones", bus));
      }
    }
  }
  return plan;
}

ZonePlan load_zone_plan(const std::filesystem::path& file) {
  return parse_zone_plan(detail::read_file(file), file.string());
}

ZonePlan default_zone_plan() {
  return parse_zone_plan(
      "1 23:30 1,2,15,16,17,18,19\n"
      "2 24:00 3,4,5,6,13,14\n"
      "3 01:00 7,8,9,10,11,12\n",
      "<default zones>");
}

ChargeSchedule schedule_uncontrolled(const FleetSpec& fleet) {
  return build(fleet, [](const EvSpec& ev, int) { return ev.arrival; });
}

ChargeSchedule schedule_timer(const FleetSpec& fleet, TimeSlot start) {
  return build(fleet, [start](const EvSpec&, int) { return start; });
}

ChargeSchedule schedule_zoned(const FleetSpec& fleet, const ZonePlan& plan) {
  return build(fleet, [&plan](const EvSpec& ev, int) { return plan.start_for(ev.bus); });
}

ChargeSchedule schedule_semi_smart(const FleetSpec& fleet) {
  auto s = build(fleet, [](const EvSpec& ev, int duration) { return ev.departure - duration; });
  for (const auto& w : s.windows) {
    const auto& ev = fleet.vehicles[w.vehicle];
    // The window is kept as computed even when the car is not yet plugged in.
    if (w.duration > slots_between(ev.arrival, ev.departure)) {
      s.warnings.push_back(fmt::format("{}: charging would start at {}, before arrival at {}", label(ev),
                                       w.start.to_string(), ev.arrival.to_string()));
    }
  }
  return s;
}

double EvPowerFrame::at(Consumer c, TimeSlot t) const {
  auto it = std::lower_bound(consumers.begin(), consumers.end(), c);
  if (it == consumers.end() || *it != c) return 0.0;
  return p[static_cast<std::size_t>(it - consumers.begin())][static_cast<std::size_t>(t.index())];
}

double EvPowerFrame::total_energy_kwh() const {
  double e = 0.0;
  for (const auto& row : p) {
    for (double w : row) e += w * TimeSlot::kHours / 1000.0;
  }
  return e;
}

EvPowerFrame ev_power_frame(const ChargeSchedule& schedule, const FleetSpec& fleet) {
  EvPowerFrame f;
  for (const auto& ev : fleet.vehicles) f.consumers.push_back(ev.consumer());
  std::sort(f.consumers.begin(), f.consumers.end());
  f.consumers.erase(std::unique(f.consumers.begin(), f.consumers.end()), f.consumers.end());
  f.p.assign(f.consumers.size(), {});
  for (const auto& w : schedule.windows) {
    const auto c = fleet.vehicles.at(w.vehicle).consumer();
    const auto row = static_cast<std::size_t>(std::lower_bound(f.consumers.begin(), f.consumers.end(), c) -
                                              f.consumers.begin());
    for (int k = 0; k < w.duration; ++k) {
      f.p[row][static_cast<std::size_t>((w.start + k).index())] += schedule.power_w;
    }
  }
  return f;
}

}  // namespace evgrid
