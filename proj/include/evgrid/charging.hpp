#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "evgrid/load_model.hpp"

namespace evgrid {

/// Fixed-rate charging interval [start, start + duration) on the modular day.
struct ChargeWindow {
  std::size_t vehicle = 0;  // index into FleetSpec::vehicles
  TimeSlot start;
  int duration = 0;

  TimeSlot end() const { return start + duration; }
  bool covers(TimeSlot t) const { return slots_between(start, t) < duration; }
};

struct ChargeSchedule {
  std::vector<ChargeWindow> windows;  // one per vehicle, same order as the fleet
  double power_w = 0.0;
  std::vector<std::string> warnings;
};

/// Bus-to-zone assignment with one charging start time per zone.
struct ZonePlan {
  std::map<int, int> zone_of_bus;  // bus number -> zone
  std::map<int, TimeSlot> start_of_zone;

  TimeSlot start_for(BusId bus) const;
};

ZonePlan load_zone_plan(const std::filesystem::path& file);
ZonePlan parse_zone_plan(std::string_view text, const std::string& source = "<zones>");
/// Three zones starting 23:30, 24:00 and 01:00 over the 19-bus feeder.
ZonePlan default_zone_plan();

/// Vehicles whose window cannot fit in one day.
class InfeasibleSchedule : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ChargeSchedule schedule_uncontrolled(const FleetSpec& fleet);
ChargeSchedule schedule_timer(const FleetSpec& fleet, TimeSlot start = TimeSlot(0));
ChargeSchedule schedule_zoned(const FleetSpec& fleet, const ZonePlan& plan);
/// Programmable-key rule: each window ends exactly at the vehicle's departure.
ChargeSchedule schedule_semi_smart(const FleetSpec& fleet);

/// EV active power per consumer slot, watts; EVs draw no reactive power.
struct EvPowerFrame {
  std::vector<Consumer> consumers;
  std::vector<std::array<double, TimeSlot::kPerDay>> p;

  double at(Consumer c, TimeSlot t) const;
  double total_energy_kwh() const;
};

EvPowerFrame ev_power_frame(const ChargeSchedule& schedule, const FleetSpec& fleet);

}  // namespace evgrid
