#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "evgrid/types.hpp"

namespace evgrid {

/// Mean household active power per time slot, watts.
struct BaseLoadCurve {
  std::array<double, TimeSlot::kPerDay> p_base{};

  double peak() const;
};

/// Default residential shape: overnight valley, morning shoulder, 18:00-21:00
/// evening peak, linearly interpolated and scaled so the maximum is `peak_w`.
BaseLoadCurve default_base_curve(double peak_w = 2000.0);
/// 96 non-negative values, whitespace separated, '#' comments allowed.
BaseLoadCurve load_base_curve(const std::filesystem::path& file);
BaseLoadCurve parse_base_curve(std::string_view text, const std::string& source = "<curve>");
std::string serialize_base_curve(const BaseLoadCurve& curve);

struct Consumer {
  BusId bus;
  Phase phase;

  friend auto operator<=>(const Consumer&, const Consumer&) = default;
};

/// One single-phase household per (bus, phase), in bus-major order.
std::vector<Consumer> all_consumers(std::size_t bus_count);

struct HouseholdLoad {
  Consumer consumer;
  std::array<double, TimeSlot::kPerDay> p{};  // W
  std::array<double, TimeSlot::kPerDay> q{};  // var
};

struct PowerFactor {
  double value = 0.91;
  bool leading = false;  // leading draws negative Q

  double q_ratio() const;
};

std::vector<HouseholdLoad> sample_household_loads(const BaseLoadCurve& curve, const std::vector<Consumer>& consumers,
                                                  double sigma_fraction, PowerFactor pf, std::uint64_t seed);

struct EvSpec {
  BusId bus;
  Phase phase = Phase::a;
  double capacity_kwh = 0.0;
  TimeSlot arrival;
  TimeSlot departure;
  double initial_soc = 0.0;  // fraction

  Consumer consumer() const { return {bus, phase}; }
};

struct FleetSpec {
  std::vector<EvSpec> vehicles;
  double charge_power_w = 3500.0;
  std::vector<std::string> warnings;
};

/// Bounded distribution of one EV parameter.
struct TruncatedNormal {
  double mean;
  double sd;
  double lo;
  double hi;
};

struct UniformRange {
  double lo;
  double hi;
};

/// Distribution parameters for sampled fleets. Clock times are hours; an
/// upper bound past 24 means the interval wraps past midnight.
struct FleetDistribution {
  UniformRange capacity_kwh{6.0, 30.0};
  TruncatedNormal arrival_h{19.0, 2.0, 16.0, 25.0};
  TruncatedNormal departure_h{7.0, 2.0, 5.0, 12.0};
  TruncatedNormal initial_soc{0.75, 0.25, 0.25, 0.95};
};

/// Raw continuous draw of one vehicle's parameters before slot rounding.
struct EvDraw {
  double capacity_kwh;
  double arrival_h;  // in [arrival.lo, arrival.hi], not wrapped
  double departure_h;
  double initial_soc;
};

/// Stateful sampler; a given seed always produces the same sequence.
class EvParameterSampler {
 public:
  EvParameterSampler(FleetDistribution dist, std::uint64_t seed);
  EvDraw draw();

 private:
  double truncated(const TruncatedNormal& d);

  FleetDistribution dist_;
  std::mt19937_64 rng_;
};

FleetSpec sample_fleet(const std::vector<Consumer>& consumers, double penetration, const FleetDistribution& dist,
                       double charge_power_w, std::uint64_t seed);

FleetSpec load_fleet(const std::filesystem::path& fleet_file, double charge_power_w = 3500.0);
FleetSpec parse_fleet(std::string_view text, double charge_power_w = 3500.0, const std::string& source = "<fleet>");
std::string serialize_fleet(const FleetSpec& fleet);

/// Quarter-hour slots at a fixed charger power needed to bring the battery to 95 %.
int charge_duration_slots(const EvSpec& ev, double charge_power_w);

inline constexpr double kTargetSoc = 0.95;

}  // namespace evgrid
