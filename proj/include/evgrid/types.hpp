#pragma once

#include <array>
#include <complex>
#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace evgrid {

using Complex = std::complex<double>;

/// 1-based bus number. Bus 1 is always the slack (head) bus.
struct BusId {
  int value = 1;

  constexpr std::size_t index() const { return static_cast<std::size_t>(value - 1); }
  static constexpr BusId from_index(std::size_t i) { return BusId{static_cast<int>(i) + 1}; }

  friend constexpr auto operator<=>(BusId, BusId) = default;
};

enum class Phase : int { a = 0, b = 1, c = 2 };

/// Conductor role on a four-wire line. The neutral is a wire, not a phase.
enum class Wire : int { a = 0, b = 1, c = 2, n = 3 };

inline constexpr std::array<Phase, 3> kPhases{Phase::a, Phase::b, Phase::c};
inline constexpr std::array<Wire, 4> kWires{Wire::a, Wire::b, Wire::c, Wire::n};

constexpr int idx(Phase p) { return static_cast<int>(p); }
constexpr int idx(Wire w) { return static_cast<int>(w); }
constexpr Wire wire_of(Phase p) { return static_cast<Wire>(idx(p)); }

char phase_char(Phase p);
char wire_char(Wire w);
Phase parse_phase(std::string_view s);

/// Quarter-hour slot of the modular study day; index 0 is 00:00.
class TimeSlot {
 public:
  static constexpr int kPerDay = 96;
  static constexpr double kHours = 0.25;

  constexpr TimeSlot() = default;
  constexpr explicit TimeSlot(int index) : index_(wrap(index)) {}

  constexpr int index() const { return index_; }
  constexpr TimeSlot operator+(int slots) const { return TimeSlot(index_ + slots); }
  constexpr TimeSlot operator-(int slots) const { return TimeSlot(index_ - slots); }

  /// Nearest slot to a clock time in hours; values past 24 wrap.
  static TimeSlot from_hours(double hours);
  /// Accepts "HH:MM"; "24:00" is the same slot as "00:00". Minutes must be a multiple of 15.
  static TimeSlot parse(std::string_view hhmm);
  std::string to_string() const;

  friend constexpr auto operator<=>(TimeSlot, TimeSlot) = default;

 private:
  static constexpr int wrap(int i) { return ((i % kPerDay) + kPerDay) % kPerDay; }
  int index_ = 0;
};

/// Forward distance from `from` to `to` on the modular day, in [0, 96).
constexpr int slots_between(TimeSlot from, TimeSlot to) {
  return ((to.index() - from.index()) % TimeSlot::kPerDay + TimeSlot::kPerDay) % TimeSlot::kPerDay;
}

/// Malformed input text; carries the 1-based row that failed.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, int row, const std::string& what);
  int row() const { return row_; }

 private:
  int row_;
};

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace evgrid
