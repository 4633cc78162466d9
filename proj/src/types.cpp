#include "evgrid/types.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

namespace evgrid {

char phase_char(Phase p) { return "abc"[idx(p)]; }
char wire_char(Wire w) { return "abcn"[idx(w)]; }

Phase parse_phase(std::string_view s) {
  if (s == "a" || s == "A") return Phase::a;
  if (s == "b" || s == "B") return Phase::b;
  if (s == "c" || s == "C") return Phase::c;
  throw std::invalid_argument(fmt::format("unknown phase '{}'", s));
}

TimeSlot TimeSlot::from_hours(double hours) {
  return TimeSlot(static_cast<int>(std::lround(hours * 4.0)));
}

TimeSlot TimeSlot::parse(std::string_view hhmm) {
  const auto colon = hhmm.find(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument(fmt::format("time '{}' is not HH:MM", hhmm));
  }
  int h = -1;
  int m = -1;
  const auto hs = hhmm.substr(0, colon);
  const auto ms = hhmm.substr(colon + 1);
  auto r1 = std::from_chars(hs.data(), hs.data() + hs.size(), h);
  auto r2 = std::from_chars(ms.data(), ms.data() + ms.size(), m);
  if (r1.ec != std::errc{} || r1.ptr != hs.data() + hs.size() || r2.ec != std::errc{} ||
      r2.ptr != ms.data() + ms.size() || h < 0 || h > 24 || m < 0 || m > 59 || (h == 24 && m != 0)) {
    throw std::invalid_argument(fmt::format("time '{}' is not HH:MM", hhmm));
  }
  if (m % 15 != 0) {
    throw std::invalid_argument(fmt::format("time '{}' is not on a 15-minute boundary", hhmm));
  }
  return TimeSlot(h * 4 + m / 15);
}

std::string TimeSlot::to_string() const {
  return fmt::format("{:02d}:{:02d}", index_ / 4, (index_ % 4) * 15);
}

ParseError::ParseError(const std::string& source, int row, const std::string& what)
    : std::runtime_error(fmt::format("{}:{}: {}", source, row, what)), row_(row) {}

}  // namespace evgrid
