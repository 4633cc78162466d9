#include <doctest.h>

#include <random>

#include "evgrid/grid.hpp"
#include "support.hpp"

using namespace evgrid;
using evgrid::test::shipped_feeder;

namespace {

std::vector<int> numbers(const std::vector<BusId>& ids) {
  std::vector<int> out;
  for (auto b : ids) out.push_back(b.value);
  return out;
}

const LineSegment& find_line(const NetworkTopology& t, int from, int to) {
  for (const auto& l : t.lines()) {
    if (l.from.value == from && l.to.value == to) return l;
  }
  throw std::runtime_error("no such line");
}

}  // namespace

TEST_CASE("shipped feeder has 19 buses and 18 lines") {
  const auto t = load_topology(shipped_feeder());
  CHECK(t.bus_count() == 19);
  CHECK(t.lines().size() == 18);
  CHECK(t.slack_voltage() == 220.0);
  CHECK(t.v_base() == 220.0);
  CHECK(t.transformer_reactance() == 0.0654);
}

TEST_CASE("shipped feeder impedances") {
  const auto t = load_topology(shipped_feeder());
  const auto& head = find_line(t, 1, 2);
  CHECK(head.z_phase == Complex(0.0415, 0.0145));
  CHECK(head.z_neutral == head.z_phase);

  const auto& spur = find_line(t, 7, 10);
  CHECK(spur.z_phase == Complex(1.7340, 0.1729));
  for (const auto& l : t.lines()) CHECK(std::abs(l.z_phase) <= std::abs(spur.z_phase));
}

TEST_CASE("resistance column guards against transcription drift") {
  const auto t = load_topology(shipped_feeder());
  double r = 0.0, x = 0.0;
  for (const auto& l : t.lines()) {
    r += l.z_phase.real();
    x += l.z_phase.imag();
  }
  // Column sums of the printed table, added by hand.
  CHECK(r == doctest::Approx(5.8941).epsilon(1e-12));
  CHECK(x == doctest::Approx(0.7381).epsilon(1e-12));
}

TEST_CASE("children") {
  const auto t = load_topology(shipped_feeder());
  CHECK(numbers(children(t, BusId{7})) == std::vector<int>{8, 9, 10});
  CHECK(children(t, BusId{10}).empty());
  CHECK(numbers(children(t, BusId{1})) == std::vector<int>{2, 16, 19});
  CHECK_THROWS_AS(children(t, BusId{20}), TopologyError);
  CHECK_THROWS_AS(children(t, BusId{0}), TopologyError);
}

TEST_CASE("every non-slack bus has exactly one path to bus 1") {
  const auto t = load_topology(shipped_feeder());
  CHECK(t.parent_line(BusId{1}) == -1);
  for (std::size_t b = 1; b < t.bus_count(); ++b) {
    BusId at = BusId::from_index(b);
    int hops = 0;
    while (at.value != 1) {
      const int li = t.parent_line(at);
      REQUIRE(li >= 0);
      at = t.line(static_cast<std::size_t>(li)).from;
      REQUIRE(++hops < 19);
    }
  }
  // Sweep order lists each parent before its children.
  std::vector<int> pos(t.bus_count());
  const auto order = t.sweep_order();
  REQUIRE(order.size() == t.bus_count());
  for (std::size_t k = 0; k < order.size(); ++k) pos[order[k].index()] = static_cast<int>(k);
  for (const auto& l : t.lines()) CHECK(pos[l.from.index()] < pos[l.to.index()]);
}

TEST_CASE("topology errors") {
  SUBCASE("two-bus cycle") {
    CHECK_THROWS_WITH_AS(parse_topology("line 1 2 0.1 0.01\nline 2 1 0.1 0.01\n"), doctest::Contains("cycle"),
                         TopologyError);
  }
  SUBCASE("cycle away from the root") {
    CHECK_THROWS_WITH_AS(parse_topology("line 1 2 .1 0\nline 2 3 .1 0\nline 3 4 .1 0\nline 4 2 .1 0\n"),
                         doctest::Contains("cycle"), TopologyError);
  }
  SUBCASE("isolated loop") {
    CHECK_THROWS_WITH_AS(parse_topology("line 1 2 .1 0\nline 3 4 .1 0\nline 4 3 .1 0\n"),
                         doctest::Contains("cycle"), TopologyError);
  }
  SUBCASE("disconnected bus") {
    CHECK_THROWS_WITH_AS(parse_topology("line 1 2 .1 0\nline 3 4 .1 0\n"), doctest::Contains("bus 3"),
                         TopologyError);
  }
  SUBCASE("gap in numbering") {
    CHECK_THROWS_WITH_AS(parse_topology("line 1 3 .1 0\n"), doctest::Contains("bus 2 is disconnected"),
                         TopologyError);
  }
  SUBCASE("duplicate line") {
    CHECK_THROWS_WITH_AS(parse_topology("line 1 2 .1 0\nline 1 2 .2 0\n"), doctest::Contains("duplicate"),
                         TopologyError);
  }
  SUBCASE("negative resistance") {
    CHECK_THROWS_AS(parse_topology("line 1 2 -0.1 0\n"), TopologyError);
    CHECK_THROWS_AS(parse_topology("line 1 2 0.1 0 -0.1 0\n"), TopologyError);
  }
  SUBCASE("non-positive voltages") {
    CHECK_THROWS_AS(parse_topology("slack_voltage 0\nline 1 2 .1 0\n"), TopologyError);
    CHECK_THROWS_AS(parse_topology("v_base -5\nline 1 2 .1 0\n"), TopologyError);
  }
}

TEST_CASE("parse errors carry the row") {
  auto row_of = [](std::string_view text) {
    try {
      parse_topology(text, "f");
    } catch (const ParseError& e) {
      return e.row();
    }
    return -1;
  };
  CHECK(row_of("# header\nline 1 2 0.1\n") == 2);
  CHECK(row_of("line 1 2 0.1 0.01\n\nline 2 3 abc 0.01\n") == 3);
  CHECK(row_of("line 1 2 0.1 0.01\nbranch 2 3 0.1 0.1\n") == 2);
  CHECK(row_of("slack_voltage\nline 1 2 0.1 0.01\n") == 1);
  CHECK(row_of("line 1 x 0.1 0.01\n") == 1);
  CHECK(row_of("# nothing\n") == 0);
  CHECK_THROWS_WITH_AS(parse_topology("line 1 2 0.1 zz\n", "feeder.txt"), doctest::Contains("feeder.txt:1"),
                       ParseError);
}

TEST_CASE("per-line neutral override") {
  const auto t = parse_topology("line 1 2 0.1 0.02 0.3 0.04\nline 2 3 0.2 0.01\n");
  CHECK(t.line(0).z_neutral == Complex(0.3, 0.04));
  CHECK(t.line(1).z_neutral == t.line(1).z_phase);
}

TEST_CASE("serialize round trip") {
  const auto t = load_topology(shipped_feeder());
  const auto again = parse_topology(serialize_topology(t));
  CHECK(again == t);

  // Random trees with distinct neutral impedances survive as well.
  std::mt19937_64 rng(7);
  for (int k = 0; k < 50; ++k) {
    auto c = test::random_case(rng, 2 + k % 8);
    CHECK(parse_topology(serialize_topology(c.topology)) == c.topology);
  }
}

TEST_CASE("scale_impedances") {
  const auto t = load_topology(shipped_feeder());
  const auto s = scale_impedances(t, 0.5);
  for (std::size_t i = 0; i < t.lines().size(); ++i) {
    CHECK(s.line(i).z_phase == t.line(i).z_phase * 0.5);
    CHECK(s.line(i).z_neutral == t.line(i).z_neutral * 0.5);
  }
  CHECK(numbers(s.children(BusId{7})) == std::vector<int>{8, 9, 10});
  CHECK_THROWS_AS(scale_impedances(t, 0.0), std::invalid_argument);
}

TEST_CASE("slack phasors") {
  const auto s = load_topology(shipped_feeder()).slack();
  for (Phase p : kPhases) CHECK(std::abs(s.phase(p)) == doctest::Approx(220.0));
  CHECK(std::arg(s.phase(Phase::a)) == doctest::Approx(0.0));
  CHECK(std::arg(s.phase(Phase::b)) * 180.0 / M_PI == doctest::Approx(-120.0));
  CHECK(std::arg(s.phase(Phase::c)) * 180.0 / M_PI == doctest::Approx(120.0));
  CHECK(s.neutral() == Complex{});
}

TEST_CASE("time slots") {
  CHECK(TimeSlot::parse("00:00").index() == 0);
  CHECK(TimeSlot::parse("24:00").index() == 0);
  CHECK(TimeSlot::parse("17:00").index() == 68);
  CHECK(TimeSlot::parse("05:30").to_string() == "05:30");
  CHECK_THROWS_AS(TimeSlot::parse("17:10"), std::invalid_argument);
  CHECK_THROWS_AS(TimeSlot::parse("25:00"), std::invalid_argument);
  CHECK_THROWS_AS(TimeSlot::parse("5pm"), std::invalid_argument);
  CHECK(TimeSlot::from_hours(25.0).to_string() == "01:00");
  CHECK((TimeSlot(95) + 2).index() == 1);
  CHECK((TimeSlot(1) - 2).index() == 95);
  CHECK(slots_between(TimeSlot::parse("23:00"), TimeSlot::parse("01:00")) == 8);
  CHECK(slots_between(TimeSlot(5), TimeSlot(5)) == 0);
}
