#include <doctest.h>

#include <random>
#include <set>

#include "evgrid/load_model.hpp"
#include "support.hpp"

using namespace evgrid;
using evgrid::test::shipped_fleet;

namespace {

const EvSpec& vehicle(const FleetSpec& f, int bus, Phase p) {
  for (const auto& ev : f.vehicles) {
    if (ev.bus.value == bus && ev.phase == p) return ev;
  }
  throw std::runtime_error("no vehicle");
}

double curve_at(const BaseLoadCurve& c, const char* hhmm) {
  return c.p_base[static_cast<std::size_t>(TimeSlot::parse(hhmm).index())];
}

}  // namespace

TEST_CASE("default base curve shape") {
  const auto c = default_base_curve();
  CHECK(c.peak() == doctest::Approx(2000.0));
  for (const char* t : {"18:00", "19:30", "21:00"}) CHECK(curve_at(c, t) == doctest::Approx(2000.0));
  for (const char* t : {"02:00", "03:30", "05:00"}) CHECK(curve_at(c, t) == doctest::Approx(400.0));
  for (const char* t : {"07:00", "08:00", "09:00"}) CHECK(curve_at(c, t) == doctest::Approx(1000.0));
  // Straight decline from the end of the peak into the valley.
  CHECK(curve_at(c, "23:30") == doctest::Approx(1200.0));
  CHECK(curve_at(c, "00:00") == doctest::Approx(1040.0));
  for (double p : c.p_base) {
    CHECK(p >= 400.0 - 1e-9);
    CHECK(p <= 2000.0 + 1e-9);
  }
  CHECK(default_base_curve(3000.0).peak() == doctest::Approx(3000.0));
}

TEST_CASE("shipped curve file equals the built-in curve") {
  const auto shipped = load_base_curve(test::source_dir() / "data" / "base_curve.txt");
  CHECK(shipped.p_base == default_base_curve().p_base);
}

TEST_CASE("base curve parsing") {
  const auto c = default_base_curve();
  CHECK(parse_base_curve(serialize_base_curve(c)).p_base == c.p_base);
  CHECK_THROWS_AS(parse_base_curve("1 2 3"), ParseError);
  std::string too_many;
  for (int i = 0; i < 97; ++i) too_many += "1 ";
  CHECK_THROWS_AS(parse_base_curve(too_many), ParseError);
  std::string negative = "-1";
  for (int i = 1; i < 96; ++i) negative += " 1";
  CHECK_THROWS_AS(parse_base_curve(negative), ParseError);
}

TEST_CASE("power factor") {
  CHECK(PowerFactor{}.q_ratio() * 1000.0 == doctest::Approx(455.6).epsilon(1e-4));
  CHECK(PowerFactor{0.91, true}.q_ratio() == doctest::Approx(-PowerFactor{}.q_ratio()));
  CHECK(PowerFactor{1.0}.q_ratio() == 0.0);
  CHECK_THROWS_AS(PowerFactor{0.0}.q_ratio(), std::invalid_argument);
  CHECK_THROWS_AS(PowerFactor{1.2}.q_ratio(), std::invalid_argument);
}

TEST_CASE("household sampling") {
  const auto curve = default_base_curve();
  const auto consumers = all_consumers(19);
  REQUIRE(consumers.size() == 57);

  SUBCASE("zero spread returns the curve") {
    for (const auto& h : sample_household_loads(curve, consumers, 0.0, {}, 3)) {
      CHECK(h.p == curve.p_base);
      for (std::size_t t = 0; t < h.p.size(); ++t) CHECK(h.q[t] == doctest::Approx(h.p[t] * std::sqrt(1.0 - 0.91 * 0.91) / 0.91).epsilon(1e-12));
    }
  }
  SUBCASE("seeded determinism") {
    const auto a = sample_household_loads(curve, consumers, 0.2, {}, 42);
    const auto b = sample_household_loads(curve, consumers, 0.2, {}, 42);
    const auto c = sample_household_loads(curve, consumers, 0.2, {}, 43);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].p == b[i].p);
      CHECK(a[i].q == b[i].q);
    }
    CHECK(a[0].p != c[0].p);
  }
  SUBCASE("non-negative with a heavy spread") {
    for (const auto& h : sample_household_loads(curve, consumers, 1.5, {}, 9)) {
      for (double p : h.p) CHECK(p >= 0.0);
    }
  }
  SUBCASE("peak-slot mean") {
    // 10,000 draws at the 2 kW peak: mean within three standard errors.
    const std::vector<Consumer> many(10000, Consumer{BusId{2}, Phase::a});
    const auto slot = static_cast<std::size_t>(TimeSlot::parse("19:00").index());
    double sum = 0.0;
    for (const auto& h : sample_household_loads(curve, many, 0.2, {}, 5)) sum += h.p[slot];
    CHECK(std::abs(sum / 10000.0 - 2000.0) < 3.0 * 400.0 / std::sqrt(10000.0));
  }
  CHECK_THROWS_AS(sample_household_loads(curve, consumers, -0.1, {}, 1), std::invalid_argument);
}

TEST_CASE("fleet sampling") {
  const auto consumers = all_consumers(19);
  const FleetDistribution dist;
  CHECK(sample_fleet(consumers, 0.6, dist, 3500.0, 1).vehicles.size() == 34);
  CHECK(sample_fleet(consumers, 0.0, dist, 3500.0, 1).vehicles.empty());
  CHECK(sample_fleet(consumers, 1.0, dist, 3500.0, 1).vehicles.size() == 57);
  CHECK_THROWS_AS(sample_fleet(consumers, 1.1, dist, 3500.0, 1), std::invalid_argument);

  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto f = sample_fleet(consumers, 0.6, dist, 3500.0, seed);
    REQUIRE(f.vehicles.size() == 34);
    std::set<Consumer> seen;
    for (const auto& ev : f.vehicles) {
      CHECK(seen.insert(ev.consumer()).second);
      CHECK(ev.capacity_kwh >= 6.0);
      CHECK(ev.capacity_kwh <= 30.0);
      CHECK(ev.initial_soc >= 0.25);
      CHECK(ev.initial_soc <= 0.95);
      // Arrival window 16:00 to 01:00 wraps midnight; departure 05:00 to 12:00.
      CHECK(slots_between(TimeSlot::parse("16:00"), ev.arrival) <= 36);
      CHECK(ev.departure.index() >= TimeSlot::parse("05:00").index());
      CHECK(ev.departure.index() <= TimeSlot::parse("12:00").index());
      CHECK(ev.arrival != ev.departure);
    }
  }
  const auto a = sample_fleet(consumers, 0.6, dist, 3500.0, 77);
  const auto b = sample_fleet(consumers, 0.6, dist, 3500.0, 77);
  CHECK(serialize_fleet(a) == serialize_fleet(b));
}

TEST_CASE("capacity mean over 100,000 draws") {
  EvParameterSampler s(FleetDistribution{}, 123);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) sum += s.draw().capacity_kwh;
  CHECK(std::abs(sum / 100000.0 - 18.0) < 3.0 * 6.93 / std::sqrt(100000.0));
}

TEST_CASE("shipped fleet file") {
  const auto f = load_fleet(shipped_fleet());
  CHECK(f.vehicles.size() == 34);
  const auto& first = f.vehicles.front();
  CHECK(first.bus.value == 1);
  CHECK(first.phase == Phase::a);
  CHECK(first.capacity_kwh == 26.0);
  CHECK(first.arrival.to_string() == "17:00");
  CHECK(first.departure.to_string() == "05:30");
  CHECK(first.initial_soc == doctest::Approx(0.65));

  CHECK(vehicle(f, 7, Phase::b).initial_soc == doctest::Approx(0.05));
  bool flagged = false;
  for (const auto& w : f.warnings) flagged = flagged || w.find("5 %") != std::string::npos;
  CHECK(flagged);
  CHECK(parse_fleet("").vehicles.empty());
}

TEST_CASE("fleet file errors") {
  CHECK_THROWS_AS(parse_fleet("1.a 26 17:00 05:30\n"), ParseError);
  CHECK_THROWS_AS(parse_fleet("1.d 26 17:00 05:30 65\n"), ParseError);
  CHECK_THROWS_AS(parse_fleet("1.a 26 17:10 05:30 65\n"), ParseError);
  CHECK_THROWS_AS(parse_fleet("1.a 26 17:00 05:30 96\n"), ParseError);
  CHECK_THROWS_AS(parse_fleet("1.a 26 17:00 17:00 65\n"), ParseError);
  CHECK_THROWS_AS(parse_fleet("1.a 0 17:00 05:30 65\n"), ParseError);
  try {
    parse_fleet("1.a 26 17:00 05:30 65\n# c\n1.a 10 18:00 06:00 50\n", 3500.0, "fleet");
    FAIL("duplicate accepted");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
  }
}

TEST_CASE("fleet serialize round trip") {
  const auto f = load_fleet(shipped_fleet());
  CHECK(serialize_fleet(parse_fleet(serialize_fleet(f))) == serialize_fleet(f));
  const auto s = sample_fleet(all_consumers(19), 0.6, FleetDistribution{}, 3500.0, 8);
  const auto back = parse_fleet(serialize_fleet(s));
  REQUIRE(back.vehicles.size() == s.vehicles.size());
  for (std::size_t i = 0; i < s.vehicles.size(); ++i) {
    CHECK(back.vehicles[i].capacity_kwh == s.vehicles[i].capacity_kwh);
    CHECK(back.vehicles[i].initial_soc == doctest::Approx(s.vehicles[i].initial_soc).epsilon(1e-14));
  }
}

TEST_CASE("charge duration") {
  const auto f = load_fleet(shipped_fleet());
  CHECK(charge_duration_slots(vehicle(f, 1, Phase::a), 3500.0) == 9);
  CHECK(charge_duration_slots(vehicle(f, 2, Phase::a), 3500.0) == 27);
  CHECK(charge_duration_slots(vehicle(f, 2, Phase::b), 3500.0) == 8);
  EvSpec full{BusId{3}, Phase::c, 20.0, TimeSlot(70), TimeSlot(20), 0.95};
  CHECK(charge_duration_slots(full, 3500.0) == 0);
  // Exactly one hour of charging stays at four slots.
  EvSpec exact{BusId{3}, Phase::c, 7.0, TimeSlot(70), TimeSlot(20), 0.45};
  CHECK(charge_duration_slots(exact, 3500.0) == 4);
  CHECK_THROWS_AS(charge_duration_slots(exact, 0.0), std::invalid_argument);
}

TEST_CASE("charge duration properties") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> cap(6.0, 30.0), soc(0.0, 0.95), pw(1000.0, 22000.0);
  for (int k = 0; k < 20000; ++k) {
    EvSpec ev{BusId{2}, Phase::a, cap(rng), TimeSlot(70), TimeSlot(20), soc(rng)};
    const double p = pw(rng);
    const int n = charge_duration_slots(ev, p);
    const double surplus = n * 0.25 * p / 1000.0 - ev.capacity_kwh * (0.95 - ev.initial_soc);
    CHECK(surplus >= -1e-9);
    CHECK(surplus < 0.25 * p / 1000.0);

    EvSpec fuller = ev;
    fuller.initial_soc = std::min(0.95, ev.initial_soc + 0.1);
    CHECK(charge_duration_slots(fuller, p) <= n);
    EvSpec bigger = ev;
    bigger.capacity_kwh += 2.0;
    CHECK(charge_duration_slots(bigger, p) >= n);
  }
}
