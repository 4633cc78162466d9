#include "evgrid/load_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "text_io.hpp"

namespace evgrid {

namespace {

// Fraction of peak at clock hours, linear in between. The evening ramp runs
// straight from the end of the peak (21:00) to the start of the valley (02:00).
constexpr std::array<std::pair<double, double>, 10> kCurveKnots{{
    {0.0, 0.52},
    {2.0, 0.20},
    {5.0, 0.20},
    {7.0, 0.50},
    {9.0, 0.50},
    {12.0, 0.45},
    {16.0, 0.60},
    {18.0, 1.00},
    {21.0, 1.00},
    {24.0, 0.52},
}};

// Draws from a normal truncated to [lo, hi] by rejection. sd == 0 yields the clamped mean.
template <typename Rng>
double truncated_normal(Rng& rng, double mean, double sd, double lo, double hi) {
  if (sd <= 0.0) return std::clamp(mean, lo, hi);
  std::normal_distribution<double> nd(mean, sd);
  for (;;) {
    const double x = nd(rng);
    if (x >= lo && x <= hi) return x;
  }
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

}  // namespace

double BaseLoadCurve::peak() const { return *std::max_element(p_base.begin(), p_base.end()); }

BaseLoadCurve default_base_curve(double peak_w) {
  BaseLoadCurve c;
  for (int t = 0; t < TimeSlot::kPerDay; ++t) {
    const double h = t * TimeSlot::kHours;
    auto hi = std::upper_bound(kCurveKnots.begin(), kCurveKnots.end(), h,
                               [](double x, const auto& k) { return x < k.first; });
    auto lo = std::prev(hi);
    const double f = (h - lo->first) / (hi->first - lo->first);
    const double w = peak_w * (lo->second + f * (hi->second - lo->second));
    c.p_base[static_cast<std::size_t>(t)] = std::round(w * 1e6) / 1e6;  // keeps the shipped file free of float noise
  }
  return c;
}

BaseLoadCurve parse_base_curve(std::string_view text, const std::string& source) {
  BaseLoadCurve c;
  std::size_t n = 0;
  for (const auto& row : detail::tokenize(text, true)) {
    for (auto field : row.fields) {
      if (n == c.p_base.size()) throw ParseError(source, row.number, "more than 96 values");
      const double v = detail::parse_double(field, source, row.number, "power");
      if (v < 0.0) throw ParseError(source, row.number, "negative power");
      c.p_base[n++] = v;
    }
  }
  if (n != c.p_base.size()) throw ParseError(source, 0, fmt::format("expected 96 values, found {}", n));
  return c;
}

BaseLoadCurve load_base_curve(const std::filesystem::path& file) {
  return parse_base_curve(detail::read_file(file), file.string());
}

std::string serialize_base_curve(const BaseLoadCurve& curve) {
  std::string out = "# Household base load, watts per 15-minute slot starting 00:00.\n";
  for (int t = 0; t < TimeSlot::kPerDay; ++t) {
    out += fmt::format("{}{}", curve.p_base[static_cast<std::size_t>(t)], t % 4 == 3 ? "\n" : " ");
  }
  return out;
}

std::vector<Consumer> all_consumers(std::size_t bus_count) {
  std::vector<Consumer> out;
  for (std::size_t b = 0; b < bus_count; ++b) {
    for (Phase p : kPhases) out.push_back({BusId::from_index(b), p});
  }
  return out;
}

double PowerFactor::q_ratio() const {
  if (!(value > 0.0 && value <= 1.0)) throw std::invalid_argument(fmt::format("power factor {} outside (0, 1]", value));
  const double r = std::tan(std::acos(value));
  return leading ? -r : r;
}

std::vector<HouseholdLoad> sample_household_loads(const BaseLoadCurve& curve, const std::vector<Consumer>& consumers,
                                                  double sigma_fraction, PowerFactor pf, std::uint64_t seed) {
  if (sigma_fraction < 0.0) throw std::invalid_argument("sigma_fraction must be non-negative");
  const double q_ratio = pf.q_ratio();
  auto rng = make_rng(seed, 0);
  std::vector<HouseholdLoad> out;
  out.reserve(consumers.size());
  for (const auto& c : consumers) {
    HouseholdLoad h{c, {}, {}};
    for (std::size_t t = 0; t < h.p.size(); ++t) {
      const double mean = curve.p_base[t];
      h.p[t] = truncated_normal(rng, mean, sigma_fraction * mean, 0.0, HUGE_VAL);
      h.q[t] = h.p[t] * q_ratio;
    }
    out.push_back(h);
  }
  return out;
}

EvParameterSampler::EvParameterSampler(FleetDistribution dist, std::uint64_t seed)
    : dist_(dist), rng_(make_rng(seed, 1)) {}

double EvParameterSampler::truncated(const TruncatedNormal& d) { return truncated_normal(rng_, d.mean, d.sd, d.lo, d.hi); }

EvDraw EvParameterSampler::draw() {
  EvDraw d{};
  d.capacity_kwh = std::uniform_real_distribution<double>(dist_.capacity_kwh.lo, dist_.capacity_kwh.hi)(rng_);
  d.arrival_h = truncated(dist_.arrival_h);
  d.departure_h = truncated(dist_.departure_h);
  d.initial_soc = truncated(dist_.initial_soc);
  return d;
}

FleetSpec sample_fleet(const std::vector<Consumer>& consumers, double penetration, const FleetDistribution& dist,
                       double charge_power_w, std::uint64_t seed) {
  if (!(penetration >= 0.0 && penetration <= 1.0)) throw std::invalid_argument("penetration must lie in [0, 1]");
  if (!(charge_power_w > 0.0)) throw std::invalid_argument("charge power must be positive");

  FleetSpec fleet;
  fleet.charge_power_w = charge_power_w;
  const auto count = static_cast<std::size_t>(std::floor(penetration * static_cast<double>(consumers.size()) + 1e-9));

  // Partial Fisher-Yates: the first `count` entries are a uniform sample without replacement.
  auto rng = make_rng(seed, 2);
  std::vector<std::size_t> pick(consumers.size());
  std::iota(pick.begin(), pick.end(), 0);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> u(i, pick.size() - 1);
    std::swap(pick[i], pick[u(rng)]);
  }
  pick.resize(count);
  std::sort(pick.begin(), pick.end());

  EvParameterSampler sampler(dist, seed);
  for (auto i : pick) {
    const auto d = sampler.draw();
    EvSpec ev;
    ev.bus = consumers[i].bus;
    ev.phase = consumers[i].phase;
    ev.capacity_kwh = d.capacity_kwh;
    ev.arrival = TimeSlot::from_hours(d.arrival_h);
    ev.departure = TimeSlot::from_hours(d.departure_h);
    ev.initial_soc = d.initial_soc;
    fleet.vehicles.push_back(ev);
  }
  return fleet;
}

FleetSpec parse_fleet(std::string_view text, double charge_power_w, const std::string& source) {
  if (!(charge_power_w > 0.0)) throw std::invalid_argument("charge power must be positive");
  FleetSpec fleet;
  fleet.charge_power_w = charge_power_w;
  std::set<Consumer> seen;
  for (const auto& row : detail::tokenize(text)) {
    const auto& f = row.fields;
    if (f.size() != 5) throw ParseError(source, row.number, "expected 'BUS.PHASE CAPACITY ARRIVAL DEPARTURE SOC%'");
    const auto dot = f[0].find('.');
    if (dot == std::string_view::npos) throw ParseError(source, row.number, fmt::format("bad location '{}'", f[0]));

    EvSpec ev;
    try {
      ev.bus = BusId{detail::parse_int(f[0].substr(0, dot), source, row.number, "bus")};
      ev.phase = parse_phase(f[0].substr(dot + 1));
      ev.arrival = TimeSlot::parse(f[2]);
      ev.departure = TimeSlot::parse(f[3]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, row.number, e.what());
    }
    ev.capacity_kwh = detail::parse_double(f[1], source, row.number, "capacity");
    ev.initial_soc = detail::parse_double(f[4], source, row.number, "initial charge") / 100.0;

    if (ev.bus.value < 1) throw ParseError(source, row.number, "bus numbers start at 1");
    if (!(ev.capacity_kwh > 0.0)) throw ParseError(source, row.number, "capacity must be positive");
    if (ev.arrival == ev.departure) throw ParseError(source, row.number, "arrival equals departure");
    if (ev.initial_soc < 0.0 || ev.initial_soc > kTargetSoc) {
      throw ParseError(source, row.number, "initial charge outside [0, 95] %");
    }
    if (!seen.insert(ev.consumer()).second) {
      throw ParseError(source, row.number, fmt::format("duplicate vehicle at {}", f[0]));
    }
    if (ev.initial_soc < 0.25) {
      fleet.warnings.push_back(fmt::format("{}:{}: initial charge {} % below the 25 % distribution floor", source,
                                           row.number, f[4]));
    }
    fleet.vehicles.push_back(ev);
  }
  return fleet;
}

FleetSpec load_fleet(const std::filesystem::path& fleet_file, double charge_power_w) {
  return parse_fleet(detail::read_file(fleet_file), charge_power_w, fleet_file.string());
}

std::string serialize_fleet(const FleetSpec& fleet) {
  std::string out = "# BUS.PHASE  CAPACITY_KWH  ARRIVAL  DEPARTURE  INITIAL_SOC_PERCENT\n";
  for (const auto& ev : fleet.vehicles) {
    out += fmt::format("{}.{} {} {} {} {:.15g}\n", ev.bus.value, phase_char(ev.phase), ev.capacity_kwh,
                       ev.arrival.to_string(), ev.departure.to_string(), ev.initial_soc * 100.0);
  }
  return out;
}

int charge_duration_slots(const EvSpec& ev, double charge_power_w) {
  if (!(charge_power_w > 0.0)) throw std::invalid_argument("charge power must be positive");
  const double deficit_kwh = ev.capacity_kwh * std::max(0.0, kTargetSoc - ev.initial_soc);
  const double hours = deficit_kwh / (charge_power_w / 1000.0);
  // Tolerance absorbs representation error when the deficit is an exact slot multiple.
  return static_cast<int>(std::ceil(hours / TimeSlot::kHours - 1e-9));
}

}  // namespace evgrid
