#include "evgrid/scenario.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

namespace evgrid {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string num(double v) { return fmt::format("{:.9g}", v); }

Spread spread_of(const std::vector<double>& xs) {
  Spread s;
  if (xs.empty()) return s;
  s.min = s.max = xs.front();
  for (double x : xs) {
    s.mean += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

json to_json(const Spread& s) { return {{"mean", s.mean}, {"stddev", s.stddev}, {"min", s.min}, {"max", s.max}}; }

json to_json(const VoltageExtreme& e) {
  return {{"pu", e.pu}, {"bus", e.bus.value}, {"slot", e.slot.index()}, {"time", e.slot.to_string()}};
}

json to_json(const ScenarioReport& r) {
  json per_phase = json::object();
  json at_worst = json::object();
  for (Phase p : kPhases) {
    per_phase[std::string(1, phase_char(p))] = to_json(r.voltages.per_phase[idx(p)]);
    at_worst[std::string(1, phase_char(p))] = to_json(r.voltages.at_worst_bus[idx(p)]);
  }
  return {{"total_loss_kwh", r.total_loss_kwh},
          {"min_voltage_pu", to_json(r.voltages.overall)},
          {"min_voltage_per_phase_independent", per_phase},
          {"min_voltage_per_phase_at_worst_bus", at_worst},
          {"max_neutral_voltage_pu", to_json(r.max_neutral)}};
}

json config_json(const ScenarioConfig& c) {
  json j;
  j["feeder"] = c.feeder.string();
  j["impedance_scale"] = c.impedance_scale;
  j["base_curve"] = c.base_curve ? json(c.base_curve->string()) : json("built-in");
  j["peak_w"] = c.peak_w;
  j["sigma_fraction"] = c.sigma_fraction;
  j["power_factor"] = {{"value", c.power_factor.value}, {"leading", c.power_factor.leading}};
  if (c.fleet_file) {
    j["fleet"] = {{"file", c.fleet_file->string()}};
  } else {
    const auto& d = c.fleet_distribution;
    auto tn = [](const TruncatedNormal& t) {
      return json{{"mean", t.mean}, {"sd", t.sd}, {"min", t.lo}, {"max", t.hi}};
    };
    j["fleet"] = {{"penetration", c.penetration},
                  {"capacity_kwh", {{"min", d.capacity_kwh.lo}, {"max", d.capacity_kwh.hi}}},
                  {"arrival_h", tn(d.arrival_h)},
                  {"departure_h", tn(d.departure_h)},
                  {"initial_soc", tn(d.initial_soc)}};
  }
  j["charge_power_w"] = c.charge_power_w;
  j["strategy"] = to_string(c.strategy);
  j["timer_start"] = c.timer_start.to_string();
  j["zones"] = c.zones ? json(c.zones->string()) : json("built-in");
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  j["tolerance_v"] = c.tolerance ? json(*c.tolerance) : json("1e-6 * v_base");
  j["max_iterations"] = c.max_iterations;
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw std::runtime_error(fmt::format("write failed for '{}'", path.string()));
}

std::string iso_time(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                     tm.tm_hour, tm.tm_min, tm.tm_sec);
}

void write_outputs(const ScenarioConfig& config, const NetworkTopology& topology, const ScenarioResult& result,
                   std::chrono::system_clock::time_point started) {
  const fs::path dir = config.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));

  std::string volts = "trial,bus,wire,slot,v_pu\n";
  std::string amps = "trial,from,to,wire,slot,i_a\n";
  std::string losses = "trial,slot,loss_kw\n";
  json trials = json::array();
  for (std::size_t k = 0; k < result.trials.size(); ++k) {
    const auto& tr = result.trials[k];
    for (std::size_t b = 0; b < topology.bus_count(); ++b) {
      for (Wire w : kWires) {
        for (std::size_t s = 0; s < tr.report.profiles.size(); ++s) {
          volts += fmt::format("{},{},{},{},{}\n", k, b + 1, wire_char(w), s, num(tr.report.profiles[s][b][idx(w)]));
        }
      }
    }
    for (std::size_t li = 0; li < topology.lines().size(); ++li) {
      const auto& l = topology.line(li);
      for (Wire w : kWires) {
        for (std::size_t s = 0; s < tr.states.size(); ++s) {
          amps += fmt::format("{},{},{},{},{},{}\n", k, l.from.value, l.to.value, wire_char(w), s,
                              num(std::abs(tr.states[s].i_line[li][idx(w)])));
        }
      }
    }
    for (std::size_t s = 0; s < tr.report.loss_kw.size(); ++s) {
      losses += fmt::format("{},{},{}\n", k, s, num(tr.report.loss_kw[s]));
    }
    json t = to_json(tr.report);
    t["seed"] = tr.seed;
    t["vehicles"] = tr.fleet.vehicles.size();
    t["ev_energy_kwh"] = ev_power_frame(tr.schedule, tr.fleet).total_energy_kwh();
    json warnings = json::array();
    for (const auto& w : tr.fleet.warnings) warnings.push_back(w);
    for (const auto& w : tr.schedule.warnings) warnings.push_back(w);
    t["warnings"] = warnings;
    trials.push_back(t);
  }
  write_text(dir / "voltages.csv", volts);
  write_text(dir / "currents.csv", amps);
  write_text(dir / "losses.csv", losses);

  json summary = {{"scenario", result.name},
                  {"strategy", to_string(result.strategy)},
                  {"trials", trials},
                  {"total_loss_kwh", to_json(result.loss_kwh)},
                  {"min_voltage_pu", to_json(result.min_voltage_pu)},
                  {"max_neutral_voltage_pu", to_json(result.max_neutral_pu)}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");

  const auto finished = std::chrono::system_clock::now();
  json seeds = json::array();
  for (const auto& tr : result.trials) seeds.push_back(tr.seed);
  json manifest = {{"software", "evgrid"},
                   {"version", kVersion},
                   {"config", config_json(config)},
                   {"trial_seeds", seeds},
                   {"started_utc", iso_time(started)},
                   {"finished_utc", iso_time(finished)},
                   {"elapsed_s", std::chrono::duration<double>(finished - started).count()}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

struct Inputs {
  NetworkTopology topology;
  BaseLoadCurve curve;
  std::vector<Consumer> consumers;
  std::optional<FleetSpec> fixed_fleet;
  SolverOptions solver;
};

Inputs load_inputs(const ScenarioConfig& c) {
  if (c.trials < 1) throw ConfigError("trials must be at least 1");
  auto topology = scale_impedances(load_topology(c.feeder), c.impedance_scale);
  Inputs in{topology, c.base_curve ? load_base_curve(*c.base_curve) : default_base_curve(c.peak_w),
            all_consumers(topology.bus_count()), std::nullopt, SolverOptions::for_topology(topology)};
  if (c.fleet_file) {
    in.fixed_fleet = load_fleet(*c.fleet_file, c.charge_power_w);
    for (const auto& ev : in.fixed_fleet->vehicles) {
      if (!topology.contains(ev.bus)) {
        throw ConfigError(fmt::format("{}: vehicle on bus {} which the feeder does not have", c.fleet_file->string(),
                                      ev.bus.value));
      }
    }
  }
  if (c.tolerance) in.solver.tolerance = *c.tolerance;
  in.solver.max_iterations = c.max_iterations;
  return in;
}

FleetSpec trial_fleet(const ScenarioConfig& c, const Inputs& in, std::uint64_t seed) {
  if (in.fixed_fleet) return *in.fixed_fleet;
  return sample_fleet(in.consumers, c.penetration, c.fleet_distribution, c.charge_power_w, seed);
}

TrialResult run_trial(const ScenarioConfig& c, const Inputs& in, int trial) {
  TrialResult tr;
  tr.seed = trial_seed(c.seed, trial);
  tr.households = sample_household_loads(in.curve, in.consumers, c.sigma_fraction, c.power_factor, tr.seed);
  tr.fleet = trial_fleet(c, in, tr.seed);
  tr.schedule = make_schedule(c, tr.fleet);
  const auto frame = ev_power_frame(tr.schedule, tr.fleet);
  tr.states = solve_day(in.topology, tr.households, frame, in.solver,
                        fmt::format("strategy {}, trial {}", to_string(c.strategy), trial));
  tr.report = make_report(tr.states, in.topology);
  return tr;
}

ScenarioResult run_with_inputs(const ScenarioConfig& c, const Inputs& in) {
  const auto started = std::chrono::system_clock::now();
  ScenarioResult result;
  result.name = scenario_label(c.strategy);
  result.strategy = c.strategy;
  std::vector<double> losses, vmin, vn;
  for (int k = 0; k < c.trials; ++k) {
    result.trials.push_back(run_trial(c, in, k));
    const auto& r = result.trials.back().report;
    losses.push_back(r.total_loss_kwh);
    vmin.push_back(r.voltages.overall.pu);
    vn.push_back(r.max_neutral.pu);
  }
  result.loss_kwh = spread_of(losses);
  result.min_voltage_pu = spread_of(vmin);
  result.max_neutral_pu = spread_of(vn);
  if (!c.out_dir.empty()) write_outputs(c, in.topology, result, started);
  return result;
}

}  // namespace

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::baseline: return "baseline";
    case Strategy::uncontrolled: return "uncontrolled";
    case Strategy::timer: return "timer";
    case Strategy::zoned: return "zoned";
    case Strategy::semismart: return "semismart";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  for (Strategy s : kAllStrategies) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError(fmt::format("unknown strategy '{}' (baseline, uncontrolled, timer, zoned, semismart)", name));
}

std::string scenario_label(Strategy s) {
  return fmt::format("{}-{}", static_cast<char>('A' + static_cast<int>(s)), to_string(s));
}

std::uint64_t trial_seed(std::uint64_t seed, int trial) { return seed + static_cast<std::uint64_t>(trial); }

BusInjection build_injection(const NetworkTopology& topology, const std::vector<HouseholdLoad>& households,
                             const EvPowerFrame& ev, TimeSlot slot) {
  BusInjection inj(topology.bus_count());
  const auto t = static_cast<std::size_t>(slot.index());
  for (const auto& h : households) {
    inj.at(h.consumer.bus, h.consumer.phase) += Complex{h.p[t], h.q[t]};
  }
  for (std::size_t i = 0; i < ev.consumers.size(); ++i) {
    inj.at(ev.consumers[i].bus, ev.consumers[i].phase) += Complex{ev.p[i][t], 0.0};
  }
  return inj;
}

DayStates solve_day(const NetworkTopology& topology, const std::vector<HouseholdLoad>& households,
                    const EvPowerFrame& ev, const SolverOptions& options, const std::string& context) {
  DayStates states;
  states.reserve(TimeSlot::kPerDay);
  for (int s = 0; s < TimeSlot::kPerDay; ++s) {
    const TimeSlot slot(s);
    auto state = solve_sweep(topology, build_injection(topology, households, ev, slot), options);
    if (!state.converged()) {
      const char* why = state.status == SolveStatus::voltage_collapse ? "voltage collapse (infeasible injection)"
                                                                      : "no convergence";
      throw ScenarioError(fmt::format("{}{}slot {} ({}): {} after {} iterations, residual {} V", context,
                                      context.empty() ? "" : ", ", s, slot.to_string(), why, state.iterations,
                                      state.residual));
    }
    states.push_back(std::move(state));
  }
  return states;
}

ChargeSchedule make_schedule(const ScenarioConfig& c, const FleetSpec& fleet) {
  switch (c.strategy) {
    case Strategy::baseline: {
      ChargeSchedule none;
      none.power_w = fleet.charge_power_w;
      return none;
    }
    case Strategy::uncontrolled: return schedule_uncontrolled(fleet);
    case Strategy::timer: return schedule_timer(fleet, c.timer_start);
    case Strategy::zoned: return schedule_zoned(fleet, c.zones ? load_zone_plan(*c.zones) : default_zone_plan());
    case Strategy::semismart: return schedule_semi_smart(fleet);
  }
  throw ConfigError("unknown strategy");
}

ScenarioResult run_scenario(const ScenarioConfig& config) { return run_with_inputs(config, load_inputs(config)); }

SweepResult run_sweep(const ScenarioConfig& config, Strategy baseline) {
  const Inputs in = load_inputs(config);
  SweepResult sweep;
  for (Strategy s : kAllStrategies) {
    ScenarioConfig c = config;
    c.strategy = s;
    if (!config.out_dir.empty()) c.out_dir = config.out_dir / scenario_label(s);
    sweep.scenarios.emplace(scenario_label(s), run_with_inputs(c, in));
  }
  std::string csv = "trial,scenario,loss_kwh,loss_change_pct,min_voltage_pu,min_voltage_change_pp\n";
  for (int k = 0; k < config.trials; ++k) {
    std::map<std::string, ScenarioReport> reports;
    for (const auto& [name, r] : sweep.scenarios) reports.emplace(name, r.trials[static_cast<std::size_t>(k)].report);
    auto rows = compare_scenarios(reports, scenario_label(baseline));
    for (const auto& row : rows) {
      csv += fmt::format("{},{},{},{},{},{}\n", k, row.scenario, num(row.loss_kwh), num(row.loss_change_pct),
                         num(row.min_voltage_pu), num(row.min_voltage_change_pp));
    }
    sweep.comparison.push_back(std::move(rows));
  }
  if (!config.out_dir.empty()) write_text(config.out_dir / "comparison.csv", csv);
  return sweep;
}

std::vector<ValidationRow> validate(const ScenarioConfig& config) {
  const Inputs in = load_inputs(config);
  const auto households =
      sample_household_loads(in.curve, in.consumers, config.sigma_fraction, config.power_factor, config.seed);
  const auto fleet = trial_fleet(config, in, config.seed);
  const auto frame = ev_power_frame(schedule_uncontrolled(fleet), fleet);

  const std::array<std::pair<const char*, TimeSlot>, 3> snapshots{{
      {"valley", TimeSlot::parse("03:00")},
      {"shoulder", TimeSlot::parse("08:00")},
      {"peak", TimeSlot::parse("19:00")},
  }};
  std::vector<ValidationRow> rows;
  for (const auto& [label, slot] : snapshots) {
    const auto inj = build_injection(in.topology, households, frame, slot);
    const auto sweep = solve_sweep(in.topology, inj, in.solver);
    const auto direct = solve_direct(in.topology, inj, in.solver);
    ValidationRow row;
    row.label = label;
    row.slot = slot;
    row.sweep_iterations = sweep.iterations;
    row.direct_iterations = direct.iterations;
    row.max_difference_pu = max_voltage_difference_pu(sweep, direct, in.topology);
    row.kcl_residual_a = kcl_residual(sweep, in.topology, inj);
    const Complex source = slack_power(sweep, in.topology);
    const Complex balance = source - total_demand(inj) - line_losses(sweep, in.topology);
    row.power_balance_rel = std::abs(source) > 0.0 ? std::abs(balance) / std::abs(source) : std::abs(balance);
    row.pass = sweep.converged() && direct.converged() && row.max_difference_pu <= kOracleAgreementPu;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace evgrid
