// evgrid: four-wire feeder simulation under EV charging strategies.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "evgrid/scenario.hpp"

namespace fs = std::filesystem;
using namespace evgrid;

namespace {

struct Options {
  ScenarioConfig config;
  std::string feeder;
  std::string curve;
  std::string fleet;
  std::string zones;
  std::string strategy = "semismart";
  std::string timer_start = "24:00";
  std::string baseline = "uncontrolled";
  std::string out;
  double penetration = -1.0;
  double tolerance = -1.0;
  bool leading_pf = false;
};

fs::path data_path(const char* rel) { return fs::path(EVGRID_DATA_DIR) / rel; }

void add_input_flags(CLI::App* app, Options& o) {
  app->add_option("--feeder", o.feeder, "Feeder description file")->check(CLI::ExistingFile);
  app->add_option("--impedance-scale", o.config.impedance_scale, "Multiplier on every feeder impedance")
      ->capture_default_str();
  app->add_option("--curve", o.curve, "Household base curve (96 values, watts)")->check(CLI::ExistingFile);
  auto* fleet = app->add_option("--fleet", o.fleet, "EV fleet file")->check(CLI::ExistingFile);
  auto* pen = app->add_option("--penetration", o.penetration, "Sample a fleet with this EV share instead")
                  ->check(CLI::Range(0.0, 1.0));
  fleet->excludes(pen);
  app->add_option("--seed", o.config.seed, "Random seed")->capture_default_str();
  app->add_option("--sigma", o.config.sigma_fraction, "Household load standard deviation, fraction of mean")
      ->capture_default_str();
  app->add_option("--pf", o.config.power_factor.value, "Household power factor")->capture_default_str();
  app->add_flag("--leading-pf", o.leading_pf, "Treat the household power factor as leading");
  app->add_option("--charge-power", o.config.charge_power_w, "Charger power, watts")->capture_default_str();
  app->add_option("--tolerance", o.tolerance, "Sweep convergence tolerance, volts (default 1e-6 x V_base)");
  app->add_option("--max-iter", o.config.max_iterations, "Iteration limit per slot")->capture_default_str();
}

void add_run_flags(CLI::App* app, Options& o) {
  add_input_flags(app, o);
  app->add_option("--timer-start", o.timer_start, "Start time for the timer strategy")->capture_default_str();
  app->add_option("--zones", o.zones, "Zone plan for the zoned strategy")->check(CLI::ExistingFile);
  app->add_option("--trials", o.config.trials, "Monte Carlo trials")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--out", o.out, "Output directory");
}

void resolve(Options& o) {
  auto& c = o.config;
  c.feeder = o.feeder.empty() ? data_path("feeders/paper19.txt") : fs::path(o.feeder);
  if (!o.curve.empty()) c.base_curve = o.curve;
  if (o.penetration >= 0.0) {
    c.penetration = o.penetration;
  } else {
    c.fleet_file = o.fleet.empty() ? data_path("data/fleet34.txt") : fs::path(o.fleet);
  }
  if (!o.zones.empty()) c.zones = o.zones;
  c.strategy = parse_strategy(o.strategy);
  try {
    c.timer_start = TimeSlot::parse(o.timer_start);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("--timer-start: {}", e.what()));
  }
  if (o.tolerance > 0.0) c.tolerance = o.tolerance;
  c.power_factor.leading = o.leading_pf;
  c.out_dir = o.out;
}

// Fleet warnings repeat across the scenarios of a sweep; show each once.
void print_warnings(const ScenarioResult& r, std::set<std::string>& shown) {
  for (const auto& tr : r.trials) {
    for (const auto* list : {&tr.fleet.warnings, &tr.schedule.warnings}) {
      for (const auto& w : *list) {
        if (shown.insert(w).second) fmt::print(stderr, "warning: {}\n", w);
      }
    }
  }
}

void print_result(const ScenarioResult& r) {
  fmt::print("{:<16} loss {:>10.3f} kWh   min V {:.4f} pu   max Vn {:.4f} pu", r.name, r.loss_kwh.mean,
             r.min_voltage_pu.mean, r.max_neutral_pu.mean);
  if (r.trials.size() > 1) fmt::print("   (loss sd {:.3f}, {} trials)", r.loss_kwh.stddev, r.trials.size());
  fmt::print("\n");
}

int cmd_run(Options& o) {
  resolve(o);
  const auto r = run_scenario(o.config);
  std::set<std::string> shown;
  print_warnings(r, shown);
  print_result(r);
  const auto& v = r.trials.front().report.voltages;
  fmt::print("worst bus {} at {}: Van {:.4f}  Vbn {:.4f}  Vcn {:.4f} pu\n", v.overall.bus.value,
             v.overall.slot.to_string(), v.at_worst_bus[0].pu, v.at_worst_bus[1].pu, v.at_worst_bus[2].pu);
  return 0;
}

int cmd_sweep(Options& o) {
  resolve(o);
  const auto sweep = run_sweep(o.config, parse_strategy(o.baseline));
  std::set<std::string> shown;
  for (const auto& [name, r] : sweep.scenarios) print_warnings(r, shown);
  for (const auto& [name, r] : sweep.scenarios) print_result(r);
  fmt::print("\n{:<16} {:>12} {:>12} {:>10} {:>10}\n", "scenario", "loss kWh", "vs " + o.baseline, "min V pu",
             "dV pp");
  for (const auto& row : sweep.comparison.front()) {
    fmt::print("{:<16} {:>12.3f} {:>11.2f}% {:>10.4f} {:>+10.2f}\n", row.scenario, row.loss_kwh, row.loss_change_pct,
               row.min_voltage_pu, row.min_voltage_change_pp);
  }
  return 0;
}

int cmd_validate(Options& o) {
  resolve(o);
  const auto rows = validate(o.config);
  bool ok = true;
  fmt::print("{:<9} {:>6} {:>6} {:>6} {:>12} {:>12} {:>12}  result\n", "snapshot", "time", "sweep", "direct",
             "|dV| pu", "KCL A", "balance");
  for (const auto& r : rows) {
    fmt::print("{:<9} {:>6} {:>6} {:>6} {:>12.3e} {:>12.3e} {:>12.3e}  {}\n", r.label, r.slot.to_string(),
               r.sweep_iterations, r.direct_iterations, r.max_difference_pu, r.kcl_residual_a, r.power_balance_rel,
               r.pass ? "pass" : "FAIL");
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}

int cmd_sample(Options& o) {
  if (o.penetration < 0.0) o.penetration = o.config.penetration;
  resolve(o);
  const auto topology = load_topology(o.config.feeder);
  const auto consumers = all_consumers(topology.bus_count());
  const auto fleet = sample_fleet(consumers, o.config.penetration, o.config.fleet_distribution,
                                  o.config.charge_power_w, o.config.seed);
  const auto curve = o.config.base_curve ? load_base_curve(*o.config.base_curve) : default_base_curve(o.config.peak_w);
  const auto households =
      sample_household_loads(curve, consumers, o.config.sigma_fraction, o.config.power_factor, o.config.seed);
  if (o.out.empty()) {
    std::cout << serialize_fleet(fleet);
    return 0;
  }
  fs::create_directories(o.out);
  std::FILE* f = std::fopen((fs::path(o.out) / "fleet.txt").string().c_str(), "wb");
  if (!f) throw std::runtime_error(fmt::format("cannot write to '{}'", o.out));
  fmt::print(f, "{}", serialize_fleet(fleet));
  std::fclose(f);
  f = std::fopen((fs::path(o.out) / "households.csv").string().c_str(), "wb");
  if (!f) throw std::runtime_error(fmt::format("cannot write to '{}'", o.out));
  fmt::print(f, "bus,phase,slot,p_w,q_var\n");
  for (const auto& h : households) {
    for (int t = 0; t < TimeSlot::kPerDay; ++t) {
      fmt::print(f, "{},{},{},{:.9g},{:.9g}\n", h.consumer.bus.value, phase_char(h.consumer.phase), t,
                 h.p[static_cast<std::size_t>(t)], h.q[static_cast<std::size_t>(t)]);
    }
  }
  std::fclose(f);
  fmt::print("wrote {} vehicles and {} household profiles to {}\n", fleet.vehicles.size(), households.size(), o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unbalanced four-wire feeder simulation under EV charging strategies"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Options o;
  auto* run = app.add_subcommand("run", "Simulate one charging strategy over a day");
  add_run_flags(run, o);
  run->add_option("--strategy", o.strategy, "baseline | uncontrolled | timer | zoned | semismart")
      ->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Simulate all five strategies on identical household samples");
  add_run_flags(sweep, o);
  sweep->add_option("--baseline", o.baseline, "Scenario the comparison is relative to")->capture_default_str();

  auto* val = app.add_subcommand("validate", "Cross-check the sweep solver against a direct nodal solve");
  add_input_flags(val, o);

  auto* sample = app.add_subcommand("sample", "Sample a fleet and household loads");
  add_input_flags(sample, o);
  sample->add_option("--out", o.out, "Output directory (fleet to stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(o);
    if (*sweep) return cmd_sweep(o);
    if (*val) return cmd_validate(o);
    if (*sample) return cmd_sample(o);
  } catch (const ParseError& e) {
    fmt::print(stderr, "parse error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
