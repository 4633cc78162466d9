#include "evgrid/power_flow.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace evgrid {

namespace {

constexpr int kNeutral = idx(Wire::n);

Complex wire_impedance(const LineSegment& l, int w) { return w == kNeutral ? l.z_neutral : l.z_phase; }

void check_inputs(const NetworkTopology& t, const BusInjection& inj, const SolverOptions& opt) {
  if (inj.demand.size() != t.bus_count()) {
    throw std::invalid_argument(
        fmt::format("injection covers {} buses, feeder has {}", inj.demand.size(), t.bus_count()));
  }
  for (const auto& d : inj.demand) {
    for (Complex s : d) {
      if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) throw std::invalid_argument("non-finite injection");
    }
  }
  if (!(opt.tolerance > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
  if (opt.max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
}

NetworkState flat_start(const NetworkTopology& t) {
  NetworkState s;
  const auto slack = t.slack();
  s.v.assign(t.bus_count(), slack.v);
  s.i_line.assign(t.lines().size(), WireValues{});
  s.i_load.assign(t.bus_count(), PhaseDemand{});
  return s;
}

/// Constant-PQ load currents at the present voltages. Returns false when a
/// phase-to-neutral voltage falls below the collapse floor.
bool update_load_currents(const NetworkTopology& t, const BusInjection& inj, const SolverOptions& opt,
                          NetworkState& s) {
  const double floor_v = opt.collapse_floor_pu * t.v_base();
  for (std::size_t b = 0; b < t.bus_count(); ++b) {
    for (Phase p : kPhases) {
      const Complex d = s.v[b][idx(p)] - s.v[b][kNeutral];
      if (std::abs(d) < floor_v) return false;
      const Complex demand = inj.demand[b][idx(p)];
      s.i_load[b][idx(p)] = demand == Complex{} ? Complex{} : std::conj(demand / d);
    }
  }
  return true;
}

double max_change(const std::vector<WireValues>& a, const std::vector<WireValues>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (int w = 0; w < 4; ++w) m = std::max(m, std::abs(a[i][w] - b[i][w]));
  }
  return m;
}

/// Fixed-point loop shared by both solvers: load currents from the present
/// voltages, then `network_solve` maps them to line currents and new voltages.
template <typename NetworkSolve>
NetworkState iterate(const NetworkTopology& t, const BusInjection& inj, const SolverOptions& opt,
                     NetworkSolve&& network_solve) {
  check_inputs(t, inj, opt);
  NetworkState s = flat_start(t);
  std::vector<WireValues> next;
  for (int k = 1; k <= opt.max_iterations; ++k) {
    s.iterations = k;
    if (!update_load_currents(t, inj, opt, s)) {
      s.status = SolveStatus::voltage_collapse;
      return s;
    }
    next = s.v;
    network_solve(s, next);
    s.residual = max_change(s.v, next);
    s.v.swap(next);
    if (s.residual < opt.tolerance) {
      s.status = SolveStatus::converged;
      return s;
    }
  }
  s.status = SolveStatus::not_converged;
  return s;
}

}  // namespace

NetworkState solve_sweep(const NetworkTopology& t, const BusInjection& inj, const SolverOptions& opt) {
  const auto order = t.sweep_order();
  const auto slack = t.slack();
  return iterate(t, inj, opt, [&](NetworkState& s, std::vector<WireValues>& v) {
    // Backward: accumulate branch currents from the leaves toward bus 1.
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const BusId bus = *it;
      const int parent = t.parent_line(bus);
      if (parent < 0) continue;
      WireValues acc{};
      for (Phase p : kPhases) {
        acc[idx(p)] = s.i_load[bus.index()][idx(p)];
        acc[kNeutral] -= s.i_load[bus.index()][idx(p)];
      }
      for (auto child : t.child_lines(bus)) {
        for (int w = 0; w < 4; ++w) acc[w] += s.i_line[child][w];
      }
      s.i_line[static_cast<std::size_t>(parent)] = acc;
    }
    // Forward: voltage drops from bus 1 outward.
    v[0] = slack.v;
    for (const BusId bus : order) {
      const int parent = t.parent_line(bus);
      if (parent < 0) continue;
      const auto& line = t.line(static_cast<std::size_t>(parent));
      const auto& up = v[line.from.index()];
      const auto& i = s.i_line[static_cast<std::size_t>(parent)];
      for (int w = 0; w < 4; ++w) v[bus.index()][w] = up[w] - wire_impedance(line, w) * i[w];
    }
  });
}

NetworkState solve_direct(const NetworkTopology& t, const BusInjection& inj, const SolverOptions& opt) {
  using Matrix = Eigen::MatrixXcd;
  using Vector = Eigen::VectorXcd;
  const auto n = static_cast<Eigen::Index>(t.bus_count()) - 1;
  const auto slack = t.slack();

  // Reduced nodal admittance per wire class (phase conductors share one).
  // Row r corresponds to bus index r + 1; slack coupling goes to `coupling`.
  Matrix y_phase = Matrix::Zero(n, n);
  Matrix y_neutral = Matrix::Zero(n, n);
  Vector couple_phase = Vector::Zero(n);
  Vector couple_neutral = Vector::Zero(n);
  for (const auto& l : t.lines()) {
    const Eigen::Index f = static_cast<Eigen::Index>(l.from.index()) - 1;
    const Eigen::Index to = static_cast<Eigen::Index>(l.to.index()) - 1;
    for (auto [y, c, z] : {std::tuple{&y_phase, &couple_phase, l.z_phase},
                           std::tuple{&y_neutral, &couple_neutral, l.z_neutral}}) {
      const Complex adm = 1.0 / z;
      (*y)(to, to) += adm;
      if (f < 0) {
        (*c)(to) += adm;
      } else {
        (*y)(f, f) += adm;
        (*y)(f, to) -= adm;
        (*y)(to, f) -= adm;
      }
    }
  }
  const Eigen::PartialPivLU<Matrix> lu_phase(y_phase);
  const Eigen::PartialPivLU<Matrix> lu_neutral(y_neutral);

  return iterate(t, inj, opt, [&](NetworkState& s, std::vector<WireValues>& v) {
    v[0] = slack.v;
    if (n > 0) {
      for (int w = 0; w < 4; ++w) {
        Vector rhs(n);
        for (Eigen::Index r = 0; r < n; ++r) {
          const auto& load = s.i_load[static_cast<std::size_t>(r + 1)];
          rhs(r) = w == kNeutral ? load[0] + load[1] + load[2] : -load[w];
        }
        const Vector x = w == kNeutral ? lu_neutral.solve(rhs + couple_neutral * slack.v[w])
                                       : lu_phase.solve(rhs + couple_phase * slack.v[w]);
        for (Eigen::Index r = 0; r < n; ++r) v[static_cast<std::size_t>(r + 1)][w] = x(r);
      }
    }
    for (std::size_t li = 0; li < t.lines().size(); ++li) {
      const auto& l = t.line(li);
      for (int w = 0; w < 4; ++w) {
        s.i_line[li][w] = (v[l.from.index()][w] - v[l.to.index()][w]) / wire_impedance(l, w);
      }
    }
  });
}

double kcl_residual(const NetworkState& s, const NetworkTopology& t, const BusInjection& inj) {
  (void)inj;
  double worst = 0.0;
  for (std::size_t b = 1; b < t.bus_count(); ++b) {
    const BusId bus = BusId::from_index(b);
    const auto& in = s.i_line[static_cast<std::size_t>(t.parent_line(bus))];
    for (int w = 0; w < 4; ++w) {
      Complex out{};
      for (auto child : t.child_lines(bus)) out += s.i_line[child][w];
      Complex local{};
      if (w == kNeutral) {
        for (Phase p : kPhases) local -= s.i_load[b][idx(p)];
      } else {
        local = s.i_load[b][w];
      }
      worst = std::max(worst, std::abs(in[w] - out - local));
    }
  }
  return worst;
}

double load_current_mismatch(const NetworkState& s, const NetworkTopology& t, const BusInjection& inj) {
  double worst = 0.0;
  for (std::size_t b = 0; b < t.bus_count(); ++b) {
    for (Phase p : kPhases) {
      const Complex demand = inj.demand[b][idx(p)];
      const Complex expect = demand == Complex{} ? Complex{} : std::conj(demand / s.phase_to_neutral(BusId::from_index(b), p));
      worst = std::max(worst, std::abs(s.i_load[b][idx(p)] - expect));
    }
  }
  return worst;
}

Complex slack_power(const NetworkState& s, const NetworkTopology& t) {
  Complex total{};
  const BusId root{1};
  for (int w = 0; w < 4; ++w) {
    Complex source = w == kNeutral ? Complex{} : s.i_load[0][w];
    if (w == kNeutral) {
      for (Phase p : kPhases) source -= s.i_load[0][idx(p)];
    }
    for (auto child : t.child_lines(root)) source += s.i_line[child][w];
    total += s.v[0][w] * std::conj(source);
  }
  return total;
}

Complex line_losses(const NetworkState& s, const NetworkTopology& t) {
  Complex total{};
  for (std::size_t li = 0; li < t.lines().size(); ++li) {
    for (int w = 0; w < 4; ++w) total += wire_impedance(t.line(li), w) * std::norm(s.i_line[li][w]);
  }
  return total;
}

Complex total_demand(const BusInjection& inj) {
  Complex total{};
  for (const auto& d : inj.demand) total += d[0] + d[1] + d[2];
  return total;
}

double max_voltage_difference_pu(const NetworkState& a, const NetworkState& b, const NetworkTopology& t) {
  return max_change(a.v, b.v) / t.v_base();
}

}  // namespace evgrid
