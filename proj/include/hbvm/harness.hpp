#pragma once

// Experiment runner: integrates a benchmark problem with a given method over
// n uniform steps, tracks errors online and tabulates convergence rates.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hbvm/adaptive.hpp"
#include "hbvm/benchmarks.hpp"
#include "hbvm/solver.hpp"
#include "hbvm/tableau.hpp"

namespace hbvm {

enum class MethodKind { Gauss, Hbvm, Spectral };

inline std::string_view method_name(MethodKind kind) {
  switch (kind) {
    case MethodKind::Gauss: return "gauss";
    case MethodKind::Hbvm: return "hbvm";
    case MethodKind::Spectral: return "spectral";
  }
  return "?";
}

inline std::optional<MethodKind> parse_method(std::string_view name) {
  if (name == "gauss") return MethodKind::Gauss;
  if (name == "hbvm") return MethodKind::Hbvm;
  if (name == "spectral") return MethodKind::Spectral;
  return std::nullopt;
}

struct MethodSpec {
  MethodKind kind = MethodKind::Gauss;
  std::size_t s = 1;
  /// hbvm: 0 selects the energy-conserving k for polynomial Hamiltonians
  /// (k_rule(s, degree)), else max(s+2, 20). Ignored by gauss.
  std::size_t k = 0;
  /// spectral: tolerance on rho_s; 0 selects the problem default.
  double tol = 0.0;
  /// spectral: starting s; 0 calibrates it on the first step.
  std::size_t s_init = 0;
  std::size_t s_min = 2;
  std::size_t s_max = 40;
  /// spectral: use the exact-quadrature k rule for polynomial Hamiltonians
  /// instead of k = max(s+2, 20).
  bool exact_k_rule = false;

  std::string label() const {
    char buf[64];
    switch (kind) {
      case MethodKind::Gauss: std::snprintf(buf, sizeof buf, "gauss(%zu)", s); break;
      case MethodKind::Hbvm: std::snprintf(buf, sizeof buf, "hbvm(%zu,%zu)", k, s); break;
      case MethodKind::Spectral: std::snprintf(buf, sizeof buf, "spectral(%.0e)", tol); break;
    }
    return buf;
  }
};

struct RunSpec {
  ProblemKind problem = ProblemKind::SineGordon;
  MethodSpec method;
  std::size_t n = 100;
  std::optional<std::size_t> N, m;
  SolverConfig solver;
  bool quick = false;
};

/// Problem descriptor with the run's N/m overrides and quick profile applied.
inline BenchmarkProblem resolve_problem(const RunSpec& spec) {
  BenchmarkProblem problem = BenchmarkProblem::make(spec.problem);
  if (spec.quick) {
    problem.N = 64;
    problem.m = problem.default_m_for(problem.N);
  }
  if (spec.N) {
    problem.N = *spec.N;
    if (!spec.m) problem.m = problem.default_m_for(problem.N);
  }
  if (spec.m) problem.m = *spec.m;
  return problem;
}

/// Fills defaults (k, tol) and checks the method parameters.
inline RunSpec resolve_spec(RunSpec spec) {
  if (spec.n < 1) throw InvalidParams("n must be at least 1");
  const BenchmarkProblem problem = resolve_problem(spec);
  auto& m = spec.method;
  switch (m.kind) {
    case MethodKind::Gauss:
      m.k = m.s;
      break;
    case MethodKind::Hbvm:
      if (m.k == 0) m.k = problem.hamiltonian_degree ? k_rule(m.s, problem.hamiltonian_degree) : k_rule(m.s);
      break;
    case MethodKind::Spectral:
      if (m.tol <= 0.0) m.tol = problem.spectral_tol;
      if (m.s_min < 1 || m.s_min > m.s_max) throw InvalidParams("spectral: need 1 <= s_min <= s_max");
      if (m.s_init != 0 && (m.s_init < m.s_min || m.s_init > m.s_max))
        throw InvalidParams("spectral: s_init outside [s_min, s_max]");
      break;
  }
  if (m.kind != MethodKind::Spectral) {
    if (m.s < 1 || m.s > m.k || m.k > kMaxQuadratureNodes)
      throw InvalidParams("method parameters violate 1 <= s <= k <= 64: k=" + std::to_string(m.k) +
                          ", s=" + std::to_string(m.s));
  }
  if (problem.N < 1 || problem.m < 2) throw InvalidParams("need N >= 1 and m >= 2");
  return spec;
}

struct RunReport {
  RunSpec spec;
  double dt = 0.0;
  ErrorReport errors;
  double projection_residual = 0.0;
  bool aliasing_risk = false;
  std::size_t k_min = 0, k_max = 0, k_final = 0;
  std::size_t s_min = 0, s_max = 0, s_final = 0;
  std::size_t s_max_events = 0;
  double iters_avg = 0.0;
  std::size_t iters_max = 0;
  std::size_t steps_done = 0;
  double wall_s = 0.0;
  bool completed = false;
  std::optional<std::size_t> failed_step;
  std::string failure;
};

/// Space-time samples of the solution (u, or u^2+v^2 for NLSE).
struct SolutionGrid {
  std::vector<double> x;
  std::vector<double> t;
  std::vector<std::vector<double>> values;  // one row per t sample
};

namespace detail {

inline void record_grid(SolutionGrid& grid, const BenchmarkProblem& problem, const FourierBasis& basis,
                        const Vector& y, double mean, double t) {
  const Matrix sol = solution_on_grid(problem, basis, y, mean);
  std::vector<double> row(static_cast<std::size_t>(sol.rows()));
  for (Index i = 0; i < sol.rows(); ++i) {
    row[static_cast<std::size_t>(i)] =
        problem.has_second_component() ? sol(i, 0) * sol(i, 0) + sol(i, 1) * sol(i, 1) : sol(i, 0);
  }
  grid.t.push_back(t);
  grid.values.push_back(std::move(row));
}

}  // namespace detail

/// Integrates spec.problem over n steps of T/n. Convergence failures are
/// reported in the returned record, never thrown. When `grid` is given the
/// solution is sampled every `grid_stride` steps (and at t = 0 and T).
inline RunReport run(const RunSpec& input, SolutionGrid* grid = nullptr, std::size_t grid_stride = 0) {
  RunReport rep;
  rep.spec = resolve_spec(input);
  const RunSpec& spec = rep.spec;
  const BenchmarkProblem problem = resolve_problem(spec);
  const FourierBasis basis(problem.a, problem.b, problem.N, problem.m);

  const auto t_start = std::chrono::steady_clock::now();
  const InitialState init = initial_state(problem, basis);
  rep.projection_residual = init.residual;
  rep.aliasing_risk = init.aliasing_risk;
  const auto system = make_system(problem, basis, init.mean);

  const double h = problem.T / static_cast<double>(spec.n);
  rep.dt = h;
  Vector y = init.y;
  ErrorTracker tracker(problem, basis, init.mean);
  tracker.observe(0.0, y, system->hamiltonian(y), system->invariants(y));
  if (grid != nullptr) {
    grid->x.assign(basis.grid().data(), basis.grid().data() + basis.grid().size());
    detail::record_grid(*grid, problem, basis, y, init.mean, 0.0);
  }

  GammaSolver solver(*system, spec.solver);
  TableauCache tableaux;
  const MethodSpec& method = spec.method;

  ControllerState ctl;
  if (method.kind == MethodKind::Spectral) {
    const std::optional<std::size_t> nu = method.exact_k_rule ? problem.hamiltonian_degree : std::nullopt;
    ctl = ControllerState::with(method.s_init != 0 ? method.s_init : method.s_min, method.tol, nu);
    ctl.s_min = method.s_min;
    ctl.s_max = method.s_max;
  }

  std::size_t iter_total = 0;
  rep.k_min = rep.s_min = std::numeric_limits<std::size_t>::max();
  GammaSolution previous;
  bool have_previous = false;

  for (std::size_t i = 1; i <= spec.n; ++i) {
    const double t = static_cast<double>(i) * h;
    try {
      Vector y1;
      GammaSolution diag;
      std::size_t k_used = method.k, s_used = method.s;
      if (method.kind == MethodKind::Spectral) {
        if (i == 1 && method.s_init == 0) {
          // The calibration solve of step 1 doubles as its solution.
          diag = calibrate_initial_s(solver, tableaux, y, h, ctl);
          y1 = y + h * diag.gammas.col(0);
          k_used = ctl.k;
          s_used = ctl.s;
          if (update_controller(ctl, gamma_norms(diag.gammas))) ++rep.s_max_events;
        } else {
          AdaptiveStepResult res = adaptive_step(solver, tableaux, y, h, ctl, have_previous ? &previous : nullptr);
          y1 = std::move(res.y1);
          diag = std::move(res.diag);
          k_used = res.k_used;
          s_used = res.s_used;
          if (res.s_max_exceeded) ++rep.s_max_events;
        }
      } else {
        auto res = solver.step(y, h, tableaux.get(method.k, method.s), have_previous ? &previous : nullptr);
        y1 = std::move(res.first);
        diag = std::move(res.second);
      }
      y = std::move(y1);
      iter_total += diag.iterations;
      rep.iters_max = std::max(rep.iters_max, diag.iterations);
      rep.k_min = std::min(rep.k_min, k_used);
      rep.k_max = std::max(rep.k_max, k_used);
      rep.s_min = std::min(rep.s_min, s_used);
      rep.s_max = std::max(rep.s_max, s_used);
      rep.k_final = k_used;
      rep.s_final = s_used;
      previous = std::move(diag);
      have_previous = true;
    } catch (const NoConvergence& e) {
      rep.failed_step = i;
      rep.failure = e.what();
      break;
    }
    rep.steps_done = i;
    tracker.observe(t, y, system->hamiltonian(y), system->invariants(y));
    if (grid != nullptr && ((grid_stride > 0 && i % grid_stride == 0) || i == spec.n))
      if (grid->t.empty() || grid->t.back() != t) detail::record_grid(*grid, problem, basis, y, init.mean, t);
  }

  rep.completed = !rep.failed_step.has_value();
  rep.errors = tracker.report();
  if (rep.steps_done > 0) rep.iters_avg = static_cast<double>(iter_total) / static_cast<double>(rep.steps_done);
  if (rep.steps_done == 0) rep.k_min = rep.s_min = 0;
  rep.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

// ---- tables ---------------------------------------------------------------

struct TableRow {
  RunReport report;
  std::optional<double> rate_u, rate_H;
  bool plateau_u = false, plateau_H = false;
};

/// Rates between consecutive rows and round-off plateau marks. A rate is
/// marked when the finer error sits within a factor 10 of the column's
/// smallest error and the rate has collapsed (below 0.75 of the largest rate
/// in the column, or below 0.5).
inline void annotate_rates(std::vector<TableRow>& rows) {
  auto column = [&](auto get, auto set_rate, auto set_mark) {
    double floor = std::numeric_limits<double>::infinity();
    for (const auto& r : rows)
      if (r.report.completed) floor = std::min(floor, get(r));
    std::vector<std::optional<double>> rates(rows.size());
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < rows.size(); ++j) {
      const auto& a = rows[j - 1].report;
      const auto& b = rows[j].report;
      if (!a.completed || !b.completed) continue;
      const double ea = get(rows[j - 1]), eb = get(rows[j]);
      if (!(ea > 0.0) || !(eb > 0.0)) continue;
      rates[j] = convergence_rate(ea, eb, static_cast<double>(a.spec.n), static_cast<double>(b.spec.n));
      best = std::max(best, *rates[j]);
    }
    for (std::size_t j = 1; j < rows.size(); ++j) {
      if (!rates[j]) continue;
      set_rate(rows[j], *rates[j]);
      const bool at_floor = get(rows[j]) <= 10.0 * floor;
      const bool collapsed = *rates[j] < 0.5 || *rates[j] < 0.75 * best;
      set_mark(rows[j], at_floor && collapsed);
    }
  };
  column([](const TableRow& r) { return r.report.errors.e_u; }, [](TableRow& r, double v) { r.rate_u = v; },
         [](TableRow& r, bool v) { r.plateau_u = v; });
  column([](const TableRow& r) { return r.report.errors.e_H; }, [](TableRow& r, double v) { r.rate_H = v; },
         [](TableRow& r, bool v) { r.plateau_H = v; });
}

/// Runs `base` for every n in `n_list` (ascending) and annotates rates.
/// Rows that fail to converge are kept, flagged, and excluded from rates.
inline std::vector<TableRow> run_table(const RunSpec& base, const std::vector<std::size_t>& n_list) {
  if (!std::is_sorted(n_list.begin(), n_list.end()))
    throw InvalidParams("run_table: n list must be ascending");
  std::vector<TableRow> rows;
  for (std::size_t n : n_list) {
    RunSpec spec = base;
    spec.n = n;
    rows.push_back({run(spec)});
  }
  annotate_rates(rows);
  return rows;
}

/// Reference step counts for a problem and method: doubling from 100 (60
/// for KdV); the three-stage methods stop one row earlier, where their
/// errors have reached the round-off floor.
inline std::vector<std::size_t> default_n_list(ProblemKind problem, MethodKind method, std::size_t s, bool quick) {
  std::vector<std::size_t> out;
  if (method == MethodKind::Spectral) {
    switch (problem) {
      case ProblemKind::Kdv: out = {60, 90, 120}; break;
      default: out = {100, 150, 200}; break;
    }
  } else {
    std::size_t first = problem == ProblemKind::Kdv ? 60 : 100;
    std::size_t rows = problem == ProblemKind::Nlse ? 6 : 9;
    if (s >= 3) --rows;
    for (std::size_t r = 0, n = first; r < rows; ++r, n *= 2) out.push_back(n);
  }
  if (quick && out.size() > 3) out.resize(3);
  return out;
}

// ---- output ---------------------------------------------------------------

inline constexpr std::string_view kCsvHeader =
    "problem,method,k,s,n,dt,e_u,rate_u,e_H,rate_H,e_1,e_2,iters_avg,wall_s";

namespace detail {

inline std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

inline std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_num(*v) : std::string(); }

}  // namespace detail

/// A rate on the round-off plateau is written as "**" instead of a number.
inline std::string csv_row(const RunReport& rep, std::optional<double> rate_u = std::nullopt,
                           std::optional<double> rate_H = std::nullopt, bool plateau_u = false,
                           bool plateau_H = false) {
  std::ostringstream os;
  const auto& m = rep.spec.method;
  const bool spectral = m.kind == MethodKind::Spectral;
  os << problem_name(rep.spec.problem) << ',' << method_name(m.kind) << ','
     << (spectral ? rep.k_final : m.k) << ',' << (spectral ? rep.s_final : m.s) << ',' << rep.spec.n << ','
     << detail::fmt_num(rep.dt) << ',';
  if (rep.completed) {
    os << detail::fmt_num(rep.errors.e_u) << ',' << (plateau_u ? "**" : detail::fmt_opt(rate_u)) << ','
       << detail::fmt_num(rep.errors.e_H) << ',' << (plateau_H ? "**" : detail::fmt_opt(rate_H)) << ','
       << detail::fmt_opt(rep.errors.e_1) << ',' << detail::fmt_opt(rep.errors.e_2) << ',';
  } else {
    os << ",,,,,,";
  }
  os << detail::fmt_num(rep.iters_avg) << ',' << detail::fmt_num(rep.wall_s);
  return os.str();
}

inline std::string table_csv(const std::vector<TableRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) out += csv_row(r.report, r.rate_u, r.rate_H, r.plateau_u, r.plateau_H) + '\n';
  return out;
}

inline nlohmann::json to_json(const RunReport& rep) {
  using nlohmann::json;
  const auto& m = rep.spec.method;
  json spec = {{"problem", problem_name(rep.spec.problem)},
               {"method", method_name(m.kind)},
               {"k", m.k},
               {"s", m.s},
               {"n", rep.spec.n},
               {"quick", rep.spec.quick},
               {"solver", rep.spec.solver.mode == SolverMode::LinearNewton ? "linear-newton" : "fixed-point"},
               {"nonlinear_tol", rep.spec.solver.nonlinear_tol}};
  if (m.kind == MethodKind::Spectral) {
    spec["tol"] = m.tol;
    spec["s_init"] = m.s_init;
    spec["s_max"] = m.s_max;
    spec["k_rule"] = m.exact_k_rule ? "exact" : "default";
  }
  if (rep.spec.N) spec["N"] = *rep.spec.N;
  if (rep.spec.m) spec["m"] = *rep.spec.m;

  json errors = {{"e_u", rep.errors.e_u}, {"e_H", rep.errors.e_H}};
  errors["e_1"] = rep.errors.e_1 ? json(*rep.errors.e_1) : json(nullptr);
  errors["e_2"] = rep.errors.e_2 ? json(*rep.errors.e_2) : json(nullptr);

  json out = {{"spec", spec},
              {"dt", rep.dt},
              {"errors", errors},
              {"projection_residual", rep.projection_residual},
              {"aliasing_risk", rep.aliasing_risk},
              {"k", {{"min", rep.k_min}, {"max", rep.k_max}, {"final", rep.k_final}}},
              {"s", {{"min", rep.s_min}, {"max", rep.s_max}, {"final", rep.s_final}}},
              {"s_max_events", rep.s_max_events},
              {"iters_avg", rep.iters_avg},
              {"iters_max", rep.iters_max},
              {"steps_done", rep.steps_done},
              {"wall_s", rep.wall_s},
              {"completed", rep.completed}};
  if (rep.failed_step) {
    out["failed_step"] = *rep.failed_step;
    out["failure"] = rep.failure;
  }
  return out;
}

inline nlohmann::json to_json(const std::vector<TableRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j = to_json(r.report);
    j["rate_u"] = r.rate_u ? nlohmann::json(*r.rate_u) : nlohmann::json(nullptr);
    j["rate_H"] = r.rate_H ? nlohmann::json(*r.rate_H) : nlohmann::json(nullptr);
    j["plateau_u"] = r.plateau_u;
    j["plateau_H"] = r.plateau_H;
    arr.push_back(std::move(j));
  }
  return arr;
}

/// Plain-text matrix: first row is (nan, x_0..x_m), then (t_n, values...).
inline void write_grid(const SolutionGrid& grid, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open grid output file: " + path);
  char buf[40];
  os << "nan";
  for (double x : grid.x) {
    std::snprintf(buf, sizeof buf, " %.16e", x);
    os << buf;
  }
  os << '\n';
  for (std::size_t r = 0; r < grid.t.size(); ++r) {
    std::snprintf(buf, sizeof buf, "%.16e", grid.t[r]);
    os << buf;
    for (double v : grid.values[r]) {
      std::snprintf(buf, sizeof buf, " %.16e", v);
      os << buf;
    }
    os << '\n';
  }
  if (!os) throw std::runtime_error("failed writing grid output file: " + path);
}

}  // namespace hbvm
