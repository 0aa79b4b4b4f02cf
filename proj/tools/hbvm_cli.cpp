// Command-line runner for the HBVM benchmark suite.
//
//   hbvm run   --problem kdv --method spectral --n 60
//   hbvm table --problem sine-gordon --method gauss --s 2 --format csv --out t.csv
//   hbvm grid  --problem nlse --method hbvm --s 3 --n 200 --stride 10 --out nlse.txt
//
// Options may also come from a flat key = value file given with --config;
// command-line flags take precedence.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hbvm/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitNoConvergence = 3;

struct Options {
  std::string problem = "sine-gordon";
  std::string method = "gauss";
  std::size_t s = 1;
  std::size_t k = 0;
  std::size_t n = 100;
  std::size_t N = 0;
  std::size_t m = 0;
  double tol = 0.0;
  std::size_t s_init = 0;
  std::size_t s_max = 40;
  std::string k_rule = "default";
  std::string solver = "linear-newton";
  double nonlinear_tol = 1e-14;
  std::size_t max_iters = 100;
  std::string out;
  std::string format = "csv";
  bool quick = false;
  std::vector<std::size_t> n_list;
  std::size_t stride = 1;
};

hbvm::RunSpec to_spec(const Options& o) {
  hbvm::RunSpec spec;
  const auto problem = hbvm::parse_problem(o.problem);
  if (!problem) throw hbvm::InvalidParams("unknown problem '" + o.problem + "'");
  const auto method = hbvm::parse_method(o.method);
  if (!method) throw hbvm::InvalidParams("unknown method '" + o.method + "'");
  spec.problem = *problem;
  spec.method.kind = *method;
  spec.method.s = o.s;
  spec.method.k = o.k;
  spec.method.tol = o.tol;
  spec.method.s_init = o.s_init;
  spec.method.s_max = o.s_max;
  spec.method.exact_k_rule = o.k_rule == "exact";
  spec.n = o.n;
  if (o.N != 0) spec.N = o.N;
  if (o.m != 0) spec.m = o.m;
  spec.quick = o.quick;
  spec.solver.mode = o.solver == "fixed-point" ? hbvm::SolverMode::FixedPoint : hbvm::SolverMode::LinearNewton;
  spec.solver.nonlinear_tol = o.nonlinear_tol;
  spec.solver.max_iters = o.max_iters;
  return hbvm::resolve_spec(spec);
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open output file: " + path);
  os << text;
  if (!os) throw std::runtime_error("failed writing output file: " + path);
}

void summarize(const hbvm::RunReport& rep) {
  const auto& e = rep.errors;
  std::fprintf(stderr, "%-12s %-16s n=%-6zu dt=%.3e  e_u=%.3e  e_H=%.3e", std::string(hbvm::problem_name(rep.spec.problem)).c_str(),
               rep.spec.method.label().c_str(), rep.spec.n, rep.dt, e.e_u, e.e_H);
  if (e.e_1) std::fprintf(stderr, "  e_1=%.3e  e_2=%.3e", *e.e_1, e.e_2.value_or(0.0));
  if (rep.spec.method.kind == hbvm::MethodKind::Spectral)
    std::fprintf(stderr, "  k=%zu s=%zu (s in [%zu,%zu])", rep.k_final, rep.s_final, rep.s_min, rep.s_max);
  std::fprintf(stderr, "  iters=%.2f  %.2fs%s\n", rep.iters_avg, rep.wall_s,
               rep.completed ? "" : "  ** no convergence");
  if (!rep.completed) std::fprintf(stderr, "  step %zu: %s\n", rep.failed_step.value_or(0), rep.failure.c_str());
  if (rep.aliasing_risk) std::fprintf(stderr, "  warning: m < 2N+1, projection may alias\n");
}

int do_run(const Options& o) {
  const hbvm::RunReport rep = hbvm::run(to_spec(o));
  summarize(rep);
  if (o.format == "json")
    emit(hbvm::to_json(rep).dump(2) + "\n", o.out);
  else
    emit(std::string(hbvm::kCsvHeader) + "\n" + hbvm::csv_row(rep) + "\n", o.out);
  return rep.completed ? kExitOk : kExitNoConvergence;
}

int do_table(const Options& o) {
  const hbvm::RunSpec base = to_spec(o);
  std::vector<std::size_t> ns = o.n_list;
  if (ns.empty()) ns = hbvm::default_n_list(base.problem, base.method.kind, base.method.s, base.quick);
  const auto rows = hbvm::run_table(base, ns);
  bool all_ok = true;
  for (const auto& r : rows) {
    summarize(r.report);
    all_ok = all_ok && r.report.completed;
  }
  if (o.format == "json")
    emit(hbvm::to_json(rows).dump(2) + "\n", o.out);
  else
    emit(hbvm::table_csv(rows), o.out);
  return all_ok ? kExitOk : kExitNoConvergence;
}

int do_grid(const Options& o) {
  const hbvm::RunSpec spec = to_spec(o);
  hbvm::SolutionGrid grid;
  const hbvm::RunReport rep = hbvm::run(spec, &grid, o.stride);
  summarize(rep);
  hbvm::write_grid(grid, o.out.empty() ? std::string("grid.txt") : o.out);
  return rep.completed ? kExitOk : kExitNoConvergence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HBVM time integration of Fourier-discretized Hamiltonian PDEs"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key = value file with option defaults");

  Options o;
  app.add_option("--problem", o.problem, "sine-gordon | nlse | kdv")
      ->check(CLI::IsMember({"sine-gordon", "nlse", "kdv"}));
  app.add_option("--method", o.method, "gauss | hbvm | spectral")->check(CLI::IsMember({"gauss", "hbvm", "spectral"}));
  app.add_option("--s", o.s, "Legendre basis size (gauss, hbvm)");
  app.add_option("--k", o.k, "Gauss nodes (hbvm); 0 picks the energy-conserving value");
  app.add_option("--n", o.n, "Number of time steps");
  app.add_option("--N", o.N, "Fourier truncation index (0: problem default)");
  app.add_option("--m", o.m, "Space quadrature panels (0: problem default)");
  app.add_option("--tol", o.tol, "Spectral tolerance on rho_s (0: problem default)");
  app.add_option("--s-init", o.s_init, "Spectral starting s (0: calibrate on the first step)");
  app.add_option("--s-max", o.s_max, "Spectral upper bound on s");
  app.add_option("--k-rule", o.k_rule, "Spectral k rule: default (max(s+2,20)) | exact")
      ->check(CLI::IsMember({"default", "exact"}));
  app.add_option("--solver", o.solver, "fixed-point | linear-newton")
      ->check(CLI::IsMember({"fixed-point", "linear-newton"}));
  app.add_option("--nonlinear-tol", o.nonlinear_tol, "Nonlinear iteration tolerance");
  app.add_option("--max-iters", o.max_iters, "Nonlinear iteration cap");
  app.add_option("--out", o.out, "Output path (stdout when omitted; grid defaults to grid.txt)");
  app.add_option("--format", o.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--quick", o.quick, "CI-scale profile: N=64 and short n lists");
  app.add_option("--n-list", o.n_list, "Step counts for table (ascending)")->delimiter(',');
  app.add_option("--stride", o.stride, "Grid sampling stride in steps");

  auto* run_cmd = app.add_subcommand("run", "Integrate one problem/method/n combination");
  auto* table_cmd = app.add_subcommand("table", "Run a list of n and tabulate errors and rates");
  auto* grid_cmd = app.add_subcommand("grid", "Dump the space-time solution grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (run_cmd->parsed()) return do_run(o);
    if (table_cmd->parsed()) return do_table(o);
    if (grid_cmd->parsed()) return do_grid(o);
  } catch (const hbvm::InvalidParams& e) {
    std::cerr << "invalid spec: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitInvalid;
}
