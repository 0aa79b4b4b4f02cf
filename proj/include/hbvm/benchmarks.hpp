#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hbvm/errors.hpp"
#include "hbvm/fourier.hpp"
#include "hbvm/pde_systems.hpp"

namespace hbvm {

enum class ProblemKind { SineGordon, Nlse, Kdv };

inline std::string_view problem_name(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::SineGordon: return "sine-gordon";
    case ProblemKind::Nlse: return "nlse";
    case ProblemKind::Kdv: return "kdv";
  }
  return "?";
}

inline std::optional<ProblemKind> parse_problem(std::string_view name) {
  if (name == "sine-gordon" || name == "sg") return ProblemKind::SineGordon;
  if (name == "nlse" || name == "nls") return ProblemKind::Nlse;
  if (name == "kdv") return ProblemKind::Kdv;
  return std::nullopt;
}

inline double sech(double x) { return 1.0 / std::cosh(x); }

// ---- exact solutions ------------------------------------------------------

/// u = 4 atan(t sech x), the breather-like solution of u_tt = u_xx - sin u.
inline double sine_gordon_exact(double x, double t) { return 4.0 * std::atan(t * sech(x)); }

/// u_t of the same solution.
inline double sine_gordon_exact_velocity(double x, double t) {
  const double s = sech(x);
  return 4.0 * s / (1.0 + t * t * s * s);
}

/// Travelling soliton of u_t = -v_xx - 2(u^2+v^2)v, v_t = u_xx + 2(u^2+v^2)u.
inline std::pair<double, double> nlse_exact(double x, double t) {
  const double amp = sech(x - 4.0 * t);
  const double phase = 2.0 * x - 3.0 * t;
  return {amp * std::cos(phase), amp * std::sin(phase)};
}

/// Periodic representative of xi in [a,b]; rem is the truncated remainder.
inline double periodic_wrap(double xi, double a, double b) {
  const double L = b - a;
  if (xi >= a && xi <= b) return xi;
  if (xi > b) return a + std::fmod(xi - a, L);
  return b - std::fmod(b - xi, L);
}

inline constexpr double kKdvEpsilon = 0.0013020833;
inline constexpr double kKdvSpeed = 1.0 / 3.0;

/// Soliton of u_t + eps u_xxx + u u_x = 0 on the periodic domain [-3,5].
inline double kdv_exact(double x, double t, double eps = kKdvEpsilon, double c = kKdvSpeed) {
  const double arg = std::sqrt(c / (4.0 * eps)) * periodic_wrap(x - c * t, -3.0, 5.0);
  const double s = sech(arg);
  return 3.0 * c * s * s;
}

// ---- problem descriptors --------------------------------------------------

struct BenchmarkProblem {
  ProblemKind kind = ProblemKind::SineGordon;
  double a = 0.0, b = 0.0;
  double T = 0.0;
  std::size_t N = 0, m = 0;
  /// Default adaptive tolerance for the spectral method.
  double spectral_tol = 1e-11;
  /// Degree of the (polynomial) Hamiltonian, if any.
  std::optional<std::size_t> hamiltonian_degree;

  std::string_view name() const { return problem_name(kind); }
  bool has_second_component() const { return kind == ProblemKind::Nlse; }

  static BenchmarkProblem sine_gordon() { return {ProblemKind::SineGordon, -50.0, 50.0, 100.0, 300, 601, 1e-11, std::nullopt}; }
  static BenchmarkProblem nlse() { return {ProblemKind::Nlse, -40.0, 80.0, 10.0, 300, 601, 1e-14, 4}; }
  static BenchmarkProblem kdv() { return {ProblemKind::Kdv, -3.0, 5.0, 24.0, 300, 901, 1e-11, 3}; }

  static BenchmarkProblem make(ProblemKind kind) {
    switch (kind) {
      case ProblemKind::SineGordon: return sine_gordon();
      case ProblemKind::Nlse: return nlse();
      case ProblemKind::Kdv: return kdv();
    }
    return sine_gordon();
  }

  /// Grid size matching the defaults' anti-aliasing margin for a given N.
  std::size_t default_m_for(std::size_t n_modes) const {
    return kind == ProblemKind::Kdv ? 3 * n_modes + 1 : 2 * n_modes + 1;
  }

  FourierBasis basis() const { return FourierBasis(a, b, N, m); }

  /// Exact solution on the closed grid: one column (u), or two (u, v) for NLSE.
  Matrix exact_on_grid(const FourierBasis& basis, double t) const {
    const Vector& x = basis.grid();
    Matrix out(x.size(), has_second_component() ? 2 : 1);
    for (Index i = 0; i < x.size(); ++i) {
      switch (kind) {
        case ProblemKind::SineGordon: out(i, 0) = sine_gordon_exact(x(i), t); break;
        case ProblemKind::Nlse: {
          const auto [u, v] = nlse_exact(x(i), t);
          out(i, 0) = u;
          out(i, 1) = v;
          break;
        }
        case ProblemKind::Kdv: out(i, 0) = kdv_exact(x(i), t); break;
      }
    }
    return out;
  }
};

// ---- semi-discrete state --------------------------------------------------

struct InitialState {
  Vector y;
  /// KdV only: constant mean value of u; zero otherwise.
  double mean = 0.0;
  /// max_i |eval(project(u_0))(x_i) - u_0(x_i)| over all projected components.
  double residual = 0.0;
  bool aliasing_risk = false;
};

/// Projects the exact data at t = 0 onto the basis.
inline InitialState initial_state(const BenchmarkProblem& problem, const FourierBasis& basis) {
  InitialState out;
  out.aliasing_risk = basis.aliasing_risk();
  const Vector& x = basis.grid();
  const Index npts = x.size();

  auto fit = [&](Layout layout, const Vector& values, double offset) {
    const Vector c = basis.project(layout, (values.array() - offset).matrix());
    const Vector back = basis.eval_on_grid(layout, c, offset);
    out.residual = std::max(out.residual, (back - values).lpNorm<Eigen::Infinity>());
    return c;
  };

  switch (problem.kind) {
    case ProblemKind::SineGordon: {
      Vector u(npts), ut(npts);
      for (Index i = 0; i < npts; ++i) {
        u(i) = sine_gordon_exact(x(i), 0.0);
        ut(i) = sine_gordon_exact_velocity(x(i), 0.0);
      }
      out.y.resize(2 * basis.size(Layout::WaveNls));
      out.y << fit(Layout::WaveNls, u, 0.0), fit(Layout::WaveNls, ut, 0.0);
      break;
    }
    case ProblemKind::Nlse: {
      Vector u(npts), v(npts);
      for (Index i = 0; i < npts; ++i) std::tie(u(i), v(i)) = nlse_exact(x(i), 0.0);
      out.y.resize(2 * basis.size(Layout::WaveNls));
      out.y << fit(Layout::WaveNls, u, 0.0), fit(Layout::WaveNls, v, 0.0);
      break;
    }
    case ProblemKind::Kdv: {
      Vector u(npts);
      for (Index i = 0; i < npts; ++i) u(i) = kdv_exact(x(i), 0.0);
      out.mean = basis.trapezoid(u) / basis.length();
      out.y = fit(Layout::Kdv, u, out.mean);
      break;
    }
  }
  return out;
}

/// Semi-discrete system for a problem. KdV: u_t + eps u_xxx + u u_x = 0 maps
/// to nu = -eps, mu = -1.
inline std::unique_ptr<HamiltonianSystem> make_system(const BenchmarkProblem& problem, const FourierBasis& basis,
                                                      double mean = 0.0) {
  switch (problem.kind) {
    case ProblemKind::SineGordon: return std::make_unique<WaveSystem>(basis, WavePotential::sine_gordon());
    case ProblemKind::Nlse: return std::make_unique<NlsSystem>(basis, 2.0);
    case ProblemKind::Kdv: return std::make_unique<KdvSystem>(basis, -kKdvEpsilon, -1.0, mean);
  }
  throw InvalidParams("unknown problem");
}

/// Numerical solution on the closed grid, same column convention as exact_on_grid.
inline Matrix solution_on_grid(const BenchmarkProblem& problem, const FourierBasis& basis, const Vector& y,
                               double mean = 0.0) {
  if (problem.kind == ProblemKind::Kdv) return basis.eval_on_grid(Layout::Kdv, y, mean);
  const Index n = basis.size(Layout::WaveNls);
  if (y.size() != 2 * n) throw LayoutMismatch("state length does not match 2(2N+1)");
  if (problem.kind == ProblemKind::SineGordon) return basis.eval_on_grid(Layout::WaveNls, y.head(n));
  Matrix out(basis.grid().size(), 2);
  out.col(0) = basis.eval_on_grid(Layout::WaveNls, y.head(n));
  out.col(1) = basis.eval_on_grid(Layout::WaveNls, y.tail(n));
  return out;
}

// ---- error metrics --------------------------------------------------------

struct ErrorReport {
  double e_u = 0.0;  // max over samples of the grid inf-norm error (both components for NLSE)
  double e_H = 0.0;  // max |H_n - H_0|
  std::optional<double> e_1, e_2;  // NLSE quadratic invariants
  std::size_t samples = 0;
};

/// One stored point of a trajectory.
struct TrajectorySample {
  double t = 0.0;
  Vector y;
  double H = 0.0;
  std::vector<NamedValue> invariants;
};

/// Running maxima so long integrations never keep the trajectory.
class ErrorTracker {
 public:
  ErrorTracker(const BenchmarkProblem& problem, const FourierBasis& basis, double mean = 0.0)
      : problem_(problem), basis_(&basis), mean_(mean) {}

  void observe(double t, const Vector& y, double H, const std::vector<NamedValue>& invariants) {
    const Matrix num = solution_on_grid(problem_, *basis_, y, mean_);
    const Matrix ref = problem_.exact_on_grid(*basis_, t);
    observe_grid(num, ref, H, invariants);
  }

  void observe_grid(const Matrix& numerical, const Matrix& exact, double H,
                    const std::vector<NamedValue>& invariants) {
    report_.e_u = std::max(report_.e_u, (numerical - exact).lpNorm<Eigen::Infinity>());
    observe_invariants(H, invariants);
  }

  void observe_invariants(double H, const std::vector<NamedValue>& invariants) {
    if (report_.samples == 0) {
      H0_ = H;
      inv0_ = invariants;
    }
    report_.e_H = std::max(report_.e_H, std::abs(H - H0_));
    const std::size_t tracked = std::min<std::size_t>({2, invariants.size(), inv0_.size()});
    for (std::size_t i = 0; i < tracked; ++i) {
      const double dev = std::abs(invariants[i].value - inv0_[i].value);
      auto& slot = (i == 0) ? report_.e_1 : report_.e_2;
      slot = std::max(slot.value_or(0.0), dev);
    }
    ++report_.samples;
  }

  const ErrorReport& report() const { return report_; }

 private:
  BenchmarkProblem problem_;
  const FourierBasis* basis_;
  double mean_;
  double H0_ = 0.0;
  std::vector<NamedValue> inv0_;
  ErrorReport report_;
};

inline ErrorReport measure_errors(const std::vector<TrajectorySample>& trajectory, const BenchmarkProblem& problem,
                                  const FourierBasis& basis, double mean = 0.0) {
  ErrorTracker tracker(problem, basis, mean);
  for (const auto& sample : trajectory) tracker.observe(sample.t, sample.y, sample.H, sample.invariants);
  return tracker.report();
}

/// Observed order between step counts n_coarse < n_fine.
inline double convergence_rate(double e_coarse, double e_fine, double n_coarse, double n_fine) {
  return std::log2(e_coarse / e_fine) / std::log2(n_fine / n_coarse);
}

}  // namespace hbvm
