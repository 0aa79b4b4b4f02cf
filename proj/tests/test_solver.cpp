#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hbvm/benchmarks.hpp"
#include "hbvm/pde_systems.hpp"
#include "hbvm/solver.hpp"
#include "hbvm/tableau.hpp"
#include "test_systems.hpp"

using namespace hbvm;
using hbvm::testing::OneDofSystem;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

// Exact flow of q' = p, p' = -q.
Vector oscillator_exact(const Vector& y0, double t) {
  return vec2(y0(0) * std::cos(t) + y0(1) * std::sin(t), -y0(0) * std::sin(t) + y0(1) * std::cos(t));
}

Vector integrate(const HamiltonianSystem& sys, Vector y, double h, std::size_t steps, const HbvmTableau& tab,
                 SolverConfig cfg = {}) {
  GammaSolver solver(sys, cfg);
  GammaSolution prev;
  for (std::size_t i = 0; i < steps; ++i) {
    auto [y1, sol] = solver.step(y, h, tab, i ? &prev : nullptr);
    y = y1;
    prev = sol;
  }
  return y;
}

// Sine-Gordon data at t = 1 projected on a small basis.
std::pair<WaveSystem, Vector> small_sine_gordon() {
  FourierBasis basis(-50.0, 50.0, 10, 21);
  Vector u(basis.grid().size()), ut(basis.grid().size());
  for (Index i = 0; i < u.size(); ++i) {
    u(i) = sine_gordon_exact(basis.grid()(i), 1.0);
    ut(i) = sine_gordon_exact_velocity(basis.grid()(i), 1.0);
  }
  Vector y(2 * basis.size(Layout::WaveNls));
  y << basis.project(Layout::WaveNls, u), basis.project(Layout::WaveNls, ut);
  return {WaveSystem(basis), y};
}

// m > 4N so that M_2 is an exact invariant of the semi-discrete problem.
std::pair<NlsSystem, Vector> small_nlse() {
  FourierBasis basis(-40.0, 80.0, 8, 33);
  Vector u(basis.grid().size()), v(basis.grid().size());
  for (Index i = 0; i < u.size(); ++i) {
    const auto [a, b] = nlse_exact(basis.grid()(i), 0.0);
    u(i) = a;
    v(i) = b;
  }
  Vector y(2 * basis.size(Layout::WaveNls));
  y << basis.project(Layout::WaveNls, u), basis.project(Layout::WaveNls, v);
  return {NlsSystem(basis), y};
}

}  // namespace

TEST(SolveGamma, ZeroFieldNeedsOneIteration) {
  const OneDofSystem sys = OneDofSystem::zero();
  for (SolverMode mode : {SolverMode::FixedPoint, SolverMode::LinearNewton}) {
    SolverConfig cfg;
    cfg.mode = mode;
    const GammaSolution sol = solve_gamma(sys, vec2(0.3, -2.0), 0.7, build_tableau(5, 3), cfg);
    EXPECT_TRUE(sol.converged);
    EXPECT_EQ(sol.iterations, 1u);
    EXPECT_EQ(sol.gammas.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(sol.rho, 0.0);
  }
}

TEST(SolveGamma, LinearProblemSolvedByFirstNewtonUpdate) {
  const auto sys = LinearHamiltonianSystem::harmonic_oscillator(3.0);
  const HbvmTableau tab = build_tableau(6, 4);
  const Vector y0 = vec2(1.0, 0.5);
  const double h = 0.3;
  const GammaSolution sol = solve_gamma(sys, y0, h, tab);
  // One update plus the iteration that confirms it.
  EXPECT_EQ(sol.iterations, 2u);
  EXPECT_LE(sol.residual, 1e-13);

  // Residual of the discrete problem, assembled independently.
  Matrix Y = h * sol.gammas * tab.Is.transpose();
  Y.colwise() += y0;
  Matrix F;
  sys.rhs(Y, F);
  const Matrix R = sol.gammas - F * tab.W.transpose();
  EXPECT_LE(R.cwiseAbs().maxCoeff(), 1e-13);
}

TEST(SolveGamma, OscillatorMatchesRootFinder) {
  const auto sys = LinearHamiltonianSystem::harmonic_oscillator();
  const HbvmTableau tab = build_tableau(2, 1);
  const Vector y0 = vec2(1.0, 0.0);
  const double h = 0.1;

  // g = sum_i b_i phi(y0 + h c_i g), solved by Newton with a difference Jacobian.
  const QuadratureRule rule = gauss_legendre(2);
  auto F = [&](const Vector& g) {
    Vector out = g;
    for (std::size_t i = 0; i < 2; ++i) out -= rule.b[i] * sys.rhs(Vector(y0 + h * rule.c[i] * g));
    return out;
  };
  Vector g = Vector::Zero(2);
  for (int it = 0; it < 20; ++it) {
    Matrix Jac(2, 2);
    const Vector f0 = F(g);
    for (Index j = 0; j < 2; ++j) {
      Vector e = Vector::Zero(2);
      e(j) = 1e-7;
      Jac.col(j) = (F(Vector(g + e)) - f0) / 1e-7;
    }
    g -= Jac.fullPivLu().solve(f0);
  }
  ASSERT_LE(F(g).cwiseAbs().maxCoeff(), 1e-15);

  for (SolverMode mode : {SolverMode::FixedPoint, SolverMode::LinearNewton}) {
    SolverConfig cfg;
    cfg.mode = mode;
    const GammaSolution sol = solve_gamma(sys, y0, h, tab, cfg);
    EXPECT_LE((sol.gammas.col(0) - g).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SolveGamma, ModesAgree) {
  auto [sys, y0] = small_nlse();
  const HbvmTableau tab = build_tableau(4, 2);
  SolverConfig fp;
  fp.mode = SolverMode::FixedPoint;
  SolverConfig nw;
  const GammaSolution a = solve_gamma(sys, y0, 0.01, tab, fp);
  const GammaSolution b = solve_gamma(sys, y0, 0.01, tab, nw);
  EXPECT_LE((a.gammas - b.gammas).cwiseAbs().maxCoeff(), 10 * nw.nonlinear_tol);
}

TEST(SolveGamma, StoredRhoMatchesGammas) {
  auto [sys, y0] = small_sine_gordon();
  const GammaSolution sol = solve_gamma(sys, y0, 0.5, build_tableau(20, 8));
  EXPECT_EQ(sol.rho, rho_ratio(sol.gammas));
  EXPECT_EQ(sol.s(), 8u);
}

TEST(SolveGamma, ReportsNoConvergence) {
  auto [sys, y0] = small_sine_gordon();
  SolverConfig cfg;
  cfg.mode = SolverMode::FixedPoint;
  cfg.max_iters = 2;
  try {
    solve_gamma(sys, y0, 0.5, build_tableau(4, 2), cfg);
    FAIL() << "expected NoConvergence";
  } catch (const NoConvergence& e) {
    EXPECT_EQ(e.iterations(), 2u);
    EXPECT_GT(e.last_residual(), 0.0);
  }
}

TEST(SolveGamma, RejectsBadInput) {
  const auto sys = LinearHamiltonianSystem::harmonic_oscillator();
  const HbvmTableau tab = build_tableau(2, 2);
  EXPECT_THROW(solve_gamma(sys, vec2(1, 0), 0.0, tab), InvalidParams);
  EXPECT_THROW(solve_gamma(sys, Vector::Zero(3), 0.1, tab), InvalidParams);
  SolverConfig cfg;
  cfg.max_iters = 0;
  EXPECT_THROW(GammaSolver(sys, cfg), InvalidParams);
}

TEST(Step, UpdateUsesFirstCoefficient) {
  auto [sys, y0] = small_sine_gordon();
  const HbvmTableau tab = build_tableau(6, 3);
  const auto [y1, sol] = step(sys, y0, 0.2, tab);
  EXPECT_LE((y1 - (y0 + 0.2 * sol.gammas.col(0))).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Step, ConsistencyDefectIsSecondOrder) {
  const auto sys = LinearHamiltonianSystem::harmonic_oscillator();
  const HbvmTableau tab = build_tableau(4, 2);
  const Vector y0 = vec2(1.0, 0.0);
  auto defect = [&](double h) {
    const auto [y1, sol] = step(sys, y0, h, tab);
    return (y1 - (y0 + h * sys.rhs(y0))).norm();
  };
  const double ratio = defect(1e-3) / defect(5e-4);
  EXPECT_NEAR(ratio, 4.0, 0.5);
}

TEST(Step, QuadraticHamiltonianConserved) {
  const auto sys = LinearHamiltonianSystem::harmonic_oscillator();
  const Vector y0 = vec2(1.0, 0.25);
  const double H0 = sys.hamiltonian(y0);
  const std::pair<std::size_t, std::size_t> methods[] = {{1, 1}, {2, 1}, {3, 2}, {5, 3}, {6, 6}, {8, 4}, {20, 12}};
  for (const auto& [k, s] : methods) {
    const Vector y = integrate(sys, y0, 0.1, 100, build_tableau(k, s));
    EXPECT_LE(std::abs(sys.hamiltonian(y) - H0), 1e-13) << "HBVM(" << k << "," << s << ")";
  }
}

TEST(Step, OrderTwoS) {
  const auto sys = LinearHamiltonianSystem::harmonic_oscillator();
  const Vector y0 = vec2(1.0, 0.0);
  const double T = 2.0;
  for (std::size_t s = 1; s <= 3; ++s) {
    for (std::size_t k : {s, s + 2}) {
      const HbvmTableau tab = build_tableau(k, s);
      const double e1 = (integrate(sys, y0, T / 20, 20, tab) - oscillator_exact(y0, T)).norm();
      const double e2 = (integrate(sys, y0, T / 40, 40, tab) - oscillator_exact(y0, T)).norm();
      EXPECT_NEAR(std::log2(e1 / e2), 2.0 * static_cast<double>(s), 0.3) << "HBVM(" << k << "," << s << ")";
    }
  }
}

TEST(Step, TimeSymmetric) {
  auto [sys, y0] = small_sine_gordon();
  for (const auto& [k, s] : {std::pair<std::size_t, std::size_t>{2, 2}, {6, 3}, {20, 8}}) {
    const HbvmTableau tab = build_tableau(k, s);
    const auto [y1, a] = step(sys, y0, 0.01, tab);
    const auto [back, b] = step(sys, y1, -0.01, tab);
    EXPECT_LE((back - y0).cwiseAbs().maxCoeff(), 1e-11) << "HBVM(" << k << "," << s << ")";
  }
}

TEST(Step, PolynomialHamiltonianConservedWithExactQuadrature) {
  const OneDofSystem sys = OneDofSystem::duffing();
  const Vector y0 = vec2(1.0, 0.5);
  const double H0 = sys.hamiltonian(y0);
  for (std::size_t s = 1; s <= 3; ++s) {
    const Vector y = integrate(sys, y0, 0.1, 50, build_tableau(k_rule(s, 4), s));
    EXPECT_LE(std::abs(sys.hamiltonian(y) - H0), 1e-12) << "s=" << s;
  }
  // The midpoint rule is not energy conserving here.
  const Vector y = integrate(sys, y0, 0.1, 50, build_tableau(1, 1));
  EXPECT_GT(std::abs(sys.hamiltonian(y) - H0), 1e-8);
}

TEST(Step, GaussConservesQuadraticInvariantsOfNlse) {
  auto [sys, y0] = small_nlse();
  const auto [m1, m2] = sys.quadratic_invariants(y0);
  for (std::size_t s = 1; s <= 3; ++s) {
    const Vector y = integrate(sys, y0, 0.05, 50, build_tableau(s, s));
    const auto [n1, n2] = sys.quadratic_invariants(y);
    EXPECT_LE(std::abs(n1 - m1), 1e-12) << "s=" << s;
    EXPECT_LE(std::abs(n2 - m2), 1e-12) << "s=" << s;
  }
}
