#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "hbvm/benchmarks.hpp"

using namespace hbvm;

namespace {

constexpr double kPi = std::numbers::pi;

// Central differences with step d.
template <class F>
double d1(F f, double x, double d) {
  return (f(x + d) - f(x - d)) / (2 * d);
}
template <class F>
double d2(F f, double x, double d) {
  return (f(x + d) - 2 * f(x) + f(x - d)) / (d * d);
}
template <class F>
double d3(F f, double x, double d) {
  return (f(x + 2 * d) - 2 * f(x + d) + 2 * f(x - d) - f(x - 2 * d)) / (2 * d * d * d);
}

}  // namespace

TEST(ExactSolutions, SineGordonValues) {
  for (double x : {-10.0, 0.0, 3.5}) EXPECT_EQ(sine_gordon_exact(x, 0.0), 0.0);
  EXPECT_NEAR(sine_gordon_exact(0.0, 1.0), kPi, 1e-15);
  EXPECT_NEAR(sine_gordon_exact_velocity(0.0, 0.0), 4.0, 1e-15);
  EXPECT_NEAR(sine_gordon_exact(0.0, 100.0), 4.0 * std::atan(100.0), 1e-14);
}

TEST(ExactSolutions, NlseValues) {
  const auto [u0, v0] = nlse_exact(0.0, 0.0);
  EXPECT_EQ(u0, 1.0);
  EXPECT_EQ(v0, 0.0);
  const auto [u1, v1] = nlse_exact(1.5, 1.0);
  EXPECT_NEAR(u1, 1.0 / std::cosh(2.5), 1e-15);
  EXPECT_NEAR(v1, 0.0, 1e-15);
  const auto [u2, v2] = nlse_exact(0.7, 2.3);
  EXPECT_NEAR(u2 * u2 + v2 * v2, std::pow(1.0 / std::cosh(0.7 - 9.2), 2), 1e-15);
}

TEST(ExactSolutions, PeriodicWrap) {
  EXPECT_EQ(periodic_wrap(1.0, -3.0, 5.0), 1.0);
  EXPECT_EQ(periodic_wrap(6.0, -3.0, 5.0), -2.0);
  EXPECT_EQ(periodic_wrap(-4.0, -3.0, 5.0), 4.0);
  EXPECT_EQ(periodic_wrap(5.0, -3.0, 5.0), 5.0);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-100.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const double xi = dist(rng);
    const double w = periodic_wrap(xi, -3.0, 5.0);
    EXPECT_GE(w, -3.0);
    EXPECT_LE(w, 5.0);
    EXPECT_EQ(periodic_wrap(w, -3.0, 5.0), w);
    const double turns = (xi - w) / 8.0;
    EXPECT_NEAR(turns, std::round(turns), 1e-12);
  }
}

TEST(ExactSolutions, KdvValues) {
  EXPECT_NEAR(kdv_exact(0.0, 0.0), 1.0, 1e-15);
  EXPECT_LE(kdv_exact(5.0, 0.0), 1e-30);
  EXPECT_LE(kdv_exact(-3.0, 0.0), 1e-20);
  // One period of travel over the window length 8 at speed 1/3.
  for (double x = -3.0; x <= 5.0; x += 0.01) EXPECT_NEAR(kdv_exact(x, 24.0), kdv_exact(x, 0.0), 1e-12) << x;
}

TEST(ExactSolutions, SatisfySineGordon) {
  const double d = 1e-4;
  for (double x : {-2.0, -0.3, 0.0, 1.1, 4.0}) {
    for (double t : {0.5, 1.0, 7.0}) {
      const double utt = d2([&](double s) { return sine_gordon_exact(x, s); }, t, d);
      const double uxx = d2([&](double z) { return sine_gordon_exact(z, t); }, x, d);
      EXPECT_LE(std::abs(utt - uxx + std::sin(sine_gordon_exact(x, t))), 1e-5) << x << "," << t;
      const double ut = d1([&](double s) { return sine_gordon_exact(x, s); }, t, d);
      EXPECT_NEAR(ut, sine_gordon_exact_velocity(x, t), 1e-7);
    }
  }
}

TEST(ExactSolutions, SatisfyNlse) {
  const double d = 1e-4;
  auto U = [](double x, double t) { return nlse_exact(x, t).first; };
  auto V = [](double x, double t) { return nlse_exact(x, t).second; };
  for (double x : {-1.0, 0.2, 2.5}) {
    for (double t : {0.0, 0.4, 1.0}) {
      const double u = U(x, t), v = V(x, t), r2 = u * u + v * v;
      const double ut = d1([&](double s) { return U(x, s); }, t, d);
      const double vt = d1([&](double s) { return V(x, s); }, t, d);
      const double uxx = d2([&](double z) { return U(z, t); }, x, d);
      const double vxx = d2([&](double z) { return V(z, t); }, x, d);
      EXPECT_LE(std::abs(ut + vxx + 2 * r2 * v), 1e-5);
      EXPECT_LE(std::abs(vt - uxx - 2 * r2 * u), 1e-5);
    }
  }
}

TEST(ExactSolutions, SatisfyKdv) {
  const double d = 1e-4;
  for (double x : {-0.4, -0.1, 0.0, 0.15, 0.9}) {
    for (double t : {0.0, 0.6, 1.5}) {
      const double ut = d1([&](double s) { return kdv_exact(x, s); }, t, d);
      const double ux = d1([&](double z) { return kdv_exact(z, t); }, x, d);
      const double uxxx = d3([&](double z) { return kdv_exact(z, t); }, x, d);
      EXPECT_LE(std::abs(ut + kKdvEpsilon * uxxx + kdv_exact(x, t) * ux), 1e-5) << x << "," << t;
    }
  }
}

TEST(Problems, Defaults) {
  const auto sg = BenchmarkProblem::sine_gordon();
  EXPECT_EQ(sg.a, -50.0);
  EXPECT_EQ(sg.b, 50.0);
  EXPECT_EQ(sg.T, 100.0);
  EXPECT_EQ(sg.N, 300u);
  EXPECT_EQ(sg.m, 601u);
  const auto nl = BenchmarkProblem::nlse();
  EXPECT_EQ(nl.a, -40.0);
  EXPECT_EQ(nl.b, 80.0);
  EXPECT_EQ(nl.T, 10.0);
  EXPECT_EQ(nl.spectral_tol, 1e-14);
  EXPECT_EQ(nl.hamiltonian_degree, 4u);
  const auto kd = BenchmarkProblem::kdv();
  EXPECT_EQ(kd.a, -3.0);
  EXPECT_EQ(kd.b, 5.0);
  EXPECT_EQ(kd.T, 24.0);
  EXPECT_EQ(kd.m, 901u);
  EXPECT_EQ(kd.hamiltonian_degree, 3u);
  EXPECT_TRUE(nl.has_second_component());
  EXPECT_FALSE(kd.has_second_component());
  EXPECT_EQ(parse_problem("kdv"), ProblemKind::Kdv);
  EXPECT_EQ(parse_problem("sine-gordon"), ProblemKind::SineGordon);
  EXPECT_FALSE(parse_problem("burgers"));
}

TEST(Problems, InitialProjectionIsExact) {
  for (ProblemKind kind : {ProblemKind::SineGordon, ProblemKind::Nlse, ProblemKind::Kdv}) {
    const BenchmarkProblem p = BenchmarkProblem::make(kind);
    const FourierBasis basis = p.basis();
    const InitialState init = initial_state(p, basis);
    EXPECT_LE(init.residual, 1e-12) << p.name();
    EXPECT_FALSE(init.aliasing_risk);
    const Matrix err = solution_on_grid(p, basis, init.y, init.mean) - p.exact_on_grid(basis, 0.0);
    EXPECT_LE(err.lpNorm<Eigen::Infinity>(), 1e-12) << p.name();
  }
}

TEST(Problems, KdvMeanIsTheAverage) {
  const BenchmarkProblem p = BenchmarkProblem::kdv();
  const FourierBasis basis = p.basis();
  const InitialState init = initial_state(p, basis);
  // Integral of 3c sech^2(a x) over the line is 6c/a, a = sqrt(c / 4 eps); the
  // tails outside the window are below 1e-30.
  const double a = std::sqrt(kKdvSpeed / (4.0 * kKdvEpsilon));
  EXPECT_NEAR(init.mean, 6.0 * kKdvSpeed / a / 8.0, 1e-15);
}

TEST(Errors, ExactGridGivesZero) {
  const BenchmarkProblem p = BenchmarkProblem::nlse();
  const FourierBasis basis(p.a, p.b, 20, 41);
  ErrorTracker tracker(p, basis);
  for (double t : {0.0, 0.5, 1.0}) {
    const Matrix ref = p.exact_on_grid(basis, t);
    tracker.observe_grid(ref, ref, 2.0, {{"M1", 1.0}, {"M2", 3.0}});
  }
  EXPECT_EQ(tracker.report().e_u, 0.0);
  EXPECT_EQ(tracker.report().e_H, 0.0);
  EXPECT_EQ(tracker.report().e_1, 0.0);
  EXPECT_EQ(tracker.report().e_2, 0.0);
  EXPECT_EQ(tracker.report().samples, 3u);
}

TEST(Errors, ProjectedTrajectoryHasRoundOffErrors) {
  const BenchmarkProblem p = BenchmarkProblem::sine_gordon();
  const FourierBasis basis = p.basis();
  std::vector<TrajectorySample> traj;
  for (double t : {0.0, 1.0, 2.0}) {
    Vector u(basis.grid().size()), ut(basis.grid().size());
    for (Index i = 0; i < u.size(); ++i) {
      u(i) = sine_gordon_exact(basis.grid()(i), t);
      ut(i) = sine_gordon_exact_velocity(basis.grid()(i), t);
    }
    Vector y(2 * basis.size(Layout::WaveNls));
    y << basis.project(Layout::WaveNls, u), basis.project(Layout::WaveNls, ut);
    traj.push_back({t, y, 1.0, {}});
  }
  const ErrorReport rep = measure_errors(traj, p, basis);
  EXPECT_LE(rep.e_u, 1e-12);
  EXPECT_EQ(rep.e_H, 0.0);
  EXPECT_FALSE(rep.e_1.has_value());
}

TEST(Errors, HamiltonianErrorIgnoresConstantShift) {
  const BenchmarkProblem p = BenchmarkProblem::kdv();
  const FourierBasis basis(p.a, p.b, 10, 31);
  auto run = [&](double shift) {
    ErrorTracker tracker(p, basis);
    const Matrix ref = p.exact_on_grid(basis, 0.0);
    for (double H : {1.0, 1.0 + 1e-9, 1.0 - 3e-9, 1.0}) tracker.observe_grid(ref, ref, H + shift, {});
    return tracker.report().e_H;
  };
  EXPECT_NEAR(run(0.0), 3e-9, 1e-15);
  EXPECT_NEAR(run(5.0), run(0.0), 1e-14);
}

TEST(Errors, ConvergenceRate) {
  EXPECT_DOUBLE_EQ(convergence_rate(1.6e-3, 1e-4, 100, 200), 4.0);
  EXPECT_DOUBLE_EQ(convergence_rate(1.0, 1.0, 100, 200), 0.0);
  EXPECT_NEAR(convergence_rate(1.0, 1.0 / 64.0, 100, 400), 3.0, 1e-15);
}
