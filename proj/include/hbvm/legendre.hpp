#pragma once

// Shifted orthonormal Legendre polynomials on [0,1] and Gauss-Legendre rules.
//
// P_j(x) = sqrt(2j+1) * L_j(2x-1), where L_j is the classical Legendre
// polynomial on [-1,1]. With this scaling  int_0^1 P_i P_j dx = delta_ij.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "hbvm/errors.hpp"

namespace hbvm {

namespace detail {

// Classical Legendre values (L_{j-1}(t), L_j(t)) by the three-term recurrence.
inline std::pair<double, double> legendre_pair(std::size_t j, double t) {
  double prev = 1.0;  // L_0
  if (j == 0) return {0.0, prev};
  double cur = t;  // L_1
  for (std::size_t n = 1; n < j; ++n) {
    const double nd = static_cast<double>(n);
    const double next = ((2.0 * nd + 1.0) * t * cur - nd * prev) / (nd + 1.0);
    prev = cur;
    cur = next;
  }
  return {prev, cur};
}

inline double legendre(std::size_t j, double t) { return legendre_pair(j, t).second; }

}  // namespace detail

/// Orthonormal shifted Legendre polynomial of degree j evaluated at x.
inline double shifted_legendre(std::size_t j, double x) {
  return std::sqrt(2.0 * static_cast<double>(j) + 1.0) * detail::legendre(j, 2.0 * x - 1.0);
}

/// All of P_0(x), ..., P_{count-1}(x) in one pass.
inline std::vector<double> shifted_legendre_all(std::size_t count, double x) {
  std::vector<double> out(count);
  const double t = 2.0 * x - 1.0;
  double prev = 1.0, cur = t;
  for (std::size_t j = 0; j < count; ++j) {
    double lj;
    if (j == 0) {
      lj = 1.0;
    } else if (j == 1) {
      lj = t;
    } else {
      const double nd = static_cast<double>(j - 1);
      const double next = ((2.0 * nd + 1.0) * t * cur - nd * prev) / (nd + 1.0);
      prev = cur;
      cur = next;
      lj = cur;
    }
    out[j] = std::sqrt(2.0 * static_cast<double>(j) + 1.0) * lj;
  }
  return out;
}

/// int_0^c P_j(x) dx.
///
/// Uses (2j+1) L_j = d/dt (L_{j+1} - L_{j-1}); the lower limit t = -1
/// contributes nothing since L_{j+1}(-1) = L_{j-1}(-1).
inline double shifted_legendre_primitive(std::size_t j, double c) {
  if (j == 0) return c;
  const double t = 2.0 * c - 1.0;
  const double up = detail::legendre(j + 1, t);
  const double down = detail::legendre(j - 1, t);
  return (up - down) / (2.0 * std::sqrt(2.0 * static_cast<double>(j) + 1.0));
}

/// k-point Gauss-Legendre rule on [0,1].
struct QuadratureRule {
  std::size_t k = 0;
  std::vector<double> c;  // nodes, strictly increasing in (0,1)
  std::vector<double> b;  // positive weights, summing to one

  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) acc += b[i] * f(c[i]);
    return acc;
  }
};

inline constexpr std::size_t kMaxQuadratureNodes = 64;

/// Gauss-Legendre nodes and weights of order 2k, mapped to [0,1].
///
/// Newton iteration on L_k started from the Chebyshev-like guesses
/// cos(pi (i - 1/4) / (k + 1/2)). Only the upper half of the roots is
/// computed; the rest follow by reflection so the rule is exactly symmetric.
inline QuadratureRule gauss_legendre(std::size_t k) {
  if (k < 1 || k > kMaxQuadratureNodes)
    throw InvalidParams("gauss_legendre: k must be in [1, " +
                        std::to_string(kMaxQuadratureNodes) + "], got " + std::to_string(k));

  QuadratureRule rule;
  rule.k = k;
  rule.c.assign(k, 0.0);
  rule.b.assign(k, 0.0);

  const double kd = static_cast<double>(k);
  const std::size_t half = (k + 1) / 2;
  constexpr int kMaxNewton = 100;

  for (std::size_t i = 1; i <= half; ++i) {
    double t = std::cos(std::numbers::pi * (static_cast<double>(i) - 0.25) / (kd + 0.5));
    double deriv = 0.0;
    bool done = false;
    for (int it = 0; it < kMaxNewton; ++it) {
      const auto [lm1, lk] = detail::legendre_pair(k, t);
      deriv = kd * (t * lk - lm1) / (t * t - 1.0);
      const double dt = lk / deriv;
      t -= dt;
      if (std::abs(dt) <= 1e-16 * std::max(1.0, std::abs(t))) {
        done = true;
        break;
      }
    }
    if (!done)
      throw NonConvergence("gauss_legendre: Newton failed for root " + std::to_string(i) +
                           " of k=" + std::to_string(k));
    // One more derivative evaluation at the converged root for the weight.
    const auto [lm1, lk] = detail::legendre_pair(k, t);
    deriv = kd * (t * lk - lm1) / (t * t - 1.0);
    const double w = 1.0 / ((1.0 - t * t) * deriv * deriv);  // (2/(...))/2

    // Root i (descending t) maps to the upper node; its mirror to the lower.
    const std::size_t hi = k - i;
    const std::size_t lo = i - 1;
    rule.c[hi] = 0.5 * (1.0 + t);
    rule.c[lo] = 0.5 * (1.0 - t);
    rule.b[hi] = w;
    rule.b[lo] = w;
  }
  if (k % 2 == 1) rule.c[k / 2] = 0.5;
  return rule;
}

}  // namespace hbvm
